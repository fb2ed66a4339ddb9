#pragma once

#include <iosfwd>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

namespace meshfree {

/// Row-compressed square sparse matrix.  Column indices are strictly
/// increasing within each row and no explicit zeros are stored.
struct SparseMatrix {
    int n = 0;
    std::vector<int> row_ptr;  // size n+1
    std::vector<int> col;
    std::vector<double> val;

    /// Builds from (row, col, value) triplets; duplicate entries are summed,
    /// exact zeros dropped.
    static SparseMatrix from_triplets(int n,
                                      const std::vector<std::tuple<int, int, double>>& triplets);

    int nnz() const { return static_cast<int>(val.size()); }
    void multiply(const std::vector<double>& x, std::vector<double>& y) const;
    Eigen::MatrixXd dense() const;
};

struct BicgstabParams {
    double rel_tol = 1e-12;
    int max_iter = 0;          // 0: defaults to 10*n
    bool diagonal_precond = false;  // off by default
};

struct BicgstabResult {
    std::vector<double> x;
    std::vector<double> residual_history;  // ||r||_2 per iteration, r0 first
    int iterations = 0;
    bool converged = false;
};

/// Unpreconditioned van der Vorst Bi-CGSTAB.  On rho/omega breakdown the
/// iteration restarts once from the current iterate, then fails.  Converges
/// when the true residual satisfies ||b - Ax|| <= rel_tol * ||b||.
/// Throws SolveError (with the residual history) on non-convergence.
BicgstabResult bicgstab(const SparseMatrix& A, const std::vector<double>& b,
                        const std::vector<double>& x0, const BicgstabParams& params = {});

/// Dense LU solve with partial pivoting for stencil-sized systems (n <= 64).
/// Throws SingularMatrixError on an exactly zero pivot.
Eigen::MatrixXd dense_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// 2-norm condition number sigma_max/sigma_min via dense SVD (n <= 2500).
/// Returns +infinity when sigma_min < 1e-14 * sigma_max.
double condition_number_2norm(const SparseMatrix& A);

// Matrix Market I/O (coordinate real general).
void write_matrix_market(const SparseMatrix& A, std::ostream& out);
SparseMatrix read_matrix_market(std::istream& in);
void write_matrix_market_file(const SparseMatrix& A, const std::string& path);
SparseMatrix read_matrix_market_file(const std::string& path);
void write_vector_market(const std::vector<double>& v, std::ostream& out);

}  // namespace meshfree
