#include "meshfree/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/SVD>

#include "meshfree/errors.hpp"

namespace meshfree {

SparseMatrix SparseMatrix::from_triplets(int n,
                                         const std::vector<std::tuple<int, int, double>>& trips) {
    std::map<std::pair<int, int>, double> acc;
    for (const auto& [i, j, v] : trips) {
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw std::invalid_argument("SparseMatrix::from_triplets: index out of range");
        acc[{i, j}] += v;
    }
    SparseMatrix A;
    A.n = n;
    A.row_ptr.assign(n + 1, 0);
    for (const auto& [ij, v] : acc)
        if (v != 0.0) ++A.row_ptr[ij.first + 1];
    for (int i = 0; i < n; ++i) A.row_ptr[i + 1] += A.row_ptr[i];
    A.col.resize(A.row_ptr[n]);
    A.val.resize(A.row_ptr[n]);
    std::vector<int> cursor(A.row_ptr.begin(), A.row_ptr.end() - 1);
    for (const auto& [ij, v] : acc) {  // map order = sorted columns within each row
        if (v == 0.0) continue;
        const int p = cursor[ij.first]++;
        A.col[p] = ij.second;
        A.val[p] = v;
    }
    return A;
}

void SparseMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += val[p] * x[col[p]];
        y[i] = s;
    }
}

Eigen::MatrixXd SparseMatrix::dense() const {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) D(i, col[p]) = val[p];
    return D;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;  // sequential reduction: deterministic
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

BicgstabResult bicgstab(const SparseMatrix& A, const std::vector<double>& b,
                        const std::vector<double>& x0, const BicgstabParams& params) {
    const int n = A.n;
    if (static_cast<int>(b.size()) != n || static_cast<int>(x0.size()) != n)
        throw std::invalid_argument("bicgstab: dimension mismatch");
    if (!(params.rel_tol > 0.0)) throw std::invalid_argument("bicgstab: rel_tol must be positive");
    const int max_iter = params.max_iter > 0 ? params.max_iter : 10 * n;
    constexpr double kBreakdown = 1e-30;

    BicgstabResult res;
    res.x = x0;

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {  // zero rhs short-circuit
        res.x.assign(n, 0.0);
        res.converged = true;
        res.residual_history.push_back(0.0);
        return res;
    }

    std::vector<double> minv;
    if (params.diagonal_precond) {
        minv.assign(n, 1.0);
        for (int i = 0; i < n; ++i)
            for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p)
                if (A.col[p] == i && A.val[p] != 0.0) minv[i] = 1.0 / A.val[p];
    }
    auto precond = [&](const std::vector<double>& v, std::vector<double>& out) {
        if (minv.empty()) {
            out = v;
        } else {
            out.resize(v.size());
            for (size_t i = 0; i < v.size(); ++i) out[i] = minv[i] * v[i];
        }
    };

    std::vector<double> r(n), rhat, p(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n), tmp(n);
    A.multiply(res.x, tmp);
    for (int i = 0; i < n; ++i) r[i] = b[i] - tmp[i];
    rhat = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    double resid = norm2(r);
    res.residual_history.push_back(resid);
    bool restarted = false;

    while (res.iterations < max_iter) {
        if (resid <= params.rel_tol * bnorm) {
            // accept only on a true residual check
            A.multiply(res.x, tmp);
            for (int i = 0; i < n; ++i) tmp[i] = b[i] - tmp[i];
            const double true_res = norm2(tmp);
            if (true_res <= params.rel_tol * bnorm) {
                res.converged = true;
                res.residual_history.back() = true_res;
                return res;
            }
            r = tmp;  // recurrence drifted: continue from the true residual
            rhat = r;
            rho = alpha = omega = 1.0;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            resid = true_res;
        }

        const double rho1 = dot(rhat, r);
        if (std::abs(rho1) < kBreakdown || std::abs(omega) < kBreakdown) {
            if (restarted)
                throw SolveError("bicgstab: breakdown after restart", res.residual_history);
            restarted = true;  // restart once from the current iterate
            A.multiply(res.x, tmp);
            for (int i = 0; i < n; ++i) r[i] = b[i] - tmp[i];
            rhat = r;
            rho = alpha = omega = 1.0;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            resid = norm2(r);
            continue;
        }
        const double beta = (rho1 / rho) * (alpha / omega);
        for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        precond(p, phat);
        A.multiply(phat, v);
        const double rhv = dot(rhat, v);
        if (std::abs(rhv) < kBreakdown) {
            if (restarted)
                throw SolveError("bicgstab: breakdown after restart", res.residual_history);
            restarted = true;
            A.multiply(res.x, tmp);
            for (int i = 0; i < n; ++i) r[i] = b[i] - tmp[i];
            rhat = r;
            rho = alpha = omega = 1.0;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            resid = norm2(r);
            continue;
        }
        alpha = rho1 / rhv;
        for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        if (norm2(s) <= params.rel_tol * bnorm) {
            for (int i = 0; i < n; ++i) res.x[i] += alpha * phat[i];
            ++res.iterations;
            resid = norm2(s);
            res.residual_history.push_back(resid);
            continue;  // convergence check at loop head does the true-residual test
        }
        precond(s, shat);
        A.multiply(shat, t);
        const double tt = dot(t, t);
        omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
        for (int i = 0; i < n; ++i) {
            res.x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        rho = rho1;
        resid = norm2(r);
        ++res.iterations;
        res.residual_history.push_back(resid);
    }

    // last chance: the recurrence may underestimate convergence
    A.multiply(res.x, tmp);
    for (int i = 0; i < n; ++i) tmp[i] = b[i] - tmp[i];
    if (norm2(tmp) <= params.rel_tol * bnorm) {
        res.converged = true;
        return res;
    }
    throw SolveError("bicgstab: no convergence in " + std::to_string(max_iter) + " iterations",
                     res.residual_history);
}

Eigen::MatrixXd dense_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.rows() != A.cols()) throw std::invalid_argument("dense_solve: matrix not square");
    if (A.rows() > 64) throw std::invalid_argument("dense_solve: dimension exceeds 64");
    if (B.rows() != A.rows()) throw std::invalid_argument("dense_solve: rhs dimension mismatch");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::VectorXd d = lu.matrixLU().diagonal();
    for (int i = 0; i < d.size(); ++i)
        if (d(i) == 0.0) throw SingularMatrixError("dense_solve: exactly singular matrix");
    return lu.solve(B);
}

double condition_number_2norm(const SparseMatrix& A) {
    if (A.n > 2500)
        throw std::invalid_argument("condition_number_2norm: dimension exceeds 2500");
    if (A.n == 0) throw std::invalid_argument("condition_number_2norm: empty matrix");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A.dense());
    const auto& sv = svd.singularValues();
    const double smax = sv(0), smin = sv(sv.size() - 1);
    if (smin < 1e-14 * smax) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

void write_matrix_market(const SparseMatrix& A, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << A.n << " " << A.n << " " << A.nnz() << "\n";
    char buf[96];
    for (int i = 0; i < A.n; ++i)
        for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i + 1, A.col[p] + 1, A.val[p]);
            out << buf;
        }
}

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
        throw std::invalid_argument("read_matrix_market: missing banner");
    if (line.find("coordinate") == std::string::npos ||
        line.find("general") == std::string::npos)
        throw std::invalid_argument("read_matrix_market: only coordinate/general supported");
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '%') break;
    int rows = 0, cols = 0, nnz = 0;
    {
        std::istringstream ls(line);
        if (!(ls >> rows >> cols >> nnz) || rows != cols)
            throw std::invalid_argument("read_matrix_market: bad size line");
    }
    std::vector<std::tuple<int, int, double>> trips;
    trips.reserve(nnz);
    for (int k = 0; k < nnz; ++k) {
        int i, j;
        double v;
        if (!(in >> i >> j >> v)) throw std::invalid_argument("read_matrix_market: short file");
        trips.emplace_back(i - 1, j - 1, v);
    }
    return SparseMatrix::from_triplets(rows, trips);
}

void write_matrix_market_file(const SparseMatrix& A, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::invalid_argument("cannot open " + path + " for writing");
    write_matrix_market(A, f);
}

SparseMatrix read_matrix_market_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open " + path);
    return read_matrix_market(f);
}

void write_vector_market(const std::vector<double>& v, std::ostream& out) {
    out << "%%MatrixMarket matrix array real general\n";
    out << v.size() << " 1\n";
    char buf[64];
    for (double x : v) {
        std::snprintf(buf, sizeof buf, "%.17g\n", x);
        out << buf;
    }
}

}  // namespace meshfree
