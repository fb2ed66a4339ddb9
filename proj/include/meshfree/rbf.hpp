#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "meshfree/nodes.hpp"

namespace meshfree {

/// Coefficients of a second-order linear differential operator
/// a_xx d2/dx2 + a_yy d2/dy2 + a_xy d2/dxdy.  First-order terms are
/// deliberately absent: those go through the GFD gradient stencils.
struct OperatorSpec {
    double dxx = 0.0;
    double dyy = 0.0;
    double dxy = 0.0;

    bool empty() const { return dxx == 0.0 && dyy == 0.0 && dxy == 0.0; }
};

/// RBF-FD weights c (center first) for one operator at one star center.
struct RbfStencil {
    Star star;
    std::vector<double> c;  // weights, 1/length^2
    double epsilon = 0.0;
    int poly_degree = 1;
};

/// Multiquadric kernel sqrt(1 + (eps*r)^2).
double multiquadric(double r, double epsilon);

/// Analytic second derivatives of the multiquadric centered at xi,
/// evaluated at x0 and combined per the operator coefficients.
double multiquadric_operator(const OperatorSpec& op, const std::array<double, 2>& x0,
                             const std::array<double, 2>& xi, double epsilon);

/// Monomial exponents {1, x, y, x^2, xy, y^2} truncated to `degree`.
std::vector<std::array<int, 2>> poly_basis(int degree);

/// Symmetric (N+M)x(N+M) collocation matrix [[phi, p],[p', 0]] over the star
/// nodes (center first) in coordinates shifted to the center.
Eigen::MatrixXd build_saddle_system(const Star& star, double epsilon, int poly_degree);

/// Solves the saddle system for the operator weights.  Internally works on
/// the equivalent kernel phi - 1 with offsets scaled by the star radius,
/// which keeps the factorization well away from the flat-limit degeneracy;
/// the returned weights are identical to the plain solve.
/// Throws StencilError when the system is conditioned worse than 1e12.
RbfStencil rbf_operator_weights(const Star& star, const OperatorSpec& op, double epsilon,
                                int poly_degree);

/// Cardinal function psi_i evaluated at x (coordinates relative to the star
/// center): solves Q'y = e_i and returns y . B(x).  Satisfies
/// psi_i(x_j) = delta_ij.
double lagrange_cardinal(const Star& star, double epsilon, int poly_degree, int i,
                         const std::array<double, 2>& x);

}  // namespace meshfree
