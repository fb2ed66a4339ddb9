#include "meshfree/rbf.hpp"

#include <cmath>
#include <stdexcept>

#include "meshfree/errors.hpp"

namespace meshfree {

double multiquadric(double r, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("multiquadric: epsilon must be positive");
    if (r < 0.0) throw std::invalid_argument("multiquadric: radius must be nonnegative");
    const double t = epsilon * r;
    return std::sqrt(1.0 + t * t);
}

double multiquadric_operator(const OperatorSpec& op, const std::array<double, 2>& x0,
                             const std::array<double, 2>& xi, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("multiquadric_operator: epsilon <= 0");
    const double dx = x0[0] - xi[0], dy = x0[1] - xi[1];
    const double e2 = epsilon * epsilon;
    const double f = std::sqrt(1.0 + e2 * (dx * dx + dy * dy));
    const double f3 = f * f * f;
    const double pxx = e2 / f - e2 * e2 * dx * dx / f3;
    const double pyy = e2 / f - e2 * e2 * dy * dy / f3;
    const double pxy = -e2 * e2 * dx * dy / f3;
    return op.dxx * pxx + op.dyy * pyy + op.dxy * pxy;
}

std::vector<std::array<int, 2>> poly_basis(int degree) {
    switch (degree) {
        case 0: return {{0, 0}};
        case 1: return {{0, 0}, {1, 0}, {0, 1}};
        case 2: return {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
        default: throw std::invalid_argument("poly_basis: degree must be 0, 1 or 2");
    }
}

namespace {

double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

// star-local coordinates, center first
std::vector<std::array<double, 2>> local_points(const Star& star) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(star.offsets.size() + 1);
    pts.push_back({0.0, 0.0});
    for (const auto& o : star.offsets) pts.push_back(o);
    return pts;
}

// multiquadric minus one, evaluated without cancellation:
// sqrt(1+t) - 1 = t / (1 + sqrt(1+t))
double multiquadric_m1(double r, double epsilon) {
    const double t = epsilon * r * epsilon * r;
    return t / (1.0 + std::sqrt(1.0 + t));
}

// L applied to the monomial x^a y^b, evaluated at the origin
double op_on_monomial(const OperatorSpec& op, int a, int b) {
    if (a == 2 && b == 0) return 2.0 * op.dxx;
    if (a == 0 && b == 2) return 2.0 * op.dyy;
    if (a == 1 && b == 1) return op.dxy;
    return 0.0;
}

}  // namespace

Eigen::MatrixXd build_saddle_system(const Star& star, double epsilon, int poly_degree) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("build_saddle_system: epsilon <= 0");
    const auto pts = local_points(star);
    const auto mons = poly_basis(poly_degree);
    const int n = static_cast<int>(pts.size());
    const int m = static_cast<int>(mons.size());
    if (n + m > 50) throw std::invalid_argument("build_saddle_system: N + M exceeds 50");

    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n + m, n + m);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double r = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
            Q(i, j) = Q(j, i) = multiquadric(r, epsilon);
        }
        for (int k = 0; k < m; ++k) {
            const double p = ipow(pts[i][0], mons[k][0]) * ipow(pts[i][1], mons[k][1]);
            Q(i, n + k) = Q(n + k, i) = p;
        }
    }
    return Q;
}

RbfStencil rbf_operator_weights(const Star& star, const OperatorSpec& op, double epsilon,
                                int poly_degree) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("rbf_operator_weights: epsilon <= 0");
    if (op.empty()) throw std::invalid_argument("rbf_operator_weights: operator has no terms");
    const auto pts = local_points(star);
    const auto mons = poly_basis(poly_degree);
    const int n = static_cast<int>(pts.size());
    const int m = static_cast<int>(mons.size());
    if (n + m > 50) throw std::invalid_argument("rbf_operator_weights: N + M exceeds 50");

    // Normalize the geometry by the star radius (multiquadric depends on
    // eps*r only, so scaling offsets by 1/rad and eps by rad leaves the
    // kernel block unchanged) and use the phi-1 kernel, legal because the
    // constant monomial is always in the augmentation.  Both steps keep the
    // factorization well-conditioned near boundaries and in the flat limit.
    double rad = 0.0;
    for (const auto& o : star.offsets) rad = std::max(rad, std::hypot(o[0], o[1]));
    if (rad <= 0.0) rad = 1.0;
    const double eps_s = epsilon * rad;

    std::vector<std::array<double, 2>> sp(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) sp[i] = {pts[i][0] / rad, pts[i][1] / rad};

    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n + m, n + m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double r = std::hypot(sp[i][0] - sp[j][0], sp[i][1] - sp[j][1]);
            Q(i, j) = Q(j, i) = multiquadric_m1(r, eps_s);
        }
        for (int k = 0; k < m; ++k) {
            const double p = ipow(sp[i][0], mons[k][0]) * ipow(sp[i][1], mons[k][1]);
            Q(i, n + k) = Q(n + k, i) = p;
        }
        // L phi(|x - x_i|) at the (scaled) center; rad^2 restores the scale below
        rhs(i) = multiquadric_operator(op, {0.0, 0.0}, sp[i], eps_s);
    }
    for (int k = 0; k < m; ++k) rhs(n + k) = op_on_monomial(op, mons[k][0], mons[k][1]);

    // Degenerate geometry is detected from the factorization and the solve
    // residual rather than a condition estimate: the flat-eps regime drives
    // worst-case condition numbers through the roof while the graded saddle
    // structure keeps the actual solve accurate, and the estimate cannot
    // tell the two apart.
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Q);
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() == 0.0)
        throw StencilError("rbf_operator_weights: singular saddle system at node " +
                               std::to_string(star.center),
                           star.center);
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite())
        throw StencilError("rbf_operator_weights: saddle solve produced non-finite weights "
                           "at node " +
                               std::to_string(star.center),
                           star.center);
    const double resid = (Q * sol - rhs).cwiseAbs().maxCoeff();
    const double scale =
        std::max(rhs.cwiseAbs().maxCoeff(), Q.cwiseAbs().maxCoeff() * sol.cwiseAbs().maxCoeff());
    if (!(resid <= 1e-8 * scale))
        throw StencilError("rbf_operator_weights: saddle system too ill-conditioned at node " +
                               std::to_string(star.center),
                           star.center);

    RbfStencil out;
    out.star = star;
    out.epsilon = epsilon;
    out.poly_degree = poly_degree;
    out.c.resize(n);
    const double s2 = 1.0 / (rad * rad);
    for (int i = 0; i < n; ++i) out.c[i] = sol(i) * s2;
    return out;
}

double lagrange_cardinal(const Star& star, double epsilon, int poly_degree, int i,
                         const std::array<double, 2>& x) {
    const auto pts = local_points(star);
    const auto mons = poly_basis(poly_degree);
    const int n = static_cast<int>(pts.size());
    const int m = static_cast<int>(mons.size());
    if (i < 0 || i >= n) throw std::invalid_argument("lagrange_cardinal: index out of range");

    const Eigen::MatrixXd Q = build_saddle_system(star, epsilon, poly_degree);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Q.transpose());
    if (!(lu.rcond() > 1e-12) || lu.matrixLU().diagonal().cwiseAbs().minCoeff() == 0.0)
        throw StencilError("lagrange_cardinal: saddle system singular or conditioned worse "
                           "than 1e12",
                           star.center);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n + m);
    e(i) = 1.0;
    const Eigen::VectorXd y = lu.solve(e);

    // B(x) = [phi(|x - x_j|) ... | p_k(x) ...]
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
        acc += y(j) * multiquadric(std::hypot(x[0] - pts[j][0], x[1] - pts[j][1]), epsilon);
    for (int k = 0; k < m; ++k)
        acc += y(n + k) * ipow(x[0], mons[k][0]) * ipow(x[1], mons[k][1]);
    return acc;
}

}  // namespace meshfree
