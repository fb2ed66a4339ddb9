#include "meshfree/gfd.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "meshfree/errors.hpp"

namespace meshfree {

double mls_weight(double distance) {
    if (!(distance > 0.0))
        throw std::invalid_argument("mls_weight: distance must be positive");
    return 1.0 / (distance * distance);
}

namespace {

// Solves the weighted normal system S = A'W^2 A for B = S^-1 A'W^2 and folds
// the rows into center-first weights.  Shared by the 2- and 5-column fits.
std::vector<std::vector<double>> wls_rows(const Star& star, const Eigen::MatrixXd& A,
                                          const WeightKernel& kernel) {
    const int m = A.rows(), p = A.cols();
    Eigen::VectorXd w2(m);
    for (int i = 0; i < m; ++i) {
        const double d = std::hypot(star.offsets[i][0], star.offsets[i][1]);
        const double w = kernel ? kernel(d) : mls_weight(d);
        w2(i) = w * w;
    }
    const Eigen::MatrixXd AtW2 = A.transpose() * w2.asDiagonal();
    const Eigen::MatrixXd S = AtW2 * A;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
    if (!(lu.rcond() > 1e-12) || lu.matrixLU().diagonal().cwiseAbs().minCoeff() == 0.0)
        throw StencilError("gfd weights: normal matrix conditioned worse than 1e12 at node " +
                               std::to_string(star.center),
                           star.center);
    const Eigen::MatrixXd B = lu.solve(AtW2);  // p x m

    std::vector<std::vector<double>> rows(p, std::vector<double>(m + 1));
    for (int r = 0; r < p; ++r) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) {
            rows[r][i + 1] = B(r, i);
            s += B(r, i);
        }
        rows[r][0] = -s;  // constants are annihilated exactly
    }
    return rows;
}

}  // namespace

GradientStencil gfd_gradient_weights(const Star& star, const WeightKernel& kernel) {
    const int m = static_cast<int>(star.neighbors.size());
    if (m < 2) throw std::invalid_argument("gfd_gradient_weights: star too small");
    Eigen::MatrixXd A(m, 2);
    for (int i = 0; i < m; ++i) {
        A(i, 0) = star.offsets[i][0];
        A(i, 1) = star.offsets[i][1];
    }
    auto rows = wls_rows(star, A, kernel);
    return {star, std::move(rows[0]), std::move(rows[1])};
}

FullGfdStencil gfd_full_weights(const Star& star, const WeightKernel& kernel) {
    const int m = static_cast<int>(star.neighbors.size());
    if (m < 5)
        throw std::invalid_argument("gfd_full_weights: needs at least 5 neighbors");
    Eigen::MatrixXd A(m, 5);
    for (int i = 0; i < m; ++i) {
        const double h = star.offsets[i][0], k = star.offsets[i][1];
        A(i, 0) = h;
        A(i, 1) = k;
        A(i, 2) = 0.5 * h * h;
        A(i, 3) = 0.5 * k * k;
        A(i, 4) = h * k;
    }
    auto rows = wls_rows(star, A, kernel);
    FullGfdStencil out;
    out.star = star;
    for (int r = 0; r < 5; ++r) out.w[r] = std::move(rows[r]);
    return out;
}

}  // namespace meshfree
