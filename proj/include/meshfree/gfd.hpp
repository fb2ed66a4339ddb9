#pragma once

#include <functional>
#include <vector>

#include "meshfree/nodes.hpp"

namespace meshfree {

/// MLS weight kernel w(d) = 1/d^2.  Throws std::invalid_argument for d <= 0.
double mls_weight(double distance);

using WeightKernel = std::function<double(double)>;

/// First-derivative weights at a star center.  Entry 0 is the center,
/// entries 1.. follow the star's neighbor order.  Each row sums to zero.
struct GradientStencil {
    Star star;
    std::vector<double> wx;  // d/dx weights, 1/length
    std::vector<double> wy;  // d/dy weights, 1/length
};

/// Weights for all derivatives up to second order (the pure-GFD baseline).
/// Row order: d/dx, d/dy, d2/dx2, d2/dy2, d2/dxdy.
struct FullGfdStencil {
    Star star;
    std::array<std::vector<double>, 5> w;
};

/// Weighted moving-least-squares fit of the first-order Taylor expansion:
/// builds the (N-1)x2 offset matrix A, solves the 2x2 normal system
/// S = A'W^2 A for B = S^-1 A'W^2 and folds the rows into center-first
/// weight vectors (center weight = -sum of neighbor weights).
/// Throws StencilError when S is conditioned worse than 1e12.
GradientStencil gfd_gradient_weights(const Star& star, const WeightKernel& kernel = {});

/// Second-order Taylor fit with columns (h, k, h^2/2, k^2/2, hk); needs at
/// least 5 neighbors.  Same weighting and conditioning guard as above.
FullGfdStencil gfd_full_weights(const Star& star, const WeightKernel& kernel = {});

}  // namespace meshfree
