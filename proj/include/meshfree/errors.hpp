#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace meshfree {

/// Star construction or stencil conditioning failure at a specific node.
class StencilError : public std::runtime_error {
public:
    StencilError(std::string msg, int node, int quadrant = -1)
        : std::runtime_error(std::move(msg)), node(node), quadrant(quadrant) {}

    int node;      // offending center node index
    int quadrant;  // offending quadrant [0,3], or -1 if not quadrant-related
};

/// Iterative solver failed to converge.  Carries the residual (or iterate-change)
/// history so callers can inspect the stagnation pattern.
class SolveError : public std::runtime_error {
public:
    SolveError(std::string msg, std::vector<double> history = {})
        : std::runtime_error(std::move(msg)), history(std::move(history)) {}

    std::vector<double> history;
};

class SingularMatrixError : public std::runtime_error {
public:
    explicit SingularMatrixError(std::string msg) : std::runtime_error(std::move(msg)) {}
};

}  // namespace meshfree
