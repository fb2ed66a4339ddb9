#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "meshfree/gfd.hpp"
#include "meshfree/linalg.hpp"
#include "meshfree/nodes.hpp"
#include "meshfree/rbf.hpp"

namespace meshfree {

/// Frozen linearization data at one node: value and discrete gradient of the
/// primary field, plus the second field for coupled problems.
struct FieldState {
    double u = 0.0, ux = 0.0, uy = 0.0;
    double v = 0.0, vx = 0.0, vy = 0.0;
};

using Coefficient = std::function<double(double x, double y, const FieldState&)>;
using BoundaryValue = std::function<double(double x, double y)>;

/// Convection-diffusion problem
///   bx u_x + by u_y + a * (L u) + r u = f   in the interior,
///   u = g                                    on the boundary,
/// where L is the second-order operator `diffusion`.  Coefficients that
/// depend on the solution read the frozen FieldState; `state_dependent`
/// marks such problems so the Picard driver knows to iterate.
struct ProblemSpec {
    Coefficient convection_x;      // bx; null = 0
    Coefficient convection_y;      // by; null = 0
    OperatorSpec diffusion;
    Coefficient diffusion_scale;   // a; null = 1
    Coefficient reaction;          // r; null = 0
    Coefficient source;            // f; null = 0
    BoundaryValue dirichlet;       // g; required
    bool state_dependent = false;
};

enum class Method { Hybrid, Gfd, Cd2 };

struct SolverConfig {
    Method method = Method::Hybrid;
    int n_gfd = 5;
    int n_rbf = 5;
    double epsilon = 0.5;
    int poly_degree = 1;
};

struct SolverParams {
    double rel_tol = 1e-12;
    int max_iter = 0;  // 0: 10 * n_int
    bool diagonal_precond = false;
};

struct PicardParams {
    double tol = 1e-10;       // RMS of iterate change over interior nodes
    int max_iter = 100;
    double relaxation = 1.0;
    SolverParams linear;
};

struct LinearSystem {
    SparseMatrix matrix;               // n_int x n_int
    std::vector<double> rhs;
    std::vector<int> unknown_of_node;  // node index -> unknown index, -1 for boundary
    std::vector<int> node_of_unknown;  // unknown index -> node index
};

struct SolutionField {
    std::vector<double> values;   // per node; boundary entries equal g
    double residual_norm = 0.0;   // final linear residual (2-norm, relative)
    int linear_iterations = 0;    // accumulated Bi-CGSTAB iterations
    int outer_iterations = 0;     // Picard solves performed (1 for linear)
};

/// Frozen fields for coefficient evaluation; null pointers read as zero.
struct FrozenFields {
    const std::vector<double>* u = nullptr;
    const std::vector<double>* v = nullptr;
};

/// Per-node union stencil in the common form used by every method: members
/// in ascending node index with gradient weights and second-order operator
/// weights aligned to them.
struct NodeStencil {
    int node = -1;
    std::vector<int> members;
    std::vector<double> wx, wy, wop;
};

/// Precomputed stars + stencils for (nodes, method, config, operator); the
/// expensive part of discretization, reusable across Picard iterations.
class Discretization {
public:
    Discretization(const NodeSet& nodes, const SolverConfig& config, const OperatorSpec& op);

    LinearSystem assemble(const ProblemSpec& problem, const FrozenFields& frozen = {}) const;

    const std::vector<NodeStencil>& stencils() const { return cells_; }
    const NodeSet& nodes() const { return *nodes_; }

    /// Discrete gradient of a nodal field at an interior node, using the
    /// node's own gradient weights.
    std::array<double, 2> gradient_at(int interior_ordinal, const std::vector<double>& field) const;

private:
    const NodeSet* nodes_;
    std::vector<NodeStencil> cells_;           // one per interior node, ascending
    std::vector<int> unknown_of_node_, node_of_unknown_;

    friend LinearSystem discretize(const ProblemSpec&, const NodeSet&, const SolverConfig&,
                                   const FrozenFields&);
};

/// One-shot discretization (builds stencils and assembles).
LinearSystem discretize(const ProblemSpec& problem, const NodeSet& nodes,
                        const SolverConfig& config, const FrozenFields& frozen = {});

/// Assembles and solves a linear (state-independent) problem with Bi-CGSTAB.
SolutionField solve_linear(const ProblemSpec& problem, const NodeSet& nodes,
                           const SolverConfig& config, const SolverParams& params = {});

/// Lagged-coefficient Picard iteration: freeze coefficients at the current
/// state, assemble, solve, under-relax, repeat until the RMS iterate change
/// drops below tol.  When the initial interior state is identically zero and
/// the frozen diffusion scale vanishes everywhere (which would make the
/// first linearized operator singular), the frozen interior is bootstrapped
/// with the mean of the boundary data for the first iteration.
SolutionField solve_picard(const ProblemSpec& problem, const NodeSet& nodes,
                           const SolverConfig& config, const PicardParams& picard,
                           const SolutionField& initial);

/// Block Gauss-Seidel Picard for two-field problems: solve the u equation
/// with (u,v) frozen, update u, solve the v equation, repeat to joint
/// tolerance.
std::pair<SolutionField, SolutionField> solve_coupled(const ProblemSpec& problem_u,
                                                      const ProblemSpec& problem_v,
                                                      const NodeSet& nodes,
                                                      const SolverConfig& config,
                                                      const PicardParams& picard,
                                                      const SolutionField& initial_u,
                                                      const SolutionField& initial_v);

/// Boundary-respecting initial state: g on the boundary, fill elsewhere.
SolutionField initial_state(const NodeSet& nodes, const BoundaryValue& g, double fill = 0.0);

}  // namespace meshfree
