#include "meshfree/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "meshfree/errors.hpp"

namespace meshfree {

namespace {

// accumulate center-first stencil weights onto the union member layout
void scatter(const std::vector<int>& star_nodes, const std::vector<double>& w,
             const std::vector<int>& members, std::vector<double>& out) {
    for (size_t k = 0; k < star_nodes.size(); ++k) {
        const auto it = std::lower_bound(members.begin(), members.end(), star_nodes[k]);
        out[static_cast<size_t>(it - members.begin())] += w[k];
    }
}

std::vector<int> union_members(int center, const Star& a, const Star* b) {
    std::vector<int> mem;
    mem.push_back(center);
    mem.insert(mem.end(), a.neighbors.begin(), a.neighbors.end());
    if (b) mem.insert(mem.end(), b->neighbors.begin(), b->neighbors.end());
    std::sort(mem.begin(), mem.end());
    mem.erase(std::unique(mem.begin(), mem.end()), mem.end());
    return mem;
}

NodeStencil hybrid_stencil(const NodeSet& nodes, int c, const SolverConfig& cfg,
                           const OperatorSpec& op) {
    const Star star_g = select_star(nodes, c, cfg.n_gfd);
    const Star star_r = cfg.n_rbf == cfg.n_gfd ? star_g : select_star(nodes, c, cfg.n_rbf);
    const GradientStencil grad = gfd_gradient_weights(star_g);
    const RbfStencil rbf = rbf_operator_weights(star_r, op, cfg.epsilon, cfg.poly_degree);

    NodeStencil cell;
    cell.node = c;
    std::vector<int> sorted = union_members(c, star_g, &star_r);
    cell.members = sorted;  // sorted for scatter
    cell.wx.assign(sorted.size(), 0.0);
    cell.wy.assign(sorted.size(), 0.0);
    cell.wop.assign(sorted.size(), 0.0);

    std::vector<int> gn{c}, rn{c};
    gn.insert(gn.end(), star_g.neighbors.begin(), star_g.neighbors.end());
    rn.insert(rn.end(), star_r.neighbors.begin(), star_r.neighbors.end());
    scatter(gn, grad.wx, sorted, cell.wx);
    scatter(gn, grad.wy, sorted, cell.wy);
    scatter(rn, rbf.c, sorted, cell.wop);
    return cell;
}

NodeStencil gfd_stencil(const NodeSet& nodes, int c, const OperatorSpec& op) {
    const Star star = select_star(nodes, c, 9);  // five Taylor unknowns need the full ring
    const FullGfdStencil full = gfd_full_weights(star);

    NodeStencil cell;
    cell.node = c;
    std::vector<int> sorted = union_members(c, star, nullptr);
    cell.members = sorted;
    cell.wx.assign(sorted.size(), 0.0);
    cell.wy.assign(sorted.size(), 0.0);
    cell.wop.assign(sorted.size(), 0.0);

    std::vector<int> sn{c};
    sn.insert(sn.end(), star.neighbors.begin(), star.neighbors.end());
    scatter(sn, full.w[0], sorted, cell.wx);
    scatter(sn, full.w[1], sorted, cell.wy);
    std::vector<double> wop(sn.size());
    for (size_t k = 0; k < sn.size(); ++k)
        wop[k] = op.dxx * full.w[2][k] + op.dyy * full.w[3][k] + op.dxy * full.w[4][k];
    scatter(sn, wop, sorted, cell.wop);
    return cell;
}

NodeStencil cd2_stencil(const NodeSet& nodes, int c, const OperatorSpec& op) {
    if (op.dxy != 0.0)
        throw std::invalid_argument("cd2: mixed-derivative operators are not representable on "
                                    "the 5-point cross");
    const Star star = select_star(nodes, c, 5);  // quadrant order: E, N, W, S
    const auto& o = star.offsets;
    const double scale = std::max({std::abs(o[0][0]), std::abs(o[1][1]), std::abs(o[2][0]),
                                   std::abs(o[3][1])});
    const double tol = 1e-12 * std::max(scale, 1.0);
    const bool axis_aligned = std::abs(o[0][1]) <= tol && std::abs(o[1][0]) <= tol &&
                              std::abs(o[2][1]) <= tol && std::abs(o[3][0]) <= tol;
    const bool equispaced =
        std::abs(o[0][0] + o[2][0]) <= tol && std::abs(o[1][1] + o[3][1]) <= tol;
    if (!axis_aligned || !equispaced)
        throw std::invalid_argument("cd2: requires a uniform tensor grid (node " +
                                    std::to_string(c) + ")");
    const double hx = 0.5 * (o[0][0] - o[2][0]);
    const double hy = 0.5 * (o[1][1] - o[3][1]);

    NodeStencil cell;
    cell.node = c;
    const int E = star.neighbors[0], N = star.neighbors[1], W = star.neighbors[2],
              S = star.neighbors[3];
    std::vector<int> sn{c, E, N, W, S};
    std::vector<double> wx{0.0, 0.5 / hx, 0.0, -0.5 / hx, 0.0};
    std::vector<double> wy{0.0, 0.0, 0.5 / hy, 0.0, -0.5 / hy};
    const double ax = op.dxx / (hx * hx), ay = op.dyy / (hy * hy);
    std::vector<double> wop{-2.0 * (ax + ay), ax, ay, ax, ay};

    std::vector<int> sorted = sn;
    std::sort(sorted.begin(), sorted.end());
    cell.members = sorted;
    cell.wx.assign(5, 0.0);
    cell.wy.assign(5, 0.0);
    cell.wop.assign(5, 0.0);
    scatter(sn, wx, sorted, cell.wx);
    scatter(sn, wy, sorted, cell.wy);
    scatter(sn, wop, sorted, cell.wop);
    return cell;
}

}  // namespace

Discretization::Discretization(const NodeSet& nodes, const SolverConfig& config,
                               const OperatorSpec& op)
    : nodes_(&nodes) {
    unknown_of_node_.assign(nodes.size(), -1);
    for (int c : nodes.interior_indices()) {
        unknown_of_node_[c] = static_cast<int>(node_of_unknown_.size());
        node_of_unknown_.push_back(c);
        switch (config.method) {
            case Method::Hybrid: cells_.push_back(hybrid_stencil(nodes, c, config, op)); break;
            case Method::Gfd: cells_.push_back(gfd_stencil(nodes, c, op)); break;
            case Method::Cd2: cells_.push_back(cd2_stencil(nodes, c, op)); break;
        }
    }
}

std::array<double, 2> Discretization::gradient_at(int interior_ordinal,
                                                  const std::vector<double>& field) const {
    const NodeStencil& cell = cells_[interior_ordinal];
    double gx = 0.0, gy = 0.0;
    for (size_t k = 0; k < cell.members.size(); ++k) {
        gx += cell.wx[k] * field[cell.members[k]];
        gy += cell.wy[k] * field[cell.members[k]];
    }
    return {gx, gy};
}

LinearSystem Discretization::assemble(const ProblemSpec& problem,
                                      const FrozenFields& frozen) const {
    if (!problem.dirichlet) throw std::invalid_argument("assemble: missing Dirichlet data");
    const NodeSet& ns = *nodes_;
    const int n_int = static_cast<int>(cells_.size());

    LinearSystem sys;
    sys.unknown_of_node = unknown_of_node_;
    sys.node_of_unknown = node_of_unknown_;
    sys.rhs.assign(n_int, 0.0);

    std::vector<std::tuple<int, int, double>> trips;
    trips.reserve(static_cast<size_t>(n_int) * 9);

    for (int row = 0; row < n_int; ++row) {
        const NodeStencil& cell = cells_[row];
        const Node& nd = ns[cell.node];

        FieldState st;
        if (frozen.u) {
            st.u = (*frozen.u)[cell.node];
            for (size_t k = 0; k < cell.members.size(); ++k) {
                st.ux += cell.wx[k] * (*frozen.u)[cell.members[k]];
                st.uy += cell.wy[k] * (*frozen.u)[cell.members[k]];
            }
        }
        if (frozen.v) {
            st.v = (*frozen.v)[cell.node];
            for (size_t k = 0; k < cell.members.size(); ++k) {
                st.vx += cell.wx[k] * (*frozen.v)[cell.members[k]];
                st.vy += cell.wy[k] * (*frozen.v)[cell.members[k]];
            }
        }

        const double bx = problem.convection_x ? problem.convection_x(nd.x, nd.y, st) : 0.0;
        const double by = problem.convection_y ? problem.convection_y(nd.x, nd.y, st) : 0.0;
        const double a = problem.diffusion_scale ? problem.diffusion_scale(nd.x, nd.y, st) : 1.0;
        const double r = problem.reaction ? problem.reaction(nd.x, nd.y, st) : 0.0;
        const double f = problem.source ? problem.source(nd.x, nd.y, st) : 0.0;

        sys.rhs[row] += f;
        for (size_t k = 0; k < cell.members.size(); ++k) {
            const int m = cell.members[k];
            double w = bx * cell.wx[k] + by * cell.wy[k] + a * cell.wop[k];
            if (m == cell.node) w += r;
            if (w == 0.0) continue;
            if (ns[m].kind == NodeKind::Boundary) {
                sys.rhs[row] -= w * problem.dirichlet(ns[m].x, ns[m].y);
            } else {
                trips.emplace_back(row, unknown_of_node_[m], w);
            }
        }
    }
    sys.matrix = SparseMatrix::from_triplets(n_int, trips);
    return sys;
}

LinearSystem discretize(const ProblemSpec& problem, const NodeSet& nodes,
                        const SolverConfig& config, const FrozenFields& frozen) {
    return Discretization(nodes, config, problem.diffusion).assemble(problem, frozen);
}

SolutionField initial_state(const NodeSet& nodes, const BoundaryValue& g, double fill) {
    SolutionField s;
    s.values.assign(nodes.size(), fill);
    for (int b : nodes.boundary_indices()) s.values[b] = g(nodes[b].x, nodes[b].y);
    return s;
}

namespace {

double interior_rms_change(const NodeSet& nodes, const std::vector<double>& a,
                           const std::vector<double>& b) {
    double s = 0.0;
    int n = 0;
    for (int i : nodes.interior_indices()) {
        const double d = a[i] - b[i];
        s += d * d;
        ++n;
    }
    return n ? std::sqrt(s / n) : 0.0;
}

// One assemble + linear solve against a frozen state, warm-started from it.
SolutionField linear_step(const Discretization& disc, const ProblemSpec& problem,
                          const FrozenFields& frozen, const std::vector<double>& warm,
                          const SolverParams& params) {
    const NodeSet& ns = disc.nodes();
    LinearSystem sys = disc.assemble(problem, frozen);

    std::vector<double> x0(sys.node_of_unknown.size());
    for (size_t i = 0; i < x0.size(); ++i) x0[i] = warm[sys.node_of_unknown[i]];

    BicgstabParams bp;
    bp.rel_tol = params.rel_tol;
    bp.max_iter = params.max_iter;
    bp.diagonal_precond = params.diagonal_precond;
    BicgstabResult r = bicgstab(sys.matrix, sys.rhs, x0, bp);

    SolutionField out = initial_state(ns, problem.dirichlet);
    for (size_t i = 0; i < r.x.size(); ++i) out.values[sys.node_of_unknown[i]] = r.x[i];
    out.residual_norm = r.residual_history.empty() ? 0.0 : r.residual_history.back();
    out.linear_iterations = r.iterations;
    out.outer_iterations = 1;
    return out;
}

// The lagged diffusion scale can vanish identically at startup (e.g. a zero
// initial field multiplying the Laplacian), which would zero out whole rows.
// Bootstrap such states with the boundary mean before the first assembly.
void bootstrap_degenerate_state(const NodeSet& nodes, const ProblemSpec& problem,
                                std::vector<double>& state) {
    if (!problem.state_dependent || !problem.diffusion_scale) return;
    double amax = 0.0;
    FieldState st;
    for (int i : nodes.interior_indices()) {
        st.u = state[i];
        amax = std::max(amax, std::abs(problem.diffusion_scale(nodes[i].x, nodes[i].y, st)));
    }
    if (amax > 0.0) return;
    double gsum = 0.0;
    int gn = 0;
    for (int b : nodes.boundary_indices()) {
        gsum += problem.dirichlet(nodes[b].x, nodes[b].y);
        ++gn;
    }
    const double fill = gn ? gsum / gn : 0.0;
    for (int i : nodes.interior_indices()) state[i] = fill;
}

}  // namespace

SolutionField solve_linear(const ProblemSpec& problem, const NodeSet& nodes,
                           const SolverConfig& config, const SolverParams& params) {
    Discretization disc(nodes, config, problem.diffusion);
    const std::vector<double> zero(nodes.size(), 0.0);
    return linear_step(disc, problem, FrozenFields{}, zero, params);
}

SolutionField solve_picard(const ProblemSpec& problem, const NodeSet& nodes,
                           const SolverConfig& config, const PicardParams& picard,
                           const SolutionField& initial) {
    if (static_cast<int>(initial.values.size()) != nodes.size())
        throw std::invalid_argument("solve_picard: initial state size mismatch");
    Discretization disc(nodes, config, problem.diffusion);

    std::vector<double> state = initial.values;
    bootstrap_degenerate_state(nodes, problem, state);

    std::vector<double> change_history;
    int linear_total = 0;
    for (int it = 0; it < picard.max_iter; ++it) {
        FrozenFields frozen;
        frozen.u = &state;
        SolutionField next = linear_step(disc, problem, frozen, state, picard.linear);
        linear_total += next.linear_iterations;

        const double change = interior_rms_change(nodes, next.values, state);
        change_history.push_back(change);

        const double w = picard.relaxation;
        for (int i : nodes.interior_indices())
            state[i] = (1.0 - w) * state[i] + w * next.values[i];
        for (int b : nodes.boundary_indices()) state[b] = next.values[b];

        if (change <= picard.tol) {
            SolutionField out;
            out.values = std::move(state);
            out.residual_norm = next.residual_norm;
            out.linear_iterations = linear_total;
            out.outer_iterations = it + 1;
            return out;
        }
    }
    throw SolveError("solve_picard: no convergence in " + std::to_string(picard.max_iter) +
                         " iterations",
                     change_history);
}

std::pair<SolutionField, SolutionField> solve_coupled(
    const ProblemSpec& problem_u, const ProblemSpec& problem_v, const NodeSet& nodes,
    const SolverConfig& config, const PicardParams& picard, const SolutionField& initial_u,
    const SolutionField& initial_v) {
    if (static_cast<int>(initial_u.values.size()) != nodes.size() ||
        static_cast<int>(initial_v.values.size()) != nodes.size())
        throw std::invalid_argument("solve_coupled: initial state size mismatch");
    Discretization disc_u(nodes, config, problem_u.diffusion);
    Discretization disc_v(nodes, config, problem_v.diffusion);

    std::vector<double> u = initial_u.values, v = initial_v.values;
    std::vector<double> change_history;
    int linear_total = 0;
    for (int it = 0; it < picard.max_iter; ++it) {
        FrozenFields fu{&u, &v};
        SolutionField nu = linear_step(disc_u, problem_u, fu, u, picard.linear);
        const double du = interior_rms_change(nodes, nu.values, u);
        const double w = picard.relaxation;
        for (int i : nodes.interior_indices()) u[i] = (1.0 - w) * u[i] + w * nu.values[i];
        for (int b : nodes.boundary_indices()) u[b] = nu.values[b];

        FrozenFields fv{&u, &v};  // Gauss-Seidel: v sees the updated u
        SolutionField nv = linear_step(disc_v, problem_v, fv, v, picard.linear);
        const double dv = interior_rms_change(nodes, nv.values, v);
        for (int i : nodes.interior_indices()) v[i] = (1.0 - w) * v[i] + w * nv.values[i];
        for (int b : nodes.boundary_indices()) v[b] = nv.values[b];

        linear_total += nu.linear_iterations + nv.linear_iterations;
        const double change = std::max(du, dv);
        change_history.push_back(change);

        if (change <= picard.tol) {
            SolutionField su, sv;
            su.values = std::move(u);
            sv.values = std::move(v);
            su.residual_norm = nu.residual_norm;
            sv.residual_norm = nv.residual_norm;
            su.linear_iterations = sv.linear_iterations = linear_total;
            su.outer_iterations = sv.outer_iterations = it + 1;
            return {std::move(su), std::move(sv)};
        }
    }
    throw SolveError("solve_coupled: no convergence in " + std::to_string(picard.max_iter) +
                         " iterations",
                     change_history);
}

}  // namespace meshfree
