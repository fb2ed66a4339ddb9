// Benchmark CLI: `solve` runs one configuration and dumps the solution,
// `study` runs a refinement sequence and emits the convergence report.
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "meshfree/bench.hpp"
#include "meshfree/errors.hpp"

using namespace meshfree;

namespace {

struct CommonOpts {
    int example = 1;
    std::string method = "hybrid";
    std::string dist = "uniform";
    int ng = 5;
    int nr = 5;
    double epsilon = 0.0;  // 0: per-example table default
    int poly_degree = 1;
    double tol = 1e-12;          // linear solver relative tolerance
    double picard_tol = 1e-10;   // outer iterate-change tolerance
    int picard_max_iter = 100;
    std::string out;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--example", o.example, "Benchmark problem id")
        ->check(CLI::IsMember({1, 2, 3}))
        ->required();
    cmd->add_option("--method", o.method, "hybrid | gfd | cd2")
        ->check(CLI::IsMember({"hybrid", "gfd", "cd2"}));
    cmd->add_option("--dist", o.dist, "uniform | chebyshev")
        ->check(CLI::IsMember({"uniform", "chebyshev"}));
    cmd->add_option("--ng", o.ng, "GFD star size")->check(CLI::IsMember({5, 9}));
    cmd->add_option("--nr", o.nr, "RBF star size")->check(CLI::IsMember({5, 9}));
    cmd->add_option("--epsilon", o.epsilon, "Multiquadric shape parameter (0 = table default)");
    cmd->add_option("--poly-degree", o.poly_degree, "RBF polynomial augmentation degree")
        ->check(CLI::IsMember({0, 1, 2}));
    cmd->add_option("--tol", o.tol, "Bi-CGSTAB relative tolerance");
    cmd->add_option("--picard-tol", o.picard_tol, "Picard iterate-change tolerance");
    cmd->add_option("--picard-max-iter", o.picard_max_iter, "Picard iteration cap");
    cmd->add_option("--out", o.out, "Output path (stdout when omitted)");
    cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
}

SolverConfig make_config(const CommonOpts& o) {
    SolverConfig cfg;
    cfg.method = method_from_string(o.method);
    cfg.n_gfd = o.ng;
    cfg.n_rbf = o.nr;
    cfg.epsilon = o.epsilon;
    cfg.poly_degree = o.poly_degree;
    return cfg;
}

PicardParams make_picard(const CommonOpts& o) {
    PicardParams p;
    p.tol = o.picard_tol;
    p.max_iter = o.picard_max_iter;
    p.linear.rel_tol = o.tol;
    return p;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::invalid_argument("cannot open " + path + " for writing");
    return file;
}

void dump_stencils(const Discretization& disc, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::invalid_argument("cannot open " + path + " for writing");
    f << "center,member,wx,wy,wop\n";
    char buf[160];
    for (const NodeStencil& cell : disc.stencils())
        for (size_t k = 0; k < cell.members.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g\n", cell.node,
                          cell.members[k], cell.wx[k], cell.wy[k], cell.wop[k]);
            f << buf;
        }
}

int run_solve(const CommonOpts& o, int nodes_per_axis, const std::string& dump_system,
              const std::string& dump_stencils_path) {
    const BenchmarkCase bench = benchmark_case(o.example);
    const Distribution dist = distribution_from_string(o.dist);
    SolverConfig cfg = make_config(o);
    if (!(cfg.epsilon > 0.0)) cfg.epsilon = bench.default_epsilon(dist);
    if (cfg.method == Method::Cd2 && dist == Distribution::Chebyshev)
        throw std::invalid_argument("cd2 is defined on uniform grids only");
    const PicardParams picard = make_picard(o);

    const NodeSet nodes = dist == Distribution::Uniform
                              ? generate_uniform(nodes_per_axis, nodes_per_axis, bench.domain)
                              : generate_chebyshev(nodes_per_axis, nodes_per_axis, bench.domain);

    const ProblemSpec pu = bench.problem_u();
    SolutionField u, v;
    if (bench.coupled) {
        const ProblemSpec pv = bench.problem_v();
        auto r = solve_coupled(pu, pv, nodes, cfg, picard, initial_state(nodes, pu.dirichlet),
                               initial_state(nodes, pv.dirichlet));
        u = std::move(r.first);
        v = std::move(r.second);
    } else if (pu.state_dependent) {
        u = solve_picard(pu, nodes, cfg, picard, initial_state(nodes, pu.dirichlet));
    } else {
        u = solve_linear(pu, nodes, cfg, picard.linear);
    }

    if (!dump_system.empty() || !dump_stencils_path.empty()) {
        Discretization disc(nodes, cfg, pu.diffusion);
        if (!dump_system.empty()) {
            FrozenFields frozen;
            if (pu.state_dependent) frozen.u = &u.values;
            if (bench.coupled) frozen.v = &v.values;
            LinearSystem sys = disc.assemble(pu, frozen);
            write_matrix_market_file(sys.matrix, dump_system);
            std::ofstream rf(dump_system + ".rhs");
            write_vector_market(sys.rhs, rf);
        }
        if (!dump_stencils_path.empty()) dump_stencils(disc, dump_stencils_path);
    }

    std::ofstream file;
    std::ostream& out = open_out(o.out, file);
    write_solution_csv(nodes, u, bench.coupled ? &v : nullptr, bench, out);

    auto ex_u = [&](double x, double y) { return bench.exact_u(x, y); };
    std::cerr << "nodes=" << nodes.size() << " h=" << nodal_spacing(nodes)
              << " rms=" << rms_error(u, nodes, ex_u)
              << " norm_rms=" << range_normalized_rms(u, nodes, ex_u)
              << " picard=" << u.outer_iterations << " bicgstab=" << u.linear_iterations << "\n";
    return 0;
}

int run_study_cmd(const CommonOpts& o, const std::string& refine, bool condition_numbers) {
    std::vector<int> refinements;
    std::stringstream ss(refine);
    std::string tok;
    while (std::getline(ss, tok, ',')) refinements.push_back(std::stoi(tok));

    StudyOptions opts;
    opts.condition_numbers = condition_numbers;
    opts.picard = make_picard(o);
    ConvergenceReport report =
        run_study(o.example, method_from_string(o.method), distribution_from_string(o.dist),
                  refinements, make_config(o), opts);

    std::ofstream file;
    std::ostream& out = open_out(o.out, file);
    if (o.format == "json")
        write_report_json(report, out);
    else
        write_report_csv(report, out);

    for (const StudyRow& row : report.rows)
        if (row.failed) return 2;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meshless convection-diffusion benchmark solver"};
    app.require_subcommand(1);

    CommonOpts so;
    int nodes_per_axis = 11;
    std::string dump_system, dump_stencils_path;
    CLI::App* solve = app.add_subcommand("solve", "Solve one configuration");
    add_common(solve, so);
    solve->add_option("--nodes", nodes_per_axis, "Nodes per axis (11 -> 121 total)")
        ->check(CLI::PositiveNumber);
    solve->add_option("--dump-system", dump_system, "Write the stiffness matrix (Matrix Market)");
    solve->add_option("--dump-stencils", dump_stencils_path, "Write per-node stencil weights CSV");

    CommonOpts to;
    std::string refine = "11,21,41";
    bool condition_numbers = false;
    CLI::App* study = app.add_subcommand("study", "Run a refinement study");
    add_common(study, to);
    study->add_option("--refine", refine, "Comma-separated nodes-per-axis list");
    study->add_flag("--condition-numbers", condition_numbers,
                    "Compute stiffness-matrix condition numbers (dense SVD)");

    try {
        app.parse(argc, argv);
        if (solve->parsed()) return run_solve(so, nodes_per_axis, dump_system, dump_stencils_path);
        return run_study_cmd(to, refine, condition_numbers);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const SolveError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
