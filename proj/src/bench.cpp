#include "meshfree/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "meshfree/errors.hpp"

namespace meshfree {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double BenchmarkCase::exact_u(double x, double y) const {
    switch (id) {
        case 1: return (std::exp(2.0 * (1.0 - x)) + std::exp(2.0 * y) - 2.0) / (M_E - 1.0);
        case 2: return 1.0 / std::sqrt((x + 1.0) * (x + 1.0) + (y + 1.0) * (y + 1.0));
        default: return -std::cos(x) * std::sin(y);
    }
}

double BenchmarkCase::exact_v(double x, double y) const {
    if (id != 3) throw std::invalid_argument("exact_v: only case 3 has a second field");
    return std::sin(x) * std::cos(y);
}

double BenchmarkCase::source_u(double x, double y) const {
    switch (id) {
        case 1: return 0.0;  // convection and diffusion of the exact field cancel identically
        case 2: return 0.0;  // the 2u^4 right-hand side is carried as a reaction term
        default: return -std::sin(x) * std::cos(x) - 2.0 * std::cos(x) * std::sin(y);
    }
}

double BenchmarkCase::source_v(double x, double y) const {
    if (id != 3) throw std::invalid_argument("source_v: only case 3 has a second field");
    return -std::sin(y) * std::cos(y) + 2.0 * std::sin(x) * std::cos(y);
}

ProblemSpec BenchmarkCase::problem_u() const {
    ProblemSpec p;
    const BenchmarkCase self = *this;
    p.dirichlet = [self](double x, double y) { return self.exact_u(x, y); };
    switch (id) {
        case 1:
            p.convection_x = [](double, double, const FieldState&) { return -2.0; };
            p.convection_y = [](double, double, const FieldState&) { return 2.0; };
            p.diffusion = {-1.0, -1.0, 0.0};
            break;
        case 2:
            // (u_x)^2 + (u_y)^2 + u (u_xx + u_yy) = 2u^4, every factor but one lagged
            p.convection_x = [](double, double, const FieldState& s) { return s.ux; };
            p.convection_y = [](double, double, const FieldState& s) { return s.uy; };
            p.diffusion = {1.0, 1.0, 0.0};
            p.diffusion_scale = [](double, double, const FieldState& s) { return s.u; };
            p.reaction = [](double, double, const FieldState& s) { return -2.0 * s.u * s.u * s.u; };
            p.state_dependent = true;
            break;
        default:
            p.convection_x = [](double, double, const FieldState& s) { return s.u; };
            p.convection_y = [](double, double, const FieldState& s) { return s.v; };
            p.diffusion = {-1.0, -1.0, 0.0};
            p.source = [self](double x, double y, const FieldState&) { return self.source_u(x, y); };
            p.state_dependent = true;
            break;
    }
    return p;
}

ProblemSpec BenchmarkCase::problem_v() const {
    if (id != 3) throw std::invalid_argument("problem_v: only case 3 is coupled");
    ProblemSpec p;
    const BenchmarkCase self = *this;
    p.dirichlet = [self](double x, double y) { return self.exact_v(x, y); };
    p.convection_x = [](double, double, const FieldState& s) { return s.u; };
    p.convection_y = [](double, double, const FieldState& s) { return s.v; };
    p.diffusion = {-1.0, -1.0, 0.0};
    p.source = [self](double x, double y, const FieldState&) { return self.source_v(x, y); };
    p.state_dependent = true;
    return p;
}

BenchmarkCase benchmark_case(int id) {
    BenchmarkCase b;
    b.id = id;
    switch (id) {
        case 1:
            b.domain = {0.0, 1.0, 0.0, 1.0};
            b.diffusion = {-1.0, -1.0, 0.0};
            b.epsilon_uniform = 0.5;
            b.epsilon_chebyshev = 0.9;
            break;
        case 2:
            b.domain = {0.0, 1.0, 0.0, 1.0};
            b.diffusion = {1.0, 1.0, 0.0};
            b.epsilon_uniform = 0.6;
            b.epsilon_chebyshev = 0.5;
            break;
        case 3:
            b.domain = {0.0, M_PI, 0.0, M_PI};
            b.diffusion = {-1.0, -1.0, 0.0};
            b.epsilon_uniform = 0.3;
            b.epsilon_chebyshev = 0.3;
            b.coupled = true;
            break;
        default: throw std::invalid_argument("benchmark_case: id must be 1, 2 or 3");
    }
    return b;
}

ExactValue example_exact(int id, double x, double y) {
    const BenchmarkCase b = benchmark_case(id);
    ExactValue v;
    v.u = b.exact_u(x, y);
    if (b.coupled) v.v = b.exact_v(x, y);
    return v;
}

ExactValue example_source(int id, double x, double y) {
    const BenchmarkCase b = benchmark_case(id);
    ExactValue v;
    v.u = b.source_u(x, y);
    if (b.coupled) v.v = b.source_v(x, y);
    return v;
}

double rms_error(const SolutionField& field, const NodeSet& nodes,
                 const std::function<double(double, double)>& exact) {
    if (field.values.empty() || static_cast<int>(field.values.size()) != nodes.size())
        throw std::invalid_argument("rms_error: field/node size mismatch");
    double s = 0.0;
    int n = 0;
    for (int i : nodes.interior_indices()) {
        const double e = field.values[i] - exact(nodes[i].x, nodes[i].y);
        s += e * e;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("rms_error: no interior nodes");
    return std::sqrt(s / n);
}

double range_normalized_rms(const SolutionField& field, const NodeSet& nodes,
                            const std::function<double(double, double)>& exact) {
    if (field.values.empty() || static_cast<int>(field.values.size()) != nodes.size())
        throw std::invalid_argument("range_normalized_rms: field/node size mismatch");
    double s = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Node& nd : nodes.nodes()) {
        const double ex = exact(nd.x, nd.y);
        const double e = field.values[nd.index] - ex;
        s += e * e;
        lo = std::min(lo, ex);
        hi = std::max(hi, ex);
    }
    const double range = hi - lo;
    if (!(range > 0.0)) throw std::invalid_argument("range_normalized_rms: constant exact field");
    return std::sqrt(s / nodes.size()) / range;
}

double convergence_order(double e_old, double e_new, double h_old, double h_new) {
    if (!(e_old > 0.0) || !(e_new > 0.0) || !(h_old > 0.0) || !(h_new > 0.0))
        throw std::invalid_argument("convergence_order: inputs must be positive");
    if (!(h_old > h_new)) throw std::invalid_argument("convergence_order: h must decrease");
    if (!(e_old > e_new)) throw std::invalid_argument("convergence_order: error must decrease");
    return std::log(e_old / e_new) / std::log(h_old / h_new);
}

namespace {

struct RunResult {
    SolutionField u;
    SolutionField v;  // case 3 only
    LinearSystem final_system;
};

SolverConfig resolved_config(const BenchmarkCase& bench, Method method, Distribution dist,
                             const SolverConfig& config) {
    SolverConfig cfg = config;
    cfg.method = method;
    if (!(cfg.epsilon > 0.0)) cfg.epsilon = bench.default_epsilon(dist);
    return cfg;
}

RunResult run_single(const BenchmarkCase& bench, const NodeSet& nodes, const SolverConfig& cfg,
                     const PicardParams& picard, bool want_system) {
    RunResult out;
    const ProblemSpec pu = bench.problem_u();
    if (bench.coupled) {
        const ProblemSpec pv = bench.problem_v();
        auto init_u = initial_state(nodes, pu.dirichlet);
        auto init_v = initial_state(nodes, pv.dirichlet);
        auto [su, sv] = solve_coupled(pu, pv, nodes, cfg, picard, init_u, init_v);
        out.u = std::move(su);
        out.v = std::move(sv);
        if (want_system) {
            Discretization disc(nodes, cfg, pu.diffusion);
            out.final_system = disc.assemble(pu, {&out.u.values, &out.v.values});
        }
    } else if (pu.state_dependent) {
        out.u = solve_picard(pu, nodes, cfg, picard, initial_state(nodes, pu.dirichlet));
        if (want_system) {
            Discretization disc(nodes, cfg, pu.diffusion);
            out.final_system = disc.assemble(pu, {&out.u.values, nullptr});
        }
    } else {
        out.u = solve_linear(pu, nodes, cfg, picard.linear);
        if (want_system) out.final_system = discretize(pu, nodes, cfg);
    }
    return out;
}

std::string sanitized(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '"') c = ';';
    return s;
}

}  // namespace

SolutionField cd2_solve(const BenchmarkCase& bench, int nx, int ny, const PicardParams& picard) {
    const NodeSet nodes = generate_uniform(nx, ny, bench.domain);
    SolverConfig cfg;
    cfg.method = Method::Cd2;
    return run_single(bench, nodes, cfg, picard, false).u;
}

SolutionField gfd_solve(const BenchmarkCase& bench, const NodeSet& nodes, int n_gfd,
                        const PicardParams& picard) {
    SolverConfig cfg;
    cfg.method = Method::Gfd;
    cfg.n_gfd = n_gfd;
    return run_single(bench, nodes, cfg, picard, false).u;
}

ConvergenceReport run_study(int example, Method method, Distribution distribution,
                            const std::vector<int>& nodes_per_axis, const SolverConfig& config,
                            const StudyOptions& options) {
    if (method == Method::Cd2 && distribution == Distribution::Chebyshev)
        throw std::invalid_argument("run_study: CD2 is defined on uniform grids only");
    if (nodes_per_axis.empty()) throw std::invalid_argument("run_study: empty refinement list");
    const BenchmarkCase bench = benchmark_case(example);
    const SolverConfig cfg = resolved_config(bench, method, distribution, config);

    ConvergenceReport report;
    report.example = example;
    report.method = to_string(method);
    report.distribution = to_string(distribution);
    report.config = cfg;

    const StudyRow* prev = nullptr;
    for (int npa : nodes_per_axis) {
        StudyRow row;
        row.order_u = row.order_v = row.condition_number = kNaN;
        row.rms_v = row.norm_rms_v = kNaN;
        const NodeSet nodes = distribution == Distribution::Uniform
                                  ? generate_uniform(npa, npa, bench.domain)
                                  : generate_chebyshev(npa, npa, bench.domain);
        row.node_count = nodes.size();
        row.h = nodal_spacing(nodes);
        try {
            const auto t0 = std::chrono::steady_clock::now();
            RunResult r = run_single(bench, nodes, cfg, options.picard, options.condition_numbers);
            const auto t1 = std::chrono::steady_clock::now();
            row.wall_time_s = std::chrono::duration<double>(t1 - t0).count();

            auto ex_u = [&](double x, double y) { return bench.exact_u(x, y); };
            row.rms_u = rms_error(r.u, nodes, ex_u);
            row.norm_rms_u = range_normalized_rms(r.u, nodes, ex_u);
            row.picard_iterations = r.u.outer_iterations;
            row.linear_iterations = r.u.linear_iterations;
            if (bench.coupled) {
                auto ex_v = [&](double x, double y) { return bench.exact_v(x, y); };
                row.rms_v = rms_error(r.v, nodes, ex_v);
                row.norm_rms_v = range_normalized_rms(r.v, nodes, ex_v);
            }
            if (options.condition_numbers)
                row.condition_number = condition_number_2norm(r.final_system.matrix);
            if (prev && !prev->failed) {
                if (prev->norm_rms_u > row.norm_rms_u && prev->h > row.h)
                    row.order_u = convergence_order(prev->norm_rms_u, row.norm_rms_u, prev->h, row.h);
                if (bench.coupled && prev->norm_rms_v > row.norm_rms_v && prev->h > row.h)
                    row.order_v = convergence_order(prev->norm_rms_v, row.norm_rms_v, prev->h, row.h);
            }
        } catch (const SolveError& e) {
            row.failed = true;
            row.failure_reason = sanitized(e.what());
        } catch (const StencilError& e) {
            row.failed = true;
            row.failure_reason = sanitized(e.what());
        }
        report.rows.push_back(row);
        prev = &report.rows.back();
    }
    return report;
}

namespace {

const char* kRowHeader =
    "node_count,h,rms_u,norm_rms_u,order_u,rms_v,norm_rms_v,order_v,condition_number,"
    "picard_iterations,linear_iterations,wall_time_s,failed,failure_reason";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_report_csv(const ConvergenceReport& r, std::ostream& out) {
    out << "example,method,distribution,ng,nr,epsilon,poly_degree\n";
    out << r.example << "," << r.method << "," << r.distribution << "," << r.config.n_gfd << ","
        << r.config.n_rbf << "," << fmt(r.config.epsilon) << "," << r.config.poly_degree << "\n";
    out << kRowHeader << "\n";
    for (const StudyRow& w : r.rows) {
        out << w.node_count << "," << fmt(w.h) << "," << fmt(w.rms_u) << "," << fmt(w.norm_rms_u)
            << "," << fmt(w.order_u) << "," << fmt(w.rms_v) << "," << fmt(w.norm_rms_v) << ","
            << fmt(w.order_v) << "," << fmt(w.condition_number) << "," << w.picard_iterations
            << "," << w.linear_iterations << "," << fmt(w.wall_time_s) << ","
            << (w.failed ? 1 : 0) << "," << w.failure_reason << "\n";
    }
}

ConvergenceReport read_report_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("example,", 0) != 0)
        throw std::invalid_argument("read_report_csv: missing config header");
    if (!std::getline(in, line)) throw std::invalid_argument("read_report_csv: truncated");
    ConvergenceReport r;
    {
        std::istringstream ls(line);
        std::string tok;
        std::getline(ls, tok, ',');
        r.example = std::stoi(tok);
        std::getline(ls, r.method, ',');
        std::getline(ls, r.distribution, ',');
        std::getline(ls, tok, ',');
        r.config.n_gfd = std::stoi(tok);
        std::getline(ls, tok, ',');
        r.config.n_rbf = std::stoi(tok);
        std::getline(ls, tok, ',');
        r.config.epsilon = std::strtod(tok.c_str(), nullptr);
        std::getline(ls, tok, ',');
        r.config.poly_degree = std::stoi(tok);
        r.config.method = method_from_string(r.method);
    }
    if (!std::getline(in, line) || line != kRowHeader)
        throw std::invalid_argument("read_report_csv: missing row header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        StudyRow w;
        auto next_d = [&]() {
            std::getline(ls, tok, ',');
            return std::strtod(tok.c_str(), nullptr);
        };
        std::getline(ls, tok, ',');
        w.node_count = std::stoi(tok);
        w.h = next_d();
        w.rms_u = next_d();
        w.norm_rms_u = next_d();
        w.order_u = next_d();
        w.rms_v = next_d();
        w.norm_rms_v = next_d();
        w.order_v = next_d();
        w.condition_number = next_d();
        std::getline(ls, tok, ',');
        w.picard_iterations = std::stoi(tok);
        std::getline(ls, tok, ',');
        w.linear_iterations = std::stoi(tok);
        w.wall_time_s = next_d();
        std::getline(ls, tok, ',');
        w.failed = tok == "1";
        std::getline(ls, w.failure_reason);
        r.rows.push_back(w);
    }
    return r;
}

namespace {

nlohmann::json num_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double json_num(const nlohmann::json& j) {
    if (j.is_null()) return kNaN;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        return std::strtod(s.c_str(), nullptr);
    }
    return j.get<double>();
}

}  // namespace

void write_report_json(const ConvergenceReport& r, std::ostream& out) {
    nlohmann::json j;
    j["example"] = r.example;
    j["method"] = r.method;
    j["distribution"] = r.distribution;
    j["config"] = {{"ng", r.config.n_gfd},
                   {"nr", r.config.n_rbf},
                   {"epsilon", r.config.epsilon},
                   {"poly_degree", r.config.poly_degree}};
    j["rows"] = nlohmann::json::array();
    for (const StudyRow& w : r.rows) {
        nlohmann::json row;
        row["node_count"] = w.node_count;
        row["h"] = w.h;
        row["rms_u"] = num_or_null(w.rms_u);
        row["norm_rms_u"] = num_or_null(w.norm_rms_u);
        row["order_u"] = num_or_null(w.order_u);
        row["rms_v"] = num_or_null(w.rms_v);
        row["norm_rms_v"] = num_or_null(w.norm_rms_v);
        row["order_v"] = num_or_null(w.order_v);
        row["condition_number"] = num_or_null(w.condition_number);
        row["picard_iterations"] = w.picard_iterations;
        row["linear_iterations"] = w.linear_iterations;
        row["wall_time_s"] = w.wall_time_s;
        row["failed"] = w.failed;
        row["failure_reason"] = w.failure_reason;
        j["rows"].push_back(row);
    }
    out << j.dump(2) << "\n";
}

ConvergenceReport read_report_json(std::istream& in) {
    nlohmann::json j;
    in >> j;
    ConvergenceReport r;
    r.example = j.at("example").get<int>();
    r.method = j.at("method").get<std::string>();
    r.distribution = j.at("distribution").get<std::string>();
    r.config.method = method_from_string(r.method);
    r.config.n_gfd = j.at("config").at("ng").get<int>();
    r.config.n_rbf = j.at("config").at("nr").get<int>();
    r.config.epsilon = j.at("config").at("epsilon").get<double>();
    r.config.poly_degree = j.at("config").at("poly_degree").get<int>();
    for (const auto& row : j.at("rows")) {
        StudyRow w;
        w.node_count = row.at("node_count").get<int>();
        w.h = row.at("h").get<double>();
        w.rms_u = json_num(row.at("rms_u"));
        w.norm_rms_u = json_num(row.at("norm_rms_u"));
        w.order_u = json_num(row.at("order_u"));
        w.rms_v = json_num(row.at("rms_v"));
        w.norm_rms_v = json_num(row.at("norm_rms_v"));
        w.order_v = json_num(row.at("order_v"));
        w.condition_number = json_num(row.at("condition_number"));
        w.picard_iterations = row.at("picard_iterations").get<int>();
        w.linear_iterations = row.at("linear_iterations").get<int>();
        w.wall_time_s = row.at("wall_time_s").get<double>();
        w.failed = row.at("failed").get<bool>();
        w.failure_reason = row.at("failure_reason").get<std::string>();
        r.rows.push_back(w);
    }
    return r;
}

void write_solution_csv(const NodeSet& nodes, const SolutionField& u, const SolutionField* v,
                        const BenchmarkCase& bench, std::ostream& out) {
    out << (v ? "index,x,y,u,v,exact_u,exact_v,abs_error_u,abs_error_v\n"
             : "index,x,y,u,exact,abs_error\n");
    char buf[320];
    for (const Node& nd : nodes.nodes()) {
        const double eu = bench.exact_u(nd.x, nd.y);
        if (v) {
            const double ev = bench.exact_v(nd.x, nd.y);
            std::snprintf(buf, sizeof buf,
                          "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", nd.index, nd.x,
                          nd.y, u.values[nd.index], v->values[nd.index], eu, ev,
                          std::abs(u.values[nd.index] - eu), std::abs(v->values[nd.index] - ev));
        } else {
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", nd.index, nd.x,
                          nd.y, u.values[nd.index], eu, std::abs(u.values[nd.index] - eu));
        }
        out << buf;
    }
}

Method method_from_string(const std::string& s) {
    if (s == "hybrid") return Method::Hybrid;
    if (s == "gfd") return Method::Gfd;
    if (s == "cd2") return Method::Cd2;
    throw std::invalid_argument("unknown method: " + s);
}

Distribution distribution_from_string(const std::string& s) {
    if (s == "uniform") return Distribution::Uniform;
    if (s == "chebyshev") return Distribution::Chebyshev;
    throw std::invalid_argument("unknown distribution: " + s);
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Hybrid: return "hybrid";
        case Method::Gfd: return "gfd";
        default: return "cd2";
    }
}

std::string to_string(Distribution d) {
    return d == Distribution::Uniform ? "uniform" : "chebyshev";
}

}  // namespace meshfree
