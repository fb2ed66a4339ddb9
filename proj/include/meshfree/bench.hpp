#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "meshfree/assembly.hpp"

namespace meshfree {

/// One of the three reference problems, with closed-form exact solution and
/// source derived from it.
struct BenchmarkCase {
    int id = 1;
    Rect domain;
    bool coupled = false;
    OperatorSpec diffusion;
    double epsilon_uniform = 0.5;
    double epsilon_chebyshev = 0.5;

    double exact_u(double x, double y) const;
    double exact_v(double x, double y) const;  // case 3 only
    double source_u(double x, double y) const;
    double source_v(double x, double y) const;

    ProblemSpec problem_u() const;
    ProblemSpec problem_v() const;  // case 3 only

    double default_epsilon(Distribution dist) const {
        return dist == Distribution::Uniform ? epsilon_uniform : epsilon_chebyshev;
    }
};

BenchmarkCase benchmark_case(int id);

struct ExactValue {
    double u = 0.0;
    std::optional<double> v;
};

ExactValue example_exact(int id, double x, double y);
ExactValue example_source(int id, double x, double y);

/// RMS error over interior nodes: sqrt(sum (u_i - U(x_i))^2 / n_int).
double rms_error(const SolutionField& field, const NodeSet& nodes,
                 const std::function<double(double, double)>& exact);

/// All-node RMS normalized by the range (max - min) of the exact solution
/// over the node set.  This is the scale the reference tables report, so
/// the benchmark rows carry it alongside the plain interior RMS.
double range_normalized_rms(const SolutionField& field, const NodeSet& nodes,
                            const std::function<double(double, double)>& exact);

/// q = log(e_old/e_new) / log(h_old/h_new).
double convergence_order(double e_old, double e_new, double h_old, double h_new);

struct StudyRow {
    int node_count = 0;
    double h = 0.0;
    double rms_u = 0.0, rms_v = 0.0;                  // interior RMS
    double norm_rms_u = 0.0, norm_rms_v = 0.0;        // range-normalized, all nodes
    double order_u = 0.0, order_v = 0.0;              // NaN on the first row
    double condition_number = 0.0;                    // NaN when not requested
    int picard_iterations = 0;
    int linear_iterations = 0;
    double wall_time_s = 0.0;
    bool failed = false;
    std::string failure_reason;
};

struct ConvergenceReport {
    int example = 1;
    std::string method;        // hybrid | gfd | cd2
    std::string distribution;  // uniform | chebyshev
    SolverConfig config;
    std::vector<StudyRow> rows;
};

struct StudyOptions {
    bool condition_numbers = false;
    PicardParams picard;
};

/// Runs one refinement study: for each n-per-axis generate nodes, solve,
/// record errors / orders / optional condition number / wall time.  A failed
/// refinement (non-convergence, stencil failure) is recorded as a failed row
/// and the study continues.
ConvergenceReport run_study(int example, Method method, Distribution distribution,
                            const std::vector<int>& nodes_per_axis, const SolverConfig& config,
                            const StudyOptions& options = {});

/// CD2 baseline on a uniform grid (classical central differences).
SolutionField cd2_solve(const BenchmarkCase& bench, int nx, int ny,
                        const PicardParams& picard = {});

/// Pure-GFD baseline: full second-order GFD stencils on 9-node stars.
SolutionField gfd_solve(const BenchmarkCase& bench, const NodeSet& nodes, int n_gfd = 9,
                        const PicardParams& picard = {});

// Report serialization; both formats round-trip losslessly.
void write_report_csv(const ConvergenceReport& report, std::ostream& out);
ConvergenceReport read_report_csv(std::istream& in);
void write_report_json(const ConvergenceReport& report, std::ostream& out);
ConvergenceReport read_report_json(std::istream& in);

/// Solution dump: index,x,y,u[,v],exact,abs_error
void write_solution_csv(const NodeSet& nodes, const SolutionField& u, const SolutionField* v,
                        const BenchmarkCase& bench, std::ostream& out);

Method method_from_string(const std::string& s);
Distribution distribution_from_string(const std::string& s);
std::string to_string(Method m);
std::string to_string(Distribution d);

}  // namespace meshfree
