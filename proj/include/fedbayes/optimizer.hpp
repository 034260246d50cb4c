#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fedbayes {

/// Knobs of the limited-memory quasi-Newton engine. The iteration cap is
/// the load-bearing parameter: capping local optimization is the whole
/// overfitting-control story, so max_iterations = 0 (pure no-op) through
/// 10000 (the effectively-unbounded variant) must all behave.
struct OptimizerConfig {
    std::size_t max_iterations = 5;
    std::size_t memory = 10;          // curvature pairs kept
    double grad_tolerance = 1e-5;     // sup-norm exit
    double wolfe_c1 = 1e-4;           // sufficient decrease
    double wolfe_c2 = 0.9;            // curvature condition
    std::size_t max_line_search_steps = 20;  // evaluation budget per step

    void validate() const;
};

enum class Termination {
    iteration_cap,        // ran exactly max_iterations accepted steps
    gradient_tolerance,   // sup-norm of gradient under grad_tolerance
    line_search_failure,  // no Wolfe point within the budget; kept last point
};

const char* termination_name(Termination t);

struct OptimizeReport {
    std::vector<double> final_point;
    std::size_t iterations_used = 0;
    std::vector<double> objective_trace;  // start value, then one per step
    Termination termination = Termination::iteration_cap;
};

/// Objective callable: writes the gradient into `grad_out` (same length as
/// x) and returns the value. Must be evaluatable anywhere the line search
/// lands; non-finite values or gradient entries abort with OptimizerError.
using Objective =
    std::function<double(std::span<const double> x, std::span<double> grad_out)>;

/// Minimizes with L-BFGS two-loop recursion and a strong-Wolfe line search
/// (bracket then bisection zoom). Every accepted step satisfies both Wolfe
/// conditions, so the objective trace is non-increasing. Curvature pairs
/// with s.y <= 1e-10 |s||y| are discarded; if the two-loop direction ever
/// fails to descend, the history is dropped and the step falls back to
/// steepest descent. Before any curvature pair exists the first trial step
/// is 1/|g|; afterwards it is 1.
///
/// A line-search failure is not an error: the report carries the last
/// accepted point and says so, because a capped federated round proceeds
/// to aggregation regardless.
OptimizeReport minimize(const Objective& objective, std::vector<double> start,
                        const OptimizerConfig& config);

}  // namespace fedbayes
