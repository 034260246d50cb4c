#include "fedbayes/optimizer.hpp"

#include <cmath>
#include <deque>
#include <string>

#include "fedbayes/errors.hpp"

namespace fedbayes {

void OptimizerConfig::validate() const {
    if (memory == 0) throw OptimizerError("memory must be positive");
    if (grad_tolerance < 0)
        throw OptimizerError("grad_tolerance must be nonnegative");
    if (!(wolfe_c1 > 0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1))
        throw OptimizerError("need 0 < c1 < c2 < 1, got c1=" +
                             std::to_string(wolfe_c1) + " c2=" +
                             std::to_string(wolfe_c2));
    if (max_line_search_steps == 0)
        throw OptimizerError("max_line_search_steps must be positive");
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::iteration_cap: return "iteration_cap";
        case Termination::gradient_tolerance: return "gradient_tolerance";
        case Termination::line_search_failure: return "line_search_failure";
    }
    return "unknown";
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

double sup_norm(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

struct Pair {
    std::vector<double> s, y;
    double rho;
};

// Classic two-loop recursion; gamma-scales the seed Hessian by the newest
// pair's s.y / y.y.
std::vector<double> two_loop(const std::vector<double>& g,
                             const std::deque<Pair>& hist) {
    std::vector<double> q = g;
    std::vector<double> alpha(hist.size());
    for (std::size_t i = hist.size(); i-- > 0;) {
        alpha[i] = hist[i].rho * dot(hist[i].s, q);
        for (std::size_t c = 0; c < q.size(); ++c)
            q[c] -= alpha[i] * hist[i].y[c];
    }
    if (!hist.empty()) {
        const Pair& newest = hist.back();
        const double gamma = dot(newest.s, newest.y) / dot(newest.y, newest.y);
        for (double& v : q) v *= gamma;
    }
    for (std::size_t i = 0; i < hist.size(); ++i) {
        const double beta = hist[i].rho * dot(hist[i].y, q);
        for (std::size_t c = 0; c < q.size(); ++c)
            q[c] += (alpha[i] - beta) * hist[i].s[c];
    }
    for (double& v : q) v = -v;
    return q;
}

struct Evaluator {
    const Objective& f;
    std::size_t dim;

    double operator()(const std::vector<double>& x,
                      std::vector<double>& grad) const {
        grad.assign(dim, 0.0);
        const double value = f(std::span<const double>(x),
                               std::span<double>(grad));
        if (!std::isfinite(value))
            throw OptimizerError("objective evaluated to a non-finite value");
        for (double gc : grad)
            if (!std::isfinite(gc))
                throw OptimizerError("gradient has a non-finite entry");
        return value;
    }
};

// One strong-Wolfe line search along d from (x0, f0, g0). On success fills
// the accepted point/value/gradient and returns true; on budget exhaustion
// returns false and leaves the outputs untouched.
bool wolfe_search(const Evaluator& eval, const std::vector<double>& x0,
                  double f0, const std::vector<double>& g0,
                  const std::vector<double>& d, double first_step,
                  const OptimizerConfig& cfg, std::vector<double>& x_out,
                  double& f_out, std::vector<double>& g_out) {
    const double dphi0 = dot(g0, d);  // caller guarantees < 0
    const std::size_t dim = x0.size();
    std::size_t budget = cfg.max_line_search_steps;

    std::vector<double> x(dim), g;
    auto phi = [&](double a, double& dphi) {
        for (std::size_t c = 0; c < dim; ++c) x[c] = x0[c] + a * d[c];
        const double v = eval(x, g);
        dphi = dot(g, d);
        return v;
    };
    auto accept = [&](double fv) {
        x_out = x;
        g_out = g;
        f_out = fv;
        return true;
    };
    auto sufficient = [&](double a, double fv) {
        return fv <= f0 + cfg.wolfe_c1 * a * dphi0;
    };

    // Zoom phase: bisect a bracket [lo, hi] known to contain a Wolfe point
    // (lo is the better endpoint, satisfying sufficient decrease).
    auto zoom = [&](double lo, double f_lo, double hi) {
        while (budget-- > 0) {
            const double a = 0.5 * (lo + hi);
            double dphi;
            const double fv = phi(a, dphi);
            if (!sufficient(a, fv) || fv >= f_lo) {
                hi = a;
                continue;
            }
            if (std::abs(dphi) <= -cfg.wolfe_c2 * dphi0) return accept(fv);
            if (dphi * (hi - lo) >= 0) hi = lo;
            lo = a;
            f_lo = fv;
        }
        return false;
    };

    // Bracketing phase: expand until the minimum is straddled.
    double a_prev = 0.0, f_prev = f0;
    double a = first_step;
    bool first = true;
    while (budget-- > 0) {
        double dphi;
        const double fv = phi(a, dphi);
        if (!sufficient(a, fv) || (!first && fv >= f_prev))
            return zoom(a_prev, f_prev, a);
        if (std::abs(dphi) <= -cfg.wolfe_c2 * dphi0) return accept(fv);
        if (dphi >= 0) return zoom(a, fv, a_prev);
        a_prev = a;
        f_prev = fv;
        a *= 2.0;
        first = false;
    }
    return false;
}

}  // namespace

OptimizeReport minimize(const Objective& objective, std::vector<double> start,
                        const OptimizerConfig& config) {
    config.validate();
    if (start.empty()) throw OptimizerError("cannot minimize in dimension 0");
    const std::size_t dim = start.size();
    Evaluator eval{objective, dim};

    OptimizeReport report;
    std::vector<double> x = std::move(start);
    std::vector<double> g;
    double f = eval(x, g);
    report.objective_trace.push_back(f);

    if (sup_norm(g) <= config.grad_tolerance) {
        report.final_point = std::move(x);
        report.termination = Termination::gradient_tolerance;
        return report;
    }

    std::deque<Pair> hist;
    report.termination = Termination::iteration_cap;

    for (std::size_t it = 0; it < config.max_iterations; ++it) {
        std::vector<double> d = two_loop(g, hist);
        if (dot(g, d) >= 0) {
            // Numerically corrupted curvature; restart from steepest descent.
            hist.clear();
            d = g;
            for (double& v : d) v = -v;
        }
        const double first_step = hist.empty() ? 1.0 / norm2(g) : 1.0;

        std::vector<double> x_new, g_new;
        double f_new = 0;
        if (!wolfe_search(eval, x, f, g, d, first_step, config, x_new, f_new,
                          g_new)) {
            report.termination = Termination::line_search_failure;
            break;
        }

        Pair p;
        p.s.resize(dim);
        p.y.resize(dim);
        for (std::size_t c = 0; c < dim; ++c) {
            p.s[c] = x_new[c] - x[c];
            p.y[c] = g_new[c] - g[c];
        }
        const double sy = dot(p.s, p.y);
        if (sy > 1e-10 * norm2(p.s) * norm2(p.y)) {
            p.rho = 1.0 / sy;
            hist.push_back(std::move(p));
            if (hist.size() > config.memory) hist.pop_front();
        }
        x = std::move(x_new);
        g = std::move(g_new);
        f = f_new;
        report.objective_trace.push_back(f);
        ++report.iterations_used;

        if (sup_norm(g) <= config.grad_tolerance) {
            report.termination = Termination::gradient_tolerance;
            break;
        }
    }

    report.final_point = std::move(x);
    return report;
}

}  // namespace fedbayes
