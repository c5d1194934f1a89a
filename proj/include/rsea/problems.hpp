#ifndef RSEA_PROBLEMS_HPP
#define RSEA_PROBLEMS_HPP

// Benchmark problems (LZG, YLL, DTLZ), budgeted evaluation and dominance
// utilities. All problems are minimized.
//
// Formula and bound conventions (the standard literature definitions):
//   LZG suite:
//     ellipsoid   sum_{i=1..D} i * x_i^2                     x in [-5.12, 5.12]
//     rosenbrock  sum 100(x_{i+1}-x_i^2)^2 + (x_i-1)^2       x in [-2.048, 2.048]
//     ackley      -20 exp(-0.2 sqrt(mean x^2))
//                 - exp(mean cos(2 pi x)) + 20 + e           x in [-32.768, 32.768]
//     griewank    1 + sum x^2/4000 - prod cos(x_i/sqrt(i))   x in [-600, 600]
//   The Ellipsoid weighting is pinned to the 1-indexed form sum i*x_i^2.
//
//   YLL suite: f01..f13 without f10/f11 (those duplicate Ackley/Griewank).
//   f07 is implemented without its additive noise term so that evaluation
//   stays deterministic.
//
//   DTLZ1..7: x in [0,1]^D, k = D - M + 1 distance variables; D >= M required.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "rsea/errors.hpp"
#include "rsea/types.hpp"

namespace rsea {

struct Problem {
    std::string name; // canonical id, e.g. "lzg/ackley"
    std::size_t dim = 0;
    std::size_t n_obj = 1;
    std::vector<double> lower;
    std::vector<double> upper;
    std::function<std::vector<double>(const std::vector<double>&)> eval_fn;
    // Known optimizer and its objective values, when the literature states one.
    std::optional<std::vector<double>> optimum_x;
    std::optional<std::vector<double>> optimum_f;

    bool in_bounds(const std::vector<double>& x) const {
        if (x.size() != dim) return false;
        for (std::size_t i = 0; i < dim; ++i)
            if (x[i] < lower[i] || x[i] > upper[i]) return false;
        return true;
    }
};

struct EvaluationBudget {
    std::size_t max_fes = 0;
    std::size_t used_fes = 0;
    std::uint64_t next_eval_id = 1;

    std::size_t remaining() const { return max_fes - used_fes; }
    bool exhausted() const { return used_fes >= max_fes; }
};

/// One true evaluation. Increments the budget by exactly one.
inline std::vector<double> evaluate(const Problem& problem, const std::vector<double>& x,
                                    EvaluationBudget& budget) {
    if (x.size() != problem.dim)
        throw DomainError("evaluate: point has dimension " + std::to_string(x.size()) +
                          ", problem expects " + std::to_string(problem.dim));
    if (!problem.in_bounds(x)) throw DomainError("evaluate: point out of bounds for " + problem.name);
    if (budget.exhausted())
        throw BudgetExceeded("evaluation budget exhausted (" + std::to_string(budget.max_fes) + " FEs)");
    auto f = problem.eval_fn(x);
    ++budget.used_fes;
    return f;
}

/// Evaluates and stamps a Solution with the next eval_id.
inline Solution evaluate_solution(const Problem& problem, std::vector<double> x,
                                  EvaluationBudget& budget) {
    Solution s;
    s.f = evaluate(problem, x, budget);
    s.x = std::move(x);
    s.eval_id = budget.next_eval_id++;
    return s;
}

/// Pareto dominance for minimization: a dominates b.
inline bool pareto_dominates(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw DomainError("pareto_dominates: objective vectors of unequal length");
    if (a.size() < 2) throw DomainError("pareto_dominates: needs at least 2 objectives");
    bool strictly = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strictly = true;
    }
    return strictly;
}

/// Fast nondominated sorting. Returns fronts as index lists; front 0 is the
/// nondominated set. Empty input yields an empty list.
inline std::vector<std::vector<std::size_t>>
nondominated_sort(const std::vector<std::vector<double>>& objs) {
    std::vector<std::vector<std::size_t>> fronts;
    const std::size_t n = objs.size();
    if (n == 0) return fronts;

    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> dom_count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (pareto_dominates(objs[i], objs[j])) {
                dominated[i].push_back(j);
                ++dom_count[j];
            } else if (pareto_dominates(objs[j], objs[i])) {
                dominated[j].push_back(i);
                ++dom_count[i];
            }
        }
    }
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (dom_count[i] == 0) current.push_back(i);
    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<std::size_t> next;
        for (std::size_t i : current)
            for (std::size_t j : dominated[i])
                if (--dom_count[j] == 0) next.push_back(j);
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    return fronts;
}

namespace detail {

inline constexpr double pi = std::numbers::pi;

// --- LZG ---

inline double lzg_ellipsoid(const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += double(i + 1) * x[i] * x[i];
    return s;
}

inline double rosenbrock(const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i + 1] - x[i] * x[i];
        const double b = x[i] - 1.0;
        s += 100.0 * a * a + b * b;
    }
    return s;
}

inline double ackley(const std::vector<double>& x) {
    const double n = double(x.size());
    double sq = 0.0, cs = 0.0;
    for (double v : x) {
        sq += v * v;
        cs += std::cos(2.0 * pi * v);
    }
    return -20.0 * std::exp(-0.2 * std::sqrt(sq / n)) - std::exp(cs / n) + 20.0 + std::exp(1.0);
}

inline double griewank(const std::vector<double>& x) {
    double s = 0.0, p = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += x[i] * x[i];
        p *= std::cos(x[i] / std::sqrt(double(i + 1)));
    }
    return 1.0 + s / 4000.0 - p;
}

// --- YLL ---

inline double yll_f01(const std::vector<double>& x) { // sphere
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

inline double yll_f02(const std::vector<double>& x) { // sum + product of |x|
    double s = 0.0, p = 1.0;
    for (double v : x) {
        s += std::fabs(v);
        p *= std::fabs(v);
    }
    return s + p;
}

inline double yll_f03(const std::vector<double>& x) { // rotated hyper-ellipsoid
    double s = 0.0, partial = 0.0;
    for (double v : x) {
        partial += v;
        s += partial * partial;
    }
    return s;
}

inline double yll_f04(const std::vector<double>& x) { // max |x_i|
    double m = 0.0;
    for (double v : x) m = std::max(m, std::fabs(v));
    return m;
}

inline double yll_f06(const std::vector<double>& x) { // step
    double s = 0.0;
    for (double v : x) {
        const double t = std::floor(v + 0.5);
        s += t * t;
    }
    return s;
}

inline double yll_f07(const std::vector<double>& x) { // quartic, noise term dropped
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v2 = x[i] * x[i];
        s += double(i + 1) * v2 * v2;
    }
    return s;
}

inline double yll_f08(const std::vector<double>& x) { // Schwefel 2.26
    double s = 0.0;
    for (double v : x) s += -v * std::sin(std::sqrt(std::fabs(v)));
    return s;
}

inline double yll_f09(const std::vector<double>& x) { // Rastrigin
    double s = 0.0;
    for (double v : x) s += v * v - 10.0 * std::cos(2.0 * pi * v) + 10.0;
    return s;
}

inline double yll_penalty_u(double v, double a, double k, double m) {
    if (v > a) return k * std::pow(v - a, m);
    if (v < -a) return k * std::pow(-v - a, m);
    return 0.0;
}

inline double yll_f12(const std::vector<double>& x) { // penalized 1
    const std::size_t d = x.size();
    std::vector<double> y(d);
    for (std::size_t i = 0; i < d; ++i) y[i] = 1.0 + (x[i] + 1.0) / 4.0;
    double s = 10.0 * std::pow(std::sin(pi * y[0]), 2);
    for (std::size_t i = 0; i + 1 < d; ++i)
        s += (y[i] - 1.0) * (y[i] - 1.0) * (1.0 + 10.0 * std::pow(std::sin(pi * y[i + 1]), 2));
    s += (y[d - 1] - 1.0) * (y[d - 1] - 1.0);
    s *= pi / double(d);
    for (double v : x) s += yll_penalty_u(v, 10.0, 100.0, 4.0);
    return s;
}

inline double yll_f13(const std::vector<double>& x) { // penalized 2
    const std::size_t d = x.size();
    double s = std::pow(std::sin(3.0 * pi * x[0]), 2);
    for (std::size_t i = 0; i + 1 < d; ++i)
        s += (x[i] - 1.0) * (x[i] - 1.0) * (1.0 + std::pow(std::sin(3.0 * pi * x[i + 1]), 2));
    s += (x[d - 1] - 1.0) * (x[d - 1] - 1.0) * (1.0 + std::pow(std::sin(2.0 * pi * x[d - 1]), 2));
    s *= 0.1;
    for (double v : x) s += yll_penalty_u(v, 5.0, 100.0, 4.0);
    return s;
}

// --- DTLZ ---

inline double dtlz_g1(const std::vector<double>& x, std::size_t k) {
    // 100 * (k + sum (xi-0.5)^2 - cos(20 pi (xi-0.5)))
    double s = double(k);
    for (std::size_t i = x.size() - k; i < x.size(); ++i) {
        const double t = x[i] - 0.5;
        s += t * t - std::cos(20.0 * pi * t);
    }
    return 100.0 * s;
}

inline double dtlz_g2(const std::vector<double>& x, std::size_t k) {
    double s = 0.0;
    for (std::size_t i = x.size() - k; i < x.size(); ++i) {
        const double t = x[i] - 0.5;
        s += t * t;
    }
    return s;
}

inline std::vector<double> dtlz_eval(int which, const std::vector<double>& x, std::size_t m) {
    const std::size_t d = x.size();
    const std::size_t k = d - m + 1;
    std::vector<double> f(m);
    switch (which) {
    case 1: {
        const double g = dtlz_g1(x, k);
        for (std::size_t i = 0; i < m; ++i) {
            double v = 0.5 * (1.0 + g);
            for (std::size_t j = 0; j < m - i - 1; ++j) v *= x[j];
            if (i > 0) v *= 1.0 - x[m - i - 1];
            f[i] = v;
        }
        break;
    }
    case 2:
    case 3:
    case 4: {
        const double g = which == 3 ? dtlz_g1(x, k) : dtlz_g2(x, k);
        const double alpha = which == 4 ? 100.0 : 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            double v = 1.0 + g;
            for (std::size_t j = 0; j < m - i - 1; ++j)
                v *= std::cos(std::pow(x[j], alpha) * pi / 2.0);
            if (i > 0) v *= std::sin(std::pow(x[m - i - 1], alpha) * pi / 2.0);
            f[i] = v;
        }
        break;
    }
    case 5:
    case 6: {
        double g;
        if (which == 6) {
            g = 0.0;
            for (std::size_t i = d - k; i < d; ++i) g += std::pow(x[i], 0.1);
        } else {
            g = dtlz_g2(x, k);
        }
        std::vector<double> theta(m - 1);
        theta[0] = x[0] * pi / 2.0;
        for (std::size_t i = 1; i < m - 1; ++i)
            theta[i] = pi / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * x[i]);
        for (std::size_t i = 0; i < m; ++i) {
            double v = 1.0 + g;
            for (std::size_t j = 0; j < m - i - 1; ++j) v *= std::cos(theta[j]);
            if (i > 0) v *= std::sin(theta[m - i - 1]);
            f[i] = v;
        }
        break;
    }
    case 7: {
        double g = 0.0;
        for (std::size_t i = d - k; i < d; ++i) g += x[i];
        g = 1.0 + 9.0 * g / double(k);
        double h = double(m);
        for (std::size_t i = 0; i < m - 1; ++i) {
            f[i] = x[i];
            h -= x[i] / (1.0 + g) * (1.0 + std::sin(3.0 * pi * x[i]));
        }
        f[m - 1] = (1.0 + g) * h;
        break;
    }
    default:
        throw ConfigError("dtlz index must be 1..7");
    }
    return f;
}

inline Problem make_sop(std::string name, std::size_t d, double lo, double hi,
                        double (*fn)(const std::vector<double>&),
                        std::optional<std::vector<double>> opt_x = std::nullopt,
                        std::optional<double> opt_f = std::nullopt) {
    Problem p;
    p.name = std::move(name);
    p.dim = d;
    p.n_obj = 1;
    p.lower.assign(d, lo);
    p.upper.assign(d, hi);
    p.eval_fn = [fn](const std::vector<double>& x) { return std::vector<double>{fn(x)}; };
    p.optimum_x = std::move(opt_x);
    if (opt_f) p.optimum_f = std::vector<double>{*opt_f};
    return p;
}

} // namespace detail

/// Builds a problem from its string id: "lzg/<ellipsoid|rosenbrock|ackley|griewank>",
/// "yll/f01".."yll/f13" (f10/f11 excluded), "dtlz/1".."dtlz/7".
inline Problem make_problem(const std::string& id, std::size_t dim, std::size_t n_obj = 1) {
    using namespace detail;
    if (dim == 0) throw ConfigError("problem dimension must be positive");

    const auto slash = id.find('/');
    const std::string suite = id.substr(0, slash == std::string::npos ? id.size() : slash);
    const std::string fn = slash == std::string::npos ? "" : id.substr(slash + 1);

    if (suite == "lzg") {
        if (n_obj != 1) throw ConfigError("lzg problems are single-objective");
        const std::vector<double> zeros(dim, 0.0);
        const std::vector<double> ones(dim, 1.0);
        if (fn == "ellipsoid") return make_sop(id, dim, -5.12, 5.12, lzg_ellipsoid, zeros, 0.0);
        if (fn == "rosenbrock") return make_sop(id, dim, -2.048, 2.048, rosenbrock, ones, 0.0);
        if (fn == "ackley") return make_sop(id, dim, -32.768, 32.768, ackley, zeros, 0.0);
        if (fn == "griewank") return make_sop(id, dim, -600.0, 600.0, griewank, zeros, 0.0);
        throw ConfigError("unknown lzg function: " + fn);
    }
    if (suite == "yll") {
        if (n_obj != 1) throw ConfigError("yll problems are single-objective");
        const std::vector<double> zeros(dim, 0.0);
        const std::vector<double> ones(dim, 1.0);
        const std::vector<double> neg_ones(dim, -1.0);
        if (fn == "f01") return make_sop(id, dim, -100.0, 100.0, yll_f01, zeros, 0.0);
        if (fn == "f02") return make_sop(id, dim, -10.0, 10.0, yll_f02, zeros, 0.0);
        if (fn == "f03") return make_sop(id, dim, -100.0, 100.0, yll_f03, zeros, 0.0);
        if (fn == "f04") return make_sop(id, dim, -100.0, 100.0, yll_f04, zeros, 0.0);
        if (fn == "f05") return make_sop(id, dim, -30.0, 30.0, rosenbrock, ones, 0.0);
        if (fn == "f06") return make_sop(id, dim, -100.0, 100.0, yll_f06, zeros, 0.0);
        if (fn == "f07") return make_sop(id, dim, -1.28, 1.28, yll_f07, zeros, 0.0);
        if (fn == "f08") {
            const double xs = 420.968746227503;
            auto p = make_sop(id, dim, -500.0, 500.0, yll_f08);
            p.optimum_x = std::vector<double>(dim, xs);
            p.optimum_f = std::vector<double>{yll_f08(*p.optimum_x)};
            return p;
        }
        if (fn == "f09") return make_sop(id, dim, -5.12, 5.12, yll_f09, zeros, 0.0);
        if (fn == "f12") return make_sop(id, dim, -50.0, 50.0, yll_f12, neg_ones, 0.0);
        if (fn == "f13") return make_sop(id, dim, -50.0, 50.0, yll_f13, ones, 0.0);
        throw ConfigError("unknown yll function: " + fn + " (f10/f11 are not provided)");
    }
    if (suite == "dtlz") {
        const int which = fn.size() == 1 && fn[0] >= '1' && fn[0] <= '7' ? fn[0] - '0' : -1;
        if (which < 0) throw ConfigError("unknown dtlz function: " + fn);
        if (n_obj < 2) throw ConfigError("dtlz problems need at least 2 objectives");
        if (dim < n_obj) throw ConfigError("dtlz requires D >= M");
        Problem p;
        p.name = id;
        p.dim = dim;
        p.n_obj = n_obj;
        p.lower.assign(dim, 0.0);
        p.upper.assign(dim, 1.0);
        p.eval_fn = [which, n_obj](const std::vector<double>& x) {
            return dtlz_eval(which, x, n_obj);
        };
        return p;
    }
    throw ConfigError("unknown problem id: " + id);
}

inline std::vector<std::string> list_problem_ids() {
    std::vector<std::string> ids = {"lzg/ellipsoid", "lzg/rosenbrock", "lzg/ackley", "lzg/griewank"};
    for (int i : {1, 2, 3, 4, 5, 6, 7, 8, 9, 12, 13}) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "yll/f%02d", i);
        ids.emplace_back(buf);
    }
    for (int i = 1; i <= 7; ++i) ids.push_back("dtlz/" + std::to_string(i));
    return ids;
}

inline std::vector<std::string> lzg_problem_ids() {
    return {"lzg/ellipsoid", "lzg/rosenbrock", "lzg/ackley", "lzg/griewank"};
}

} // namespace rsea

#endif // RSEA_PROBLEMS_HPP
