#include "exponent.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace varexp {

ExponentFunction::ExponentFunction(ExponentKind kind, std::string name, Fn eval,
                                   Fn deriv, double pminus, double pplus,
                                   double delta, double dsup)
    : kind_(kind),
      name_(std::move(name)),
      eval_(std::move(eval)),
      deriv_(std::move(deriv)),
      pminus_(pminus),
      pplus_(pplus),
      delta_(delta),
      dsup_(dsup) {}

ExponentFunction ExponentFunction::p1() {
    return {ExponentKind::P1,
            "p1",
            [](double v) { return 0.5 + 0.3 * (1.0 - std::exp(-v)); },
            [](double v) { return 0.3 * std::exp(-v); },
            0.5,
            0.8,
            1.0,
            0.3};
}

ExponentFunction ExponentFunction::p2() {
    return {ExponentKind::P2,
            "p2",
            [](double v) { return 0.6 + 0.2 * std::tanh(v); },
            [](double v) {
                const double c = std::cosh(v);
                return std::isfinite(c) ? 0.2 / (c * c) : 0.0;
            },
            0.6,
            0.8,
            1.0,
            0.2};
}

ExponentFunction ExponentFunction::p3() {
    return {ExponentKind::P3,
            "p3",
            [](double v) { return 0.55 + 0.2 * (v / (1.0 + v)); },
            [](double v) { return 0.2 / ((1.0 + v) * (1.0 + v)); },
            0.55,
            0.75,
            1.0,
            0.2};
}

ExponentFunction ExponentFunction::constant(double c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "const:%.17g", c);
    return {ExponentKind::Constant,
            buf,
            [c](double) { return c; },
            [](double) { return 0.0; },
            c,
            c,
            1.0,
            0.0};
}

ExponentFunction ExponentFunction::custom(Fn eval, Fn deriv, double declared_pminus,
                                          double declared_pplus, double delta,
                                          double dsup, std::string name) {
    if (!eval || !deriv) {
        throw InvalidArgument("custom exponent requires both eval and deriv");
    }
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw InvalidArgument("custom exponent requires a finite delta > 0");
    }
    if (!(declared_pminus <= declared_pplus)) {
        throw InvalidArgument("custom exponent requires pminus <= pplus");
    }
    return {ExponentKind::Custom, std::move(name), std::move(eval), std::move(deriv),
            declared_pminus, declared_pplus, delta, dsup};
}

std::optional<double> ExponentFunction::constant_value() const {
    if (kind_ != ExponentKind::Constant) return std::nullopt;
    return pminus_;
}

namespace {

double parse_double(std::string_view text, std::string_view context) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty() || !std::isfinite(value)) {
        throw InvalidArgument("invalid number '" + std::string(text) + "' in " +
                              std::string(context));
    }
    return value;
}

}  // namespace

ExponentFunction parse_exponent(std::string_view spec) {
    if (spec == "p1") return ExponentFunction::p1();
    if (spec == "p2") return ExponentFunction::p2();
    if (spec == "p3") return ExponentFunction::p3();
    if (spec.starts_with("const:")) {
        return ExponentFunction::constant(parse_double(spec.substr(6), spec));
    }
    if (spec.starts_with("constant(") && spec.ends_with(")")) {
        return ExponentFunction::constant(
            parse_double(spec.substr(9, spec.size() - 10), spec));
    }
    throw InvalidArgument("unknown exponent '" + std::string(spec) +
                          "' (expected p1, p2, p3 or const:<c>)");
}

ExponentFunction make_builtin(std::string_view name) {
    auto fn = parse_exponent(name);
    if (auto c = fn.constant_value(); c && !(*c >= 0.5 && *c <= 1.0)) {
        throw HypothesisViolation("constant exponent " + fn.name() +
                                  " lies outside [1/2, 1]");
    }
    return fn;
}

namespace {

void check_state(double x, const char* what) {
    if (!std::isfinite(x) || x < 0.0) {
        throw DomainError(std::string(what) + ": state must be finite and >= 0");
    }
}

}  // namespace

double eval_p(const ExponentFunction& fn, double x) {
    check_state(x, "eval_p");
    return fn.value(x);
}

double eval_dp(const ExponentFunction& fn, double x) {
    check_state(x, "eval_dp");
    return fn.derivative(x);
}

std::string_view to_string(HypothesisClause clause) {
    switch (clause) {
        case HypothesisClause::None: return "none";
        case HypothesisClause::LowerBound: return "p_minus_below_half";
        case HypothesisClause::UpperBound: return "p_plus_above_one";
        case HypothesisClause::DerivativeNearZero: return "derivative_unbounded_near_zero";
    }
    return "unknown";
}

namespace {

std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> xs;
    if (points == 1) {
        xs.push_back(lo);
        return xs;
    }
    xs.reserve(static_cast<std::size_t>(points));
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (int i = 0; i < points; ++i) {
        xs.push_back(std::exp(a + (b - a) * i / (points - 1)));
    }
    xs.back() = hi;
    return xs;
}

double checked(double value, double x, const char* what) {
    if (!std::isfinite(value)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s is not finite at x = %.17g", what, x);
        throw NumericError(buf);
    }
    return value;
}

}  // namespace

HypothesisReport validate_hypotheses(const ExponentFunction& fn,
                                     const HypothesisGrid& grid) {
    if (grid.points < 1 || grid.near_zero_points < 0) {
        throw InvalidArgument("hypothesis grid is empty");
    }
    if (!(grid.x_min > 0.0) || !(grid.x_max > grid.x_min) || !std::isfinite(grid.x_max)) {
        throw InvalidArgument("hypothesis grid needs 0 < x_min < x_max < inf");
    }
    if (grid.band_n < 1) throw InvalidArgument("band_n must be >= 1");

    HypothesisReport report;
    report.grid = grid;
    report.delta = fn.delta();

    double inf = std::numeric_limits<double>::infinity();
    double sup = -inf;
    int count = 0;
    auto visit_value = [&](double x) {
        const double p = checked(fn.value(x), x, "p");
        inf = std::min(inf, p);
        sup = std::max(sup, p);
        ++count;
    };

    // x = 0 belongs to the domain [0, inf).
    visit_value(0.0);
    for (double x : log_grid(grid.x_min, grid.x_max, grid.points)) visit_value(x);

    double dsup_near_zero = 0.0;
    const double delta = fn.delta();
    if (grid.near_zero_points > 0) {
        const double hi = delta * (1.0 - 1e-12);
        const double lo = std::min(grid.x_min, hi);
        std::vector<double> near = log_grid(lo, hi, grid.near_zero_points);
        for (int i = 1; i <= grid.near_zero_points; ++i) {
            near.push_back(delta * i / (grid.near_zero_points + 1.0));
        }
        // The right-hand derivative at 0 closes the interval from below.
        near.push_back(0.0);
        for (double x : near) {
            visit_value(x);
            // A non-finite p' here is the unbounded-derivative failure, not
            // an evaluation error.
            const double dp = std::abs(fn.derivative(x));
            dsup_near_zero = std::isnan(dp) ? std::numeric_limits<double>::infinity()
                                            : std::max(dsup_near_zero, dp);
        }
    }

    double dsup_band = 0.0;
    const double n = grid.band_n;
    for (double x : log_grid(1.0 / n, n, grid.points)) {
        dsup_band = std::max(dsup_band, std::abs(checked(fn.derivative(x), x, "p'")));
    }

    report.observed_inf = inf;
    report.observed_sup = sup;
    report.observed_dsup_near_zero = dsup_near_zero;
    report.observed_dsup_band = dsup_band;
    report.p_at_zero_plus = checked(fn.value(grid.x_min), grid.x_min, "p");
    report.evaluated_points = count;

    if (inf < 0.5 - grid.tol) {
        report.failing_clause = HypothesisClause::LowerBound;
    } else if (sup > 1.0 + grid.tol) {
        report.failing_clause = HypothesisClause::UpperBound;
    } else if (!std::isfinite(dsup_near_zero)) {
        report.failing_clause = HypothesisClause::DerivativeNearZero;
    }
    report.pass = report.failing_clause == HypothesisClause::None;
    return report;
}

}  // namespace varexp
