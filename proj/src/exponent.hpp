#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace varexp {

enum class ExponentKind { P1, P2, P3, Constant, Custom };

// A state-dependent diffusion exponent p(x) on x >= 0 together with its
// analytic derivative and declared bounds.
//
// Builtins:
//   p1(v) = 0.5  + 0.3 (1 - exp(-v))
//   p2(v) = 0.6  + 0.2 tanh(v)
//   p3(v) = 0.55 + 0.2 v / (1 + v)
//
// Instances are immutable and cheap to copy.
class ExponentFunction {
public:
    using Fn = std::function<double(double)>;

    static ExponentFunction p1();
    static ExponentFunction p2();
    static ExponentFunction p3();
    // No range check; use make_builtin for the validated path.
    static ExponentFunction constant(double c);
    // Custom functions must supply both the value and the derivative.
    static ExponentFunction custom(Fn eval, Fn deriv, double declared_pminus,
                                   double declared_pplus, double delta,
                                   double dsup, std::string name = "custom");

    ExponentKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    double declared_pminus() const { return pminus_; }
    double declared_pplus() const { return pplus_; }
    // Neighbourhood radius used for the near-zero derivative bound.
    double delta() const { return delta_; }
    // Declared sup |p'| on (0, delta).
    double dsup() const { return dsup_; }
    // Set only for ExponentKind::Constant.
    std::optional<double> constant_value() const;

    // Raw evaluation without domain checks. Callers inside the library use
    // these after validating x once.
    double value(double x) const { return eval_(x); }
    double derivative(double x) const { return deriv_(x); }

private:
    ExponentFunction(ExponentKind kind, std::string name, Fn eval, Fn deriv,
                     double pminus, double pplus, double delta, double dsup);

    ExponentKind kind_;
    std::string name_;
    Fn eval_;
    Fn deriv_;
    double pminus_;
    double pplus_;
    double delta_;
    double dsup_;
};

// Validated construction from a selection string:
//   "p1" | "p2" | "p3" | "const:<c>" (also "constant(<c>)")
// Throws InvalidArgument for unknown names and HypothesisViolation when a
// constant lies outside [1/2, 1].
ExponentFunction make_builtin(std::string_view name);

// Same grammar as make_builtin but without the range check on constants, so
// that out-of-range functions can still be fed to validate_hypotheses.
ExponentFunction parse_exponent(std::string_view spec);

// p(x) for finite x >= 0. Throws DomainError otherwise.
double eval_p(const ExponentFunction& fn, double x);

// p'(x) for finite x >= 0 (x = 0 returns the right-hand derivative).
double eval_dp(const ExponentFunction& fn, double x);

struct HypothesisGrid {
    double x_min = 1e-12;
    double x_max = 1e12;
    int points = 10000;            // log-spaced over [x_min, x_max]
    int near_zero_points = 2000;   // dense samples over (0, delta)
    int band_n = 10;               // band [1/n, n] for the second sup |p'|
    double tol = 1e-12;
};

enum class HypothesisClause { None, LowerBound, UpperBound, DerivativeNearZero };

std::string_view to_string(HypothesisClause clause);

struct HypothesisReport {
    double observed_inf = 0.0;
    double observed_sup = 0.0;
    double observed_dsup_near_zero = 0.0;  // sup |p'| on (0, delta)
    double observed_dsup_band = 0.0;       // sup |p'| on [1/n, n]
    double p_at_zero_plus = 0.0;           // p(x_min)
    HypothesisGrid grid;
    double delta = 0.0;
    int evaluated_points = 0;
    bool pass = false;
    HypothesisClause failing_clause = HypothesisClause::None;
};

// Numerical check of 1/2 <= inf p, sup p <= 1 and sup_{0<x<delta} |p'| < inf
// on a finite grid. inf/sup are grid approximations; the report carries the
// grid bounds. A non-finite p' on [0, delta) fails the derivative clause.
// Throws InvalidArgument on an empty or malformed grid and NumericError when
// p, or p' on the band, is non-finite at a grid point.
HypothesisReport validate_hypotheses(const ExponentFunction& fn,
                                     const HypothesisGrid& grid = {});

}  // namespace varexp
