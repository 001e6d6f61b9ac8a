#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "exponent.hpp"

namespace varexp {

// kappa: mean-reversion speed, theta: long-run level, xi: volatility scale,
// v0: initial state. All strictly positive and finite.
struct ModelParams {
    double kappa = 2.0;
    double theta = 0.05;
    double xi = 0.3;
    double v0 = 0.05;

    // Throws InvalidArgument when any field is non-positive or non-finite.
    void validate() const;
};

enum class ModelKind { GM, CIR, PKM };

// dv = kappa v^a (theta - v) dt + xi v^q dW with
//   GM : a = 0, q = p(v)
//   CIR: a = 0, q = 1/2
//   PKM: a in {0, 1}, q = b in {1/2, 1, 3/2}
class Model {
public:
    static Model gm(const ModelParams& params, ExponentFunction exponent);
    static Model cir(const ModelParams& params);
    static Model pkm(const ModelParams& params, int a, double b);

    ModelKind kind() const { return kind_; }
    const ModelParams& params() const { return params_; }
    // CIR carries const 1/2 and PKM carries const b.
    const ExponentFunction& exponent() const { return exponent_; }
    int drift_power() const { return a_; }
    // "gm:p1", "cir", "pkm:a=1,b=0.5", ...
    std::string id() const;

    // Coefficients without domain checks; x must already be finite and >= 0.
    double f(double x) const {
        const double base = params_.kappa * (params_.theta - x);
        return a_ == 0 ? base : x * base;
    }
    double g(double x) const;

private:
    Model(ModelKind kind, const ModelParams& params, ExponentFunction exponent, int a);

    ModelKind kind_;
    ModelParams params_;
    ExponentFunction exponent_;
    int a_;
};

// Grammar: "gm:<exponent-spec>" | "cir" | "pkm:a=<0|1>,b=<0.5|1|1.5>".
Model parse_model(std::string_view spec, const ModelParams& params);

double drift(const Model& model, double x);
// xi x^{p(x)} with 0^p := 0. Negative x is a DomainError; clamp first.
double diffusion(const Model& model, double x);

// K with |f(x)|^2 v |g(x)|^2 <= K (1 + x^2) for x >= 0:
//   K = max(2 kappa^2 max(theta^2, 1), xi^2).
// Throws InvalidArgument for PKM shapes without linear growth (a = 1 or b = 3/2).
double growth_constant(const Model& model);

// T_p(x) = f(x) - (1/2) d(g^2)/dx
//        = f(x) - xi^2 x^{2p(x)} (p'(x) ln x + p(x) / x),  x > 0.
double feller_function(const Model& model, double x);

enum class FellerCriterion { ConstantHalf, P0AboveHalf, P0EqualHalf, P0BelowHalf };
enum class FellerVerdict { NonAttainable, Attainable, Inconclusive };

std::string_view to_string(FellerCriterion c);
std::string_view to_string(FellerVerdict v);

struct FellerGrid {
    double x_lo = 1e-10;
    int points = 200;               // log grid from x_lo to the exponent's delta
    double consistency_below = 1e-6;
    double half_tol = 1e-9;         // |p(0+) - 1/2| below this counts as 1/2
    double p0_probe = 1e-12;        // p(0+) is estimated at this x
};

struct FellerPoint {
    double x;
    double value;
};

struct FellerReport {
    double analytic_limit = 0.0;
    double p_at_zero = 0.0;
    std::vector<FellerPoint> profile;
    FellerCriterion criterion = FellerCriterion::P0AboveHalf;
    FellerVerdict verdict = FellerVerdict::Inconclusive;
    bool profile_consistent = false;
    // Classical form 2 kappa theta >= xi^2, filled for ConstantHalf.
    bool classical_applies = false;
    double classical_lhs = 0.0;
    double classical_rhs = 0.0;
};

// Boundary classification at 0 from the limit of T_p. When p(0+) > 1/2 the
// limit is f(0+); when p(0+) = 1/2 the diffusion term contributes -xi^2/2.
// Never throws on evaluation failures; those give an Inconclusive verdict.
FellerReport feller_check(const Model& model, const FellerGrid& grid = {});

// (A h)(x) = 1/2 g(x)^2 h''(x) + f(x) h'(x), with h1 = h'(x), h2 = h''(x).
double generator_apply(const Model& model, double x, double h1, double h2);

}  // namespace varexp
