#include "model.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "errors.hpp"

namespace varexp {

void ModelParams::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(kappa) || !positive(theta) || !positive(xi) || !positive(v0)) {
        throw InvalidArgument("model parameters kappa, theta, xi, v0 must be finite and > 0");
    }
}

Model::Model(ModelKind kind, const ModelParams& params, ExponentFunction exponent, int a)
    : kind_(kind), params_(params), exponent_(std::move(exponent)), a_(a) {
    params_.validate();
}

Model Model::gm(const ModelParams& params, ExponentFunction exponent) {
    return {ModelKind::GM, params, std::move(exponent), 0};
}

Model Model::cir(const ModelParams& params) {
    return {ModelKind::CIR, params, ExponentFunction::constant(0.5), 0};
}

Model Model::pkm(const ModelParams& params, int a, double b) {
    if (a != 0 && a != 1) throw InvalidArgument("pkm drift power a must be 0 or 1");
    if (b != 0.5 && b != 1.0 && b != 1.5) {
        throw InvalidArgument("pkm diffusion power b must be 0.5, 1 or 1.5");
    }
    return {ModelKind::PKM, params, ExponentFunction::constant(b), a};
}

std::string Model::id() const {
    switch (kind_) {
        case ModelKind::GM: return "gm:" + exponent_.name();
        case ModelKind::CIR: return "cir";
        case ModelKind::PKM: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "pkm:a=%d,b=%g", a_, *exponent_.constant_value());
            return buf;
        }
    }
    return "unknown";
}

double Model::g(double x) const {
    if (x == 0.0) return 0.0;
    return params_.xi * std::pow(x, exponent_.value(x));
}

Model parse_model(std::string_view spec, const ModelParams& params) {
    if (spec == "cir") return Model::cir(params);
    if (spec.starts_with("gm:")) return Model::gm(params, make_builtin(spec.substr(3)));
    if (spec.starts_with("pkm:")) {
        int a = -1;
        double b = -1.0;
        const std::string body(spec.substr(4));
        char tail = 0;
        if (std::sscanf(body.c_str(), "a=%d,b=%lf%c", &a, &b, &tail) != 2) {
            throw InvalidArgument("invalid pkm spec '" + std::string(spec) +
                                  "' (expected pkm:a=<0|1>,b=<0.5|1|1.5>)");
        }
        return Model::pkm(params, a, b);
    }
    throw InvalidArgument("unknown model '" + std::string(spec) +
                          "' (expected gm:<exponent>, cir or pkm:a=..,b=..)");
}

namespace {

void check_state(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": state is not finite");
    if (x < 0.0) throw DomainError(std::string(what) + ": state is negative");
}

}  // namespace

double drift(const Model& model, double x) {
    check_state(x, "drift");
    return model.f(x);
}

double diffusion(const Model& model, double x) {
    check_state(x, "diffusion");
    return model.g(x);
}

double growth_constant(const Model& model) {
    if (model.kind() == ModelKind::PKM &&
        (model.drift_power() != 0 || *model.exponent().constant_value() > 1.0)) {
        throw InvalidArgument("growth constant undefined: " + model.id() +
                              " has super-linear coefficients");
    }
    const auto& p = model.params();
    return std::max(2.0 * p.kappa * p.kappa * std::max(p.theta * p.theta, 1.0),
                    p.xi * p.xi);
}

double feller_function(const Model& model, double x) {
    if (!std::isfinite(x) || x <= 0.0) {
        throw DomainError("feller_function: x must be finite and > 0");
    }
    const auto& e = model.exponent();
    const double xi = model.params().xi;
    const double p = e.value(x);
    const double dp = e.derivative(x);
    const double dp_term = dp == 0.0 ? 0.0 : dp * std::log(x);
    return model.f(x) - xi * xi * std::pow(x, 2.0 * p) * (dp_term + p / x);
}

std::string_view to_string(FellerCriterion c) {
    switch (c) {
        case FellerCriterion::ConstantHalf: return "constant_half";
        case FellerCriterion::P0AboveHalf: return "p0_above_half";
        case FellerCriterion::P0EqualHalf: return "p0_equal_half";
        case FellerCriterion::P0BelowHalf: return "p0_below_half";
    }
    return "unknown";
}

std::string_view to_string(FellerVerdict v) {
    switch (v) {
        case FellerVerdict::NonAttainable: return "non-attainable";
        case FellerVerdict::Attainable: return "attainable";
        case FellerVerdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

FellerReport feller_check(const Model& model, const FellerGrid& grid) {
    FellerReport report;
    const auto& params = model.params();
    const auto& e = model.exponent();
    const double xi2 = params.xi * params.xi;

    report.classical_lhs = 2.0 * params.kappa * params.theta;
    report.classical_rhs = xi2;

    try {
        report.p_at_zero = e.value(grid.p0_probe);
        const double f0 = model.f(0.0);
        const auto c = e.constant_value();
        if (c && *c == 0.5 && model.drift_power() == 0) {
            report.criterion = FellerCriterion::ConstantHalf;
            report.analytic_limit = f0 - 0.5 * xi2;
        } else if (std::abs(report.p_at_zero - 0.5) <= grid.half_tol) {
            report.criterion = FellerCriterion::P0EqualHalf;
            report.analytic_limit = f0 - 0.5 * xi2;
        } else if (report.p_at_zero > 0.5) {
            report.criterion = FellerCriterion::P0AboveHalf;
            report.analytic_limit = f0;
        } else {
            report.criterion = FellerCriterion::P0BelowHalf;
            report.analytic_limit = -std::numeric_limits<double>::infinity();
        }

        const double hi = e.delta();
        const double a = std::log(grid.x_lo);
        const double b = std::log(hi);
        report.profile.reserve(static_cast<std::size_t>(grid.points));
        for (int i = 0; i < grid.points; ++i) {
            const double x = grid.points == 1 ? grid.x_lo
                                              : std::exp(a + (b - a) * i / (grid.points - 1));
            const double t = feller_function(model, x);
            if (!std::isfinite(t)) return report;  // inconclusive
            report.profile.push_back({x, t});
        }
    } catch (const std::exception&) {
        report.verdict = FellerVerdict::Inconclusive;
        return report;
    }

    if (report.criterion == FellerCriterion::ConstantHalf) {
        report.classical_applies = true;
        report.profile_consistent = true;
        report.verdict = report.classical_lhs >= report.classical_rhs
                             ? FellerVerdict::NonAttainable
                             : FellerVerdict::Attainable;
        return report;
    }

    // Sign contradiction between the analytic limit and the profile close to 0.
    const double limit = report.analytic_limit;
    const double tol = 1e-12 * (1.0 + std::abs(model.f(0.0)) + xi2);
    bool consistent = true;
    for (const auto& pt : report.profile) {
        if (pt.x >= grid.consistency_below) break;
        if ((limit > 0.0 && pt.value < -tol) || (limit < 0.0 && pt.value > tol)) {
            consistent = false;
            break;
        }
    }
    report.profile_consistent = consistent;
    if (!consistent) {
        report.verdict = FellerVerdict::Inconclusive;
    } else {
        report.verdict = limit >= 0.0 ? FellerVerdict::NonAttainable : FellerVerdict::Attainable;
    }
    return report;
}

double generator_apply(const Model& model, double x, double h1, double h2) {
    if (!std::isfinite(x) || x <= 0.0) {
        throw DomainError("generator_apply: x must be finite and > 0");
    }
    const double g = model.g(x);
    return 0.5 * g * g * h2 + model.f(x) * h1;
}

}  // namespace varexp
