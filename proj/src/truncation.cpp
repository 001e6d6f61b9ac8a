#include "truncation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "errors.hpp"

namespace varexp {

TruncationParams TruncationParams::with_default_epsilon(int n) {
    return {n, n > 0 ? 1.0 / (2.0 * n * static_cast<double>(n)) : 0.0};
}

void TruncationParams::validate() const {
    if (n < 1) throw InvalidArgument("truncation level n must be >= 1");
    const double nn = n;
    if (!(epsilon > 0.0) || !(epsilon < 1.0 / (nn * nn))) {
        throw InvalidArgument("truncation epsilon must satisfy 0 < epsilon < 1/n^2");
    }
    if (!(1.0 / nn + epsilon < nn - epsilon)) {
        throw InvalidArgument("truncation bands collapse: need 1/n + eps < n - eps");
    }
}

double theta_n(const TruncationParams& tp, double r) {
    if (!std::isfinite(r) || r < 0.0) throw DomainError("theta_n: r must be finite and >= 0");
    const double n = tp.n;
    const double eps = tp.epsilon;
    const double lo = 1.0 / n;
    const double hi = n - eps;
    if (r <= lo) return lo;
    if (r < lo + eps) {
        const double s = (r - lo) / eps;
        return lo + eps * s * s * (2.0 - s);
    }
    if (r <= hi) return r;
    if (r < n) {
        const double s = (r - hi) / eps;
        return hi + eps * s * (1.0 + s - s * s);
    }
    return n;
}

double theta_n_derivative(const TruncationParams& tp, double r) {
    if (!std::isfinite(r) || r < 0.0) {
        throw DomainError("theta_n_derivative: r must be finite and >= 0");
    }
    const double n = tp.n;
    const double eps = tp.epsilon;
    const double lo = 1.0 / n;
    const double hi = n - eps;
    if (r <= lo) return 0.0;
    if (r < lo + eps) {
        const double s = (r - lo) / eps;
        return s * (4.0 - 3.0 * s);
    }
    if (r <= hi) return 1.0;
    if (r < n) {
        const double s = (r - hi) / eps;
        return (1.0 - s) * (1.0 + 3.0 * s);
    }
    return 0.0;
}

double rho_n(const TruncationParams& tp, double x) {
    if (!std::isfinite(x)) throw DomainError("rho_n: x must be finite");
    if (x == 0.0) return 0.0;
    const double t = theta_n(tp, std::abs(x));
    return x > 0.0 ? t : -t;
}

namespace {

void require_gm(const Model& model) {
    if (model.kind() == ModelKind::PKM) {
        throw InvalidArgument("truncated coefficients are defined for GM/CIR models only");
    }
}

}  // namespace

double truncated_drift(const TruncationParams& tp, const Model& model, double x) {
    require_gm(model);
    const auto& p = model.params();
    return p.kappa * (p.theta - rho_n(tp, x));
}

double truncated_diffusion(const TruncationParams& tp, const Model& model, double x) {
    require_gm(model);
    if (!std::isfinite(x)) throw DomainError("truncated_diffusion: x must be finite");
    if (x < 0.0) throw DomainError("truncated_diffusion: negative state has no real power");
    return model.g(rho_n(tp, x));
}

LipschitzReport lipschitz_constants(const TruncationParams& tp, const Model& model,
                                    int pairs, std::uint64_t seed) {
    require_gm(model);
    tp.validate();
    if (pairs < 1) throw InvalidArgument("lipschitz_constants: pairs must be >= 1");

    LipschitzReport rep;
    rep.tp = tp;
    const double n = tp.n;
    const double lo = 1.0 / n;
    const double eps = tp.epsilon;
    const auto& exponent = model.exponent();
    const auto& params = model.params();

    // sup |phi_n'| with phi_n' = (theta_n'(r) r - theta_n(r)) / r^2 on a dense
    // grid of [1/n, n] refined inside both gaps.
    auto phi_prime = [&](double r) {
        return std::abs((theta_n_derivative(tp, r) * r - theta_n(tp, r)) / (r * r));
    };
    constexpr int kGrid = 10000;
    constexpr int kGap = 2000;
    double phi_sup = 0.0;
    for (int i = 0; i <= kGrid; ++i) {
        phi_sup = std::max(phi_sup, phi_prime(lo + (n - lo) * i / kGrid));
    }
    for (int i = 0; i <= kGap; ++i) {
        const double s = static_cast<double>(i) / kGap;
        phi_sup = std::max(phi_sup, phi_prime(lo + eps * s));
        phi_sup = std::max(phi_sup, phi_prime(n - eps + eps * s));
    }

    double dp_sup = 0.0;
    const double la = std::log(lo);
    const double lb = std::log(n);
    for (int i = 0; i <= kGrid; ++i) {
        const double x = std::exp(la + (lb - la) * i / kGrid);
        dp_sup = std::max(dp_sup, std::abs(exponent.derivative(x)));
    }

    rep.phi_prime_sup = phi_sup;
    rep.p_prime_sup = dp_sup;
    rep.p_plus = exponent.declared_pplus();
    rep.L_n = 1.0 + n * phi_sup;
    rep.C_n = std::pow(n, rep.p_plus) * (n * rep.p_plus + dp_sup * std::log(n));
    rep.Lf_n = params.kappa * rep.L_n;
    rep.Lg_n = params.xi * rep.L_n * rep.C_n;
    rep.Lhat_n = std::max(rep.Lf_n * rep.Lf_n, rep.Lg_n * rep.Lg_n);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(lo, n);
    double qf = 0.0;
    double qg = 0.0;
    int used = 0;
    for (int i = 0; i < pairs; ++i) {
        const double x = unif(rng);
        const double y = unif(rng);
        if (x == y) continue;
        const double dx = std::abs(x - y);
        qf = std::max(qf, std::abs(truncated_drift(tp, model, x) -
                                   truncated_drift(tp, model, y)) / dx);
        qg = std::max(qg, std::abs(truncated_diffusion(tp, model, x) -
                                   truncated_diffusion(tp, model, y)) / dx);
        ++used;
    }
    rep.empirical_sup_quotient = qg;
    rep.empirical_sup_quotient_f = qf;
    rep.sampled_pairs = used;
    return rep;
}

}  // namespace varexp
