#pragma once

#include <cstdint>

#include "model.hpp"

namespace varexp {

// Band index n and gap width epsilon, 0 < epsilon < 1/n^2 and
// 1/n + epsilon < n - epsilon.
struct TruncationParams {
    int n = 10;
    double epsilon = 0.0;

    // epsilon = 1 / (2 n^2).
    static TruncationParams with_default_epsilon(int n);
    // Throws InvalidArgument when the bands collapse or epsilon is out of range.
    void validate() const;
};

// theta_n(r):
//   1/n                     on [0, 1/n]
//   a + eps (2s^2 - s^3)    on (1/n, 1/n + eps),  s = (r - 1/n) / eps
//   r                       on [1/n + eps, n - eps]
//   b + eps (s + s^2 - s^3) on (n - eps, n),      s = (r - (n - eps)) / eps
//   n                       on [n, inf)
// The gap pieces are cubic Hermite bridges matching value and slope at both
// ends, so theta_n is C^1, nondecreasing, with max slope 4/3.
double theta_n(const TruncationParams& tp, double r);
double theta_n_derivative(const TruncationParams& tp, double r);

// theta_n(|x|) sgn(x), with rho_n(0) = 0.
double rho_n(const TruncationParams& tp, double x);

// f_n(x) = kappa (theta - rho_n(x)) on all of R.
double truncated_drift(const TruncationParams& tp, const Model& model, double x);
// g_n(x) = xi rho_n(x)^{p(rho_n(x))} for x >= 0. Negative x is a DomainError.
double truncated_diffusion(const TruncationParams& tp, const Model& model, double x);

struct LipschitzReport {
    TruncationParams tp;
    double phi_prime_sup = 0.0;   // sup |phi_n'| with phi_n(r) = theta_n(r) / r on [1/n, n]
    double p_prime_sup = 0.0;     // sup |p'| on [1/n, n]
    double p_plus = 0.0;
    double L_n = 0.0;             // 1 + n sup |phi_n'|
    double C_n = 0.0;             // n^{p+} (n p+ + sup|p'| ln n)
    double Lf_n = 0.0;            // kappa L_n
    double Lg_n = 0.0;            // xi L_n C_n
    double Lhat_n = 0.0;          // max(Lf_n^2, Lg_n^2)
    double empirical_sup_quotient = 0.0;    // max |g_n(x)-g_n(y)| / |x-y|
    double empirical_sup_quotient_f = 0.0;  // same for f_n
    int sampled_pairs = 0;
};

// Closed-form constants plus an empirical sup of the difference quotients
// over random pairs drawn uniformly from [1/n, n]. Only GM/CIR models.
LipschitzReport lipschitz_constants(const TruncationParams& tp, const Model& model,
                                    int pairs = 10000, std::uint64_t seed = 20240601);

}  // namespace varexp
