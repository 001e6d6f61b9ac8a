#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"
#include "stochastic.hpp"
#include "truncation.hpp"

namespace varexp {

enum class PositivityPolicy {
    // Coefficients at max(v, 0); stored state clamped at 0.
    FullTruncation,
    // v_{j+1} <- |v_{j+1}|.
    Reflection,
};

std::string_view to_string(PositivityPolicy policy);
// "full-trunc" | "reflect"
PositivityPolicy parse_policy(std::string_view text);

struct Path {
    TimeGrid grid;
    std::vector<double> values;  // n_steps + 1 states, values[0] = v0
    // Steps whose raw update was negative (clamped or reflected).
    int clamp_count = 0;
};

// One Euler-Maruyama path driven by `increments` (length n_steps):
//   v_{j+1} = v_j + f(v_j+) dt + g(v_j+) dW_j
// followed by the policy's positivity fix. Throws NumericError naming the
// step index if the state becomes non-finite.
Path euler_maruyama(const Model& model, const TimeGrid& grid,
                    std::span<const double> increments,
                    PositivityPolicy policy = PositivityPolicy::FullTruncation);

struct ClampStats {
    long long total_clamps = 0;
    long long paths_with_clamps = 0;
    double clamp_fraction = 0.0;  // total_clamps / (m_paths n_steps)
};

// Row-major [m_paths x (n_steps + 1)] states plus per-path clamp counts.
class PathBatch {
public:
    PathBatch(std::string model_id, TimeGrid grid, std::size_t m_paths,
              std::vector<double> values, std::vector<int> clamp_counts);

    const std::string& model_id() const { return model_id_; }
    const TimeGrid& grid() const { return grid_; }
    std::size_t m_paths() const { return m_paths_; }
    std::size_t width() const { return static_cast<std::size_t>(grid_.n_steps) + 1; }
    std::span<const double> path(std::size_t j) const;
    double at(std::size_t path, std::size_t step) const { return values_[path * width() + step]; }
    std::span<const double> data() const { return values_; }
    const std::vector<int>& clamp_counts() const { return clamp_counts_; }
    ClampStats clamp_stats() const;

private:
    std::string model_id_;
    TimeGrid grid_;
    std::size_t m_paths_;
    std::vector<double> values_;
    std::vector<int> clamp_counts_;
};

// Every row of `batch` through euler_maruyama. Paths are independent, so the
// output is the same for any thread count; errors are rethrown for the
// lowest failing path index.
PathBatch simulate_batch(const Model& model, const BrownianBatch& batch,
                         PositivityPolicy policy = PositivityPolicy::FullTruncation,
                         int threads = 1);

// Euler on the truncated coefficients F(x) = f_n(x+), G(x) = g_n(x+), with no
// clamping of the stored state. This is the exact fixed point of the
// discrete Picard map below. clamp_count counts negative states.
Path euler_truncated(const TruncationParams& tp, const Model& model, const TimeGrid& grid,
                     std::span<const double> increments);

struct PicardReport {
    int iterations_used = 0;
    // d_k = max_j |v^(k+1)(t_j) - v^(k)(t_j)|, k = 0, 1, ...
    std::vector<double> sup_diffs;
    bool converged = false;
    Path fixed_point;  // last iterate
    // M from a least-squares fit of log d_k + log k! = k log(M T) + c.
    // Diagnostic only; 0 when fewer than two positive d_k exist.
    double rate_envelope_constant = 0.0;
};

// Discrete Picard iteration from v^(0) = v0 with left-point sums
//   v^(k+1)(t_j) = v0 + sum_{i<j} F(v^(k)(t_i)) dt + G(v^(k)(t_i)) dW_i
// until d_k <= tol or k_max iterations. Non-convergence is reported, not thrown.
PicardReport picard_solve(const TruncationParams& tp, const Model& model,
                          const TimeGrid& grid, std::span<const double> increments,
                          double tol, int k_max);

// First j with values[j] outside [1/n, n]; nullopt if the path stays inside.
std::optional<std::size_t> band_exit_index(std::span<const double> values, int n);
inline std::optional<std::size_t> band_exit_index(const Path& path, int n) {
    return band_exit_index(path.values, n);
}

}  // namespace varexp
