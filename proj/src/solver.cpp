#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

#include "errors.hpp"

namespace varexp {

std::string_view to_string(PositivityPolicy policy) {
    return policy == PositivityPolicy::Reflection ? "reflect" : "full-trunc";
}

PositivityPolicy parse_policy(std::string_view text) {
    if (text == "full-trunc" || text == "full-truncation") return PositivityPolicy::FullTruncation;
    if (text == "reflect" || text == "reflection") return PositivityPolicy::Reflection;
    throw InvalidArgument("unknown policy '" + std::string(text) +
                          "' (expected full-trunc or reflect)");
}

namespace {

[[noreturn]] void non_finite(int step) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "state became non-finite at step %d", step);
    throw NumericError(buf);
}

void check_increments(const TimeGrid& grid, std::span<const double> increments) {
    if (increments.size() != static_cast<std::size_t>(grid.n_steps)) {
        throw InvalidArgument("increment row length must equal n_steps");
    }
}

// Shared by euler_maruyama and simulate_batch so both produce identical bits.
int integrate(const Model& model, const TimeGrid& grid, std::span<const double> dw,
              PositivityPolicy policy, std::span<double> out) {
    const double dt = grid.dt;
    double v = model.params().v0;
    out[0] = v;
    int clamps = 0;
    for (std::size_t j = 0; j < dw.size(); ++j) {
        const double x = std::max(v, 0.0);
        double next = v + model.f(x) * dt + model.g(x) * dw[j];
        if (!std::isfinite(next)) non_finite(static_cast<int>(j));
        if (next < 0.0) {
            ++clamps;
            next = policy == PositivityPolicy::FullTruncation ? 0.0 : -next;
        }
        v = next;
        out[j + 1] = v;
    }
    return clamps;
}

}  // namespace

Path euler_maruyama(const Model& model, const TimeGrid& grid,
                    std::span<const double> increments, PositivityPolicy policy) {
    check_increments(grid, increments);
    Path path{grid, std::vector<double>(increments.size() + 1), 0};
    path.clamp_count = integrate(model, grid, increments, policy, path.values);
    return path;
}

PathBatch::PathBatch(std::string model_id, TimeGrid grid, std::size_t m_paths,
                     std::vector<double> values, std::vector<int> clamp_counts)
    : model_id_(std::move(model_id)),
      grid_(grid),
      m_paths_(m_paths),
      values_(std::move(values)),
      clamp_counts_(std::move(clamp_counts)) {
    if (values_.size() != m_paths_ * width() || clamp_counts_.size() != m_paths_) {
        throw InvalidArgument("PathBatch: inconsistent dimensions");
    }
}

std::span<const double> PathBatch::path(std::size_t j) const {
    if (j >= m_paths_) throw InvalidArgument("PathBatch::path: index out of range");
    return std::span<const double>(values_).subspan(j * width(), width());
}

ClampStats PathBatch::clamp_stats() const {
    ClampStats s;
    for (int c : clamp_counts_) {
        s.total_clamps += c;
        s.paths_with_clamps += c > 0 ? 1 : 0;
    }
    const double steps = static_cast<double>(m_paths_) * grid_.n_steps;
    s.clamp_fraction = steps > 0 ? static_cast<double>(s.total_clamps) / steps : 0.0;
    return s;
}

PathBatch simulate_batch(const Model& model, const BrownianBatch& batch,
                         PositivityPolicy policy, int threads) {
    const TimeGrid& grid = batch.grid();
    const std::size_t m = batch.m_paths();
    const std::size_t width = static_cast<std::size_t>(grid.n_steps) + 1;
    std::vector<double> values(m * width);
    std::vector<int> clamps(m, 0);
    std::vector<std::exception_ptr> errors(m);

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            try {
                clamps[j] = integrate(model, grid, batch.row(j), policy,
                                      std::span<double>(values).subspan(j * width, width));
            } catch (...) {
                errors[j] = std::current_exception();
                return;
            }
        }
    };
    const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, 256));
    if (workers == 1 || m < 2) {
        work(0, m);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (m + workers - 1) / workers;
        for (std::size_t begin = 0; begin < m; begin += chunk) {
            pool.emplace_back(work, begin, std::min(m, begin + chunk));
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (!errors[j]) continue;
        try {
            std::rethrow_exception(errors[j]);
        } catch (const NumericError& e) {
            throw NumericError("path " + std::to_string(j) + ": " + e.what());
        }
    }
    return {model.id(), grid, m, std::move(values), std::move(clamps)};
}

namespace {

struct TruncatedCoefficients {
    const TruncationParams& tp;
    const Model& model;

    double drift(double x) const { return truncated_drift(tp, model, std::max(x, 0.0)); }
    double diffusion(double x) const { return truncated_diffusion(tp, model, std::max(x, 0.0)); }
};

}  // namespace

Path euler_truncated(const TruncationParams& tp, const Model& model, const TimeGrid& grid,
                     std::span<const double> increments) {
    tp.validate();
    check_increments(grid, increments);
    const TruncatedCoefficients c{tp, model};
    Path path{grid, std::vector<double>(increments.size() + 1), 0};
    double v = model.params().v0;
    path.values[0] = v;
    for (std::size_t j = 0; j < increments.size(); ++j) {
        v = v + c.drift(v) * grid.dt + c.diffusion(v) * increments[j];
        if (!std::isfinite(v)) non_finite(static_cast<int>(j));
        if (v < 0.0) ++path.clamp_count;
        path.values[j + 1] = v;
    }
    return path;
}

PicardReport picard_solve(const TruncationParams& tp, const Model& model,
                          const TimeGrid& grid, std::span<const double> increments,
                          double tol, int k_max) {
    tp.validate();
    check_increments(grid, increments);
    if (!(tol > 0.0)) throw InvalidArgument("picard_solve: tol must be > 0");
    if (k_max < 1) throw InvalidArgument("picard_solve: k_max must be >= 1");

    const TruncatedCoefficients c{tp, model};
    const double v0 = model.params().v0;
    const double dt = grid.dt;
    const std::size_t width = increments.size() + 1;
    std::vector<double> current(width, v0);
    std::vector<double> next(width);
    std::vector<double> drift_dt(width);
    std::vector<double> noise(width);

    PicardReport report;
    for (int k = 0; k < k_max; ++k) {
        next[0] = v0;
        double acc = v0;
        double diff = 0.0;
        for (std::size_t j = 0; j + 1 < width; ++j) {
            acc = acc + c.drift(current[j]) * dt + c.diffusion(current[j]) * increments[j];
            if (!std::isfinite(acc)) non_finite(static_cast<int>(j));
            next[j + 1] = acc;
            diff = std::max(diff, std::abs(acc - current[j + 1]));
        }
        report.sup_diffs.push_back(diff);
        report.iterations_used = k + 1;
        current.swap(next);
        if (diff <= tol) {
            report.converged = true;
            break;
        }
    }
    report.fixed_point = Path{grid, current, 0};
    for (double v : current) report.fixed_point.clamp_count += v < 0.0 ? 1 : 0;

    // Least squares of y_k = log d_k + lgamma(k + 1) against k.
    double sk = 0.0, sy = 0.0, skk = 0.0, sky = 0.0;
    int count = 0;
    for (std::size_t k = 0; k < report.sup_diffs.size(); ++k) {
        const double d = report.sup_diffs[k];
        if (!(d > 0.0)) continue;
        const double x = static_cast<double>(k);
        const double y = std::log(d) + std::lgamma(x + 1.0);
        sk += x;
        sy += y;
        skk += x * x;
        sky += x * y;
        ++count;
    }
    if (count >= 2) {
        const double denom = count * skk - sk * sk;
        if (denom > 0.0) {
            const double slope = (count * sky - sk * sy) / denom;
            report.rate_envelope_constant = std::exp(slope) / grid.horizon;
        }
    }
    return report;
}

std::optional<std::size_t> band_exit_index(std::span<const double> values, int n) {
    if (n < 1) throw InvalidArgument("band_exit_index: n must be >= 1");
    const double lo = 1.0 / n;
    const double hi = n;
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!(values[j] >= lo && values[j] <= hi)) return j;
    }
    return std::nullopt;
}

}  // namespace varexp
