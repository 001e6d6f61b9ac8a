#include "analysis.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace varexp {

namespace {

// Welford accumulation; exact for constant samples.
struct Accumulator {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double std_error() const {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
    }
};

double power(double x, int m) {
    double r = 1.0;
    for (int i = 0; i < m; ++i) r *= x;
    return r;
}

}  // namespace

MomentEstimate empirical_moment(const PathBatch& batch, double t, int m) {
    if (m < 1) throw InvalidArgument("empirical_moment: order must be >= 1");
    if (batch.m_paths() == 0) throw InvalidArgument("empirical_moment: empty batch");
    const auto idx = static_cast<std::size_t>(batch.grid().index_of(t));
    Accumulator acc;
    for (std::size_t j = 0; j < batch.m_paths(); ++j) acc.add(power(batch.at(j, idx), m));
    return {acc.mean, acc.std_error()};
}

MomentBound moment_bound(const ModelParams& params, int m, double t) {
    if (m < 2) throw InvalidArgument("moment bound requires order m >= 2");
    if (!std::isfinite(t) || t < 0.0) throw InvalidArgument("moment bound requires t >= 0");
    const double mm = m;
    MomentBound out;
    out.C_m = mm * params.kappa * (params.theta + 1.0) +
              0.5 * params.xi * params.xi * mm * (mm - 1.0);
    out.bound = std::pow(2.0, mm - 1.0) * (1.0 + std::pow(params.v0, mm)) * std::exp(out.C_m * t);
    return out;
}

std::vector<MomentReport> check_moment_bounds(const PathBatch& batch,
                                              const ModelParams& params,
                                              std::span<const int> orders,
                                              std::span<const double> checkpoints) {
    std::vector<MomentReport> out;
    for (int m : orders) {
        if (m < 2) throw InvalidArgument("moment bound requires order m >= 2");
        for (double t : checkpoints) {
            const auto est = empirical_moment(batch, t, m);
            const auto b = moment_bound(params, m, t);
            out.push_back({m, t, est.mean, est.std_error, b.bound, b.C_m, est.mean <= b.bound});
        }
    }
    return out;
}

double second_moment_bound(const Model& model, const TimeGrid& grid) {
    const double K = growth_constant(model);
    const double v0 = model.params().v0;
    const double T = grid.horizon;
    return (1.0 + 3.0 * v0 * v0) * std::exp(3.0 * K * T * (T + 4.0));
}

std::vector<double> martingale_statistic(const Model& model, const TimeGrid& grid,
                                         std::span<const double> values) {
    std::vector<double> mh(values.size());
    double integral = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        mh[j] = values[j] - integral;
        integral += model.f(values[j]) * grid.dt;
    }
    return mh;
}

MartingaleReport martingale_report(const PathBatch& batch, const Model& model,
                                   std::span<const double> checkpoints) {
    if (checkpoints.empty()) throw InvalidArgument("martingale_report: no checkpoints");
    const TimeGrid& grid = batch.grid();
    std::vector<std::size_t> idx;
    for (double t : checkpoints) idx.push_back(static_cast<std::size_t>(grid.index_of(t)));
    const std::size_t last = *std::max_element(idx.begin(), idx.end());

    std::vector<Accumulator> acc(idx.size());
    std::vector<double> mh(last + 1);
    for (std::size_t p = 0; p < batch.m_paths(); ++p) {
        double integral = 0.0;
        for (std::size_t j = 0; j <= last; ++j) {
            const double v = batch.at(p, j);
            mh[j] = v - integral;
            integral += model.f(v) * grid.dt;
        }
        for (std::size_t c = 0; c < idx.size(); ++c) acc[c].add(mh[idx[c]]);
    }

    const auto& params = model.params();
    MartingaleReport r;
    r.checkpoints.assign(checkpoints.begin(), checkpoints.end());
    r.bias_allowance = params.kappa * (params.theta + params.v0) * grid.dt;
    r.satisfied = true;
    for (const auto& a : acc) {
        r.mh_means.push_back(a.mean);
        r.mh_stderrs.push_back(a.std_error());
        const double drift = std::abs(a.mean - params.v0);
        r.max_abs_drift = std::max(r.max_abs_drift, drift);
        if (drift > 4.0 * a.std_error() + r.bias_allowance) r.satisfied = false;
    }
    return r;
}

Histogram terminal_histogram(const PathBatch& batch, double t, int n_bins) {
    if (n_bins < 1) throw InvalidArgument("terminal_histogram: n_bins must be >= 1");
    if (batch.m_paths() == 0) throw InvalidArgument("terminal_histogram: empty batch");
    const auto idx = static_cast<std::size_t>(batch.grid().index_of(t));
    double lo = batch.at(0, idx);
    double hi = lo;
    for (std::size_t j = 1; j < batch.m_paths(); ++j) {
        lo = std::min(lo, batch.at(j, idx));
        hi = std::max(hi, batch.at(j, idx));
    }

    Histogram h;
    const auto total = static_cast<double>(batch.m_paths());
    if (lo == hi) {
        const double w = std::ldexp(std::max(1.0, std::abs(lo)), -40);
        h.degenerate = true;
        h.bin_edges = {lo - 0.5 * w, lo + 0.5 * w};
        h.counts = {static_cast<long long>(batch.m_paths())};
        h.densities = {1.0 / w};
        return h;
    }
    const double width = (hi - lo) / n_bins;
    h.bin_edges.resize(static_cast<std::size_t>(n_bins) + 1);
    for (int b = 0; b <= n_bins; ++b) h.bin_edges[b] = lo + width * b;
    h.bin_edges.back() = hi;
    h.counts.assign(static_cast<std::size_t>(n_bins), 0);
    for (std::size_t j = 0; j < batch.m_paths(); ++j) {
        const double v = batch.at(j, idx);
        auto b = static_cast<int>((v - lo) / width);
        b = std::clamp(b, 0, n_bins - 1);
        // Guard against rounding putting v on the wrong side of an edge.
        while (b > 0 && v < h.bin_edges[b]) --b;
        while (b < n_bins - 1 && v >= h.bin_edges[b + 1]) ++b;
        ++h.counts[b];
    }
    h.densities.resize(h.counts.size());
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        const double w = h.bin_edges[b + 1] - h.bin_edges[b];
        h.densities[b] = static_cast<double>(h.counts[b]) / (total * w);
    }
    return h;
}

bool jensen_holds(const PathBatch& batch, double t) {
    const auto m1 = empirical_moment(batch, t, 1);
    const auto m2 = empirical_moment(batch, t, 2);
    return m2.mean >= m1.mean * m1.mean * (1.0 - 1e-12);
}

std::vector<double> default_checkpoints(const TimeGrid& grid) {
    std::vector<double> out;
    for (int q = 1; q <= 4; ++q) {
        const int j = static_cast<int>(std::lround(grid.n_steps * q / 4.0));
        out.push_back(grid.time(j));
    }
    return out;
}

}  // namespace varexp
