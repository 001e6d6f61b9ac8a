#include "stochastic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <thread>

#include <boost/math/special_functions/erf.hpp>

#include "errors.hpp"

namespace varexp {

int TimeGrid::index_of(double t) const {
    if (!std::isfinite(t) || t < 0.0) throw InvalidArgument("checkpoint must be finite and >= 0");
    const double r = std::round(t / dt);
    if (std::abs(r * dt - t) > 1e-9 * std::max(1.0, t) || r > n_steps) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "t = %.17g is not a node of the time grid", t);
        throw InvalidArgument(buf);
    }
    return static_cast<int>(r);
}

TimeGrid make_grid(double horizon, double dt) {
    if (!std::isfinite(horizon) || !std::isfinite(dt) || !(horizon > 0.0) || !(dt > 0.0)) {
        throw InvalidArgument("time grid needs finite T > 0 and dt > 0");
    }
    const double ratio = horizon / dt;
    const double steps = std::round(ratio);
    if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio) || steps < 1.0) {
        throw InvalidArgument("T/dt is not an integer number of steps");
    }
    if (steps > 1e9) throw InvalidArgument("time grid has too many steps");
    return {horizon, dt, static_cast<int>(steps)};
}

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path) {
    return mix64(seed + kGolden * (mix64(path + 0x632be59bd9b4e019ULL) | 1ULL));
}

inline double normal_from_bits(std::uint64_t bits) {
    const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    return -1.4142135623730950488 * boost::math::erfc_inv(2.0 * u);
}

}  // namespace

std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t path, std::uint64_t step) {
    return mix64(stream_key(seed, path) + kGolden * (step + 1));
}

double standard_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step) {
    return normal_from_bits(counter_bits(seed, path, step));
}

void sample_row(std::uint64_t seed, std::uint64_t path, const TimeGrid& grid,
                std::span<double> out) {
    if (out.size() != static_cast<std::size_t>(grid.n_steps)) {
        throw InvalidArgument("sample_row: output length must equal n_steps");
    }
    const double scale = std::sqrt(grid.dt);
    const std::uint64_t key = stream_key(seed, path);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = scale * normal_from_bits(mix64(key + kGolden * (i + 1)));
    }
}

BrownianBatch::BrownianBatch(std::uint64_t seed, std::size_t m_paths, TimeGrid grid,
                             std::vector<double> increments)
    : seed_(seed), m_paths_(m_paths), grid_(grid), increments_(std::move(increments)) {
    if (increments_.size() != m_paths_ * static_cast<std::size_t>(grid_.n_steps)) {
        throw InvalidArgument("BrownianBatch: increment matrix has the wrong size");
    }
}

std::span<const double> BrownianBatch::row(std::size_t path) const {
    if (path >= m_paths_) throw InvalidArgument("BrownianBatch::row: path index out of range");
    const auto n = static_cast<std::size_t>(grid_.n_steps);
    return std::span<const double>(increments_).subspan(path * n, n);
}

std::uint64_t BrownianBatch::checksum() const { return varexp::checksum(increments_); }

BrownianBatch sample_batch(std::uint64_t seed, std::size_t m_paths, const TimeGrid& grid,
                           int threads) {
    if (m_paths < 1) throw InvalidArgument("sample_batch: m_paths must be >= 1");
    const auto n = static_cast<std::size_t>(grid.n_steps);
    if (n == 0 || m_paths > kMaxBatchEntries / n) {
        throw ResourceError("sample_batch: batch exceeds 2^29 increments");
    }
    std::vector<double> data(m_paths * n);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            sample_row(seed, j, grid, std::span<double>(data).subspan(j * n, n));
        }
    };
    const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, 256));
    if (workers == 1 || m_paths < 2) {
        work(0, m_paths);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (m_paths + workers - 1) / workers;
        for (std::size_t begin = 0; begin < m_paths; begin += chunk) {
            pool.emplace_back(work, begin, std::min(m_paths, begin + chunk));
        }
    }
    return {seed, m_paths, grid, std::move(data)};
}

std::uint64_t checksum(std::span<const double> values) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : values) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

std::string checksum_hex(std::uint64_t sum) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(sum));
    return buf;
}

}  // namespace varexp
