#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace varexp {

struct TimeGrid {
    double horizon = 1.0;
    double dt = 0.001;
    int n_steps = 1000;

    double time(int j) const { return j * dt; }
    // Index j with |j dt - t| <= 1e-9 max(1, t); throws InvalidArgument if t
    // is not a grid node.
    int index_of(double t) const;
};

// Throws InvalidArgument unless T > 0, dt > 0 and T/dt is within 1e-9 of an
// integer >= 1.
TimeGrid make_grid(double horizon, double dt);

// Largest batch (paths x steps) sample_batch will allocate: 2^29 doubles.
inline constexpr std::size_t kMaxBatchEntries = std::size_t{1} << 29;

// Raw 64 bits for (seed, path, step). Each path owns a SplitMix64 stream
// whose key is derived from (seed, path); the step indexes into it, so any
// entry can be produced without touching the others.
std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t path, std::uint64_t step);

// Standard normal by inverse CDF of the 53-bit uniform ((bits >> 11) + 1/2) 2^-53.
// The inverse CDF is boost::math::erfc_inv, accurate to a few ulp; the
// uniform resolution caps |z| at about 8.29.
double standard_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step);

// Writes the n_steps increments of one path (N(0, dt) each) into out.
void sample_row(std::uint64_t seed, std::uint64_t path, const TimeGrid& grid,
                std::span<double> out);

// Brownian increments for m paths, row-major [m_paths x n_steps]. Immutable.
class BrownianBatch {
public:
    BrownianBatch(std::uint64_t seed, std::size_t m_paths, TimeGrid grid,
                  std::vector<double> increments);

    std::uint64_t seed() const { return seed_; }
    std::size_t m_paths() const { return m_paths_; }
    const TimeGrid& grid() const { return grid_; }
    std::span<const double> row(std::size_t path) const;
    std::span<const double> data() const { return increments_; }
    // FNV-1a over the little-endian bytes of every increment.
    std::uint64_t checksum() const;

private:
    std::uint64_t seed_;
    std::size_t m_paths_;
    TimeGrid grid_;
    std::vector<double> increments_;
};

// Generation is split over `threads` workers by path; the result does not
// depend on the thread count.
BrownianBatch sample_batch(std::uint64_t seed, std::size_t m_paths, const TimeGrid& grid,
                           int threads = 1);

std::uint64_t checksum(std::span<const double> values);
std::string checksum_hex(std::uint64_t sum);

}  // namespace varexp
