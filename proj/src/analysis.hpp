#pragma once

#include <span>
#include <vector>

#include "model.hpp"
#include "solver.hpp"

namespace varexp {

struct MomentEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // sample std (n - 1 denominator) / sqrt(n)
};

// Sample mean of v(t)^m over the batch, accumulated in path order.
MomentEstimate empirical_moment(const PathBatch& batch, double t, int m);

struct MomentBound {
    double C_m = 0.0;
    double bound = 0.0;
};

// C_m = m kappa (theta + 1) + (xi^2 / 2) m (m - 1)
// bound = 2^{m-1} (1 + v0^m) exp(C_m t), for m >= 2 and t >= 0.
MomentBound moment_bound(const ModelParams& params, int m, double t);

struct MomentReport {
    int order = 0;
    double t = 0.0;
    double empirical = 0.0;
    double std_error = 0.0;
    double theoretical_bound = 0.0;
    double C_m = 0.0;
    bool satisfied = false;  // empirical <= theoretical_bound, no tolerance
};

std::vector<MomentReport> check_moment_bounds(const PathBatch& batch,
                                              const ModelParams& params,
                                              std::span<const int> orders,
                                              std::span<const double> checkpoints);

// (1 + 3 v0^2) exp(3 K T (T + 4)) with K from growth_constant: ceiling for
// E sup_t |v(t)|^2 under a deterministic initial state.
double second_moment_bound(const Model& model, const TimeGrid& grid);

// M_h(t_j) = v(t_j) - sum_{i<j} f(v(t_i)) dt at every node of one path.
std::vector<double> martingale_statistic(const Model& model, const TimeGrid& grid,
                                         std::span<const double> values);

struct MartingaleReport {
    std::vector<double> checkpoints;
    std::vector<double> mh_means;
    std::vector<double> mh_stderrs;
    double max_abs_drift = 0.0;    // max_j |mean_j - v0|
    double bias_allowance = 0.0;   // kappa (theta + v0) dt
    bool satisfied = false;        // |mean_j - v0| <= 4 stderr_j + bias_allowance for all j
};

MartingaleReport martingale_report(const PathBatch& batch, const Model& model,
                                   std::span<const double> checkpoints);

struct Histogram {
    std::vector<double> bin_edges;     // size bins + 1
    std::vector<long long> counts;
    std::vector<double> densities;     // counts / (total width)
    bool degenerate = false;
};

// Equal-width bins over [min, max] of v(t). If every value is identical the
// result is one bin of width 2^-40 max(1, |v|) centred on the value.
Histogram terminal_histogram(const PathBatch& batch, double t, int n_bins);

// E[v(t)^2] >= (E v(t))^2 on the sample, up to rounding.
bool jensen_holds(const PathBatch& batch, double t);

// {T/4, T/2, 3T/4, T} snapped to grid nodes.
std::vector<double> default_checkpoints(const TimeGrid& grid);

}  // namespace varexp
