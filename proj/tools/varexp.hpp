// Thin RAII layer over the C API for the command-line tool.
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "varexp/varexp.h"

namespace vx {

class ApiError : public std::runtime_error {
public:
    ApiError(varexp_status status, const std::string& what)
        : std::runtime_error(what), status_(status) {}
    varexp_status status() const { return status_; }

private:
    varexp_status status_;
};

inline void check(varexp_status s) {
    if (s != VAREXP_OK) throw ApiError(s, varexp_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};

using ExponentPtr = std::unique_ptr<varexp_exponent, Deleter<varexp_exponent, varexp_exponent_free>>;
using ModelPtr = std::unique_ptr<varexp_model, Deleter<varexp_model, varexp_model_free>>;
using BrownianPtr = std::unique_ptr<varexp_brownian, Deleter<varexp_brownian, varexp_brownian_free>>;
using PathsPtr = std::unique_ptr<varexp_paths, Deleter<varexp_paths, varexp_paths_free>>;

inline ExponentPtr parse_exponent(const std::string& spec) {
    varexp_exponent* e = nullptr;
    check(varexp_exponent_parse(spec.c_str(), &e));
    return ExponentPtr(e);
}

class Model {
public:
    Model(const std::string& spec, const varexp_params& params) {
        varexp_model* m = nullptr;
        check(varexp_model_parse(spec.c_str(), &params, &m));
        ptr_.reset(m);
    }
    const varexp_model* get() const { return ptr_.get(); }
    std::string id() const {
        const char* s = nullptr;
        check(varexp_model_id(ptr_.get(), &s));
        return s;
    }

private:
    ModelPtr ptr_;
};

class Brownian {
public:
    Brownian(std::uint64_t seed, std::size_t m, double T, double dt, int threads) {
        varexp_brownian* b = nullptr;
        check(varexp_brownian_sample(seed, m, T, dt, threads, &b));
        ptr_.reset(b);
    }
    const varexp_brownian* get() const { return ptr_.get(); }
    std::size_t paths() const { return varexp_brownian_paths(ptr_.get()); }
    int steps() const { return varexp_brownian_steps(ptr_.get()); }
    std::uint64_t checksum() const { return varexp_brownian_checksum(ptr_.get()); }
    std::span<const double> row(std::size_t j) const {
        const double* r = nullptr;
        std::size_t len = 0;
        check(varexp_brownian_row(ptr_.get(), j, &r, &len));
        return {r, len};
    }

private:
    BrownianPtr ptr_;
};

class Paths {
public:
    Paths(const Model& model, const Brownian& batch, int policy, int threads) {
        varexp_paths* p = nullptr;
        check(varexp_simulate(model.get(), batch.get(), policy, threads, &p));
        ptr_.reset(p);
    }
    const varexp_paths* get() const { return ptr_.get(); }
    std::size_t count() const { return varexp_paths_count(ptr_.get()); }
    int steps() const { return varexp_paths_steps(ptr_.get()); }
    double dt() const { return varexp_paths_dt(ptr_.get()); }
    std::span<const double> row(std::size_t j) const {
        const double* r = nullptr;
        std::size_t len = 0;
        check(varexp_paths_row(ptr_.get(), j, &r, &len));
        return {r, len};
    }
    int clamp_count(std::size_t j) const {
        int c = 0;
        check(varexp_paths_clamp_count(ptr_.get(), j, &c));
        return c;
    }
    varexp_clamp_stats clamp_stats() const {
        varexp_clamp_stats s{};
        check(varexp_paths_clamp_stats(ptr_.get(), &s));
        return s;
    }

private:
    PathsPtr ptr_;
};

struct Histogram {
    std::vector<double> edges;
    std::vector<long long> counts;
    std::vector<double> densities;
};

inline Histogram terminal_histogram(const Paths& paths, double t, int bins) {
    Histogram h{std::vector<double>(bins + 1), std::vector<long long>(bins),
                std::vector<double>(bins)};
    int used = 0;
    check(varexp_terminal_histogram(paths.get(), t, bins, h.edges.data(), h.counts.data(),
                                    h.densities.data(), &used));
    h.edges.resize(used + 1);
    h.counts.resize(used);
    h.densities.resize(used);
    return h;
}

}  // namespace vx
