#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "pomdpnac/errors.hpp"

namespace pomdpnac {

/// 64-bit mix used to derive independent stream seeds from (seed, stream id).
/// The same (seed, stream) pair always yields the same generator state, which
/// is what makes seed sweeps and parallel/serial runs bit-reproducible.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// A seeded random stream plus the sampling primitives the toolkit needs.
/// Streams are identified by (seed, stream index); derive one per logical
/// sampling task so concurrent tasks never share generator state.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : gen_(splitmix64(splitmix64(seed) ^ splitmix64(0x5851f42d4c957f2dULL + stream))) {}

    std::mt19937_64& engine() { return gen_; }

    /// Uniform double in [0, 1).
    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
    }

    /// Uniform integer in {0, ..., n-1}.
    int uniform_int(int n) {
        return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(gen_));
    }

    /// Draw an index from an unnormalized nonnegative weight vector by CDF
    /// inversion. Weights are scanned in order, so results are reproducible.
    int discrete(const double* w, int n) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += w[i];
        double u = uniform() * total;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += w[i];
            if (u < acc) return i;
        }
        // Fall through only on rounding at the right edge: return last index
        // with positive weight.
        for (int i = n - 1; i >= 0; --i)
            if (w[i] > 0.0) return i;
        return n - 1;
    }

    int discrete(const std::vector<double>& w) { return discrete(w.data(), static_cast<int>(w.size())); }

    /// Geometric horizon with success probability (1-gamma): P(k) ∝ gamma^k,
    /// conditioned on k <= k_max (the cap removes an <= 1e-12 tail).
    int geometric_horizon(double gamma, int k_max) {
        if (gamma <= 0.0) return 0;
        // P(k <= k_max) = 1 - gamma^(k_max+1); invert the conditioned CDF.
        const double mass = 1.0 - std::pow(gamma, static_cast<double>(k_max) + 1.0);
        const double u = uniform() * mass;
        int k = static_cast<int>(std::floor(std::log1p(-u) / std::log(gamma)));
        if (k < 0) k = 0;
        if (k > k_max) k = k_max;
        return k;
    }

    /// One row of a flat Dirichlet (uniform on the simplex): normalized
    /// exponential draws.
    std::vector<double> dirichlet_flat(int n) {
        std::exponential_distribution<double> e(1.0);
        std::vector<double> row(static_cast<std::size_t>(n));
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            row[static_cast<std::size_t>(i)] = e(gen_);
            total += row[static_cast<std::size_t>(i)];
        }
        for (auto& v : row) v /= total;
        return row;
    }

private:
    std::mt19937_64 gen_;
};

/// Cap for geometric horizons: smallest K with gamma^(K+1) <= 1e-12, so the
/// conditioning bias of the capped sampler is at most 1e-12.
inline int geometric_cap(double gamma) {
    if (gamma <= 0.0) return 0;
    return static_cast<int>(std::ceil(std::log(1e-12) / std::log(gamma)));
}

}  // namespace pomdpnac
