#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace milo {

/// Deterministic random source. All sampling routines are implemented here
/// (instead of <random> distributions) so that identical seeds produce
/// identical streams regardless of standard-library version.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        // rejection sampling to avoid modulo bias
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<int>(x % un);
    }

    /// Standard normal via Box-Muller (no caching, so calls map to a fixed
    /// number of engine draws).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Gamma(shape, 1) via Marsaglia-Tsang, with the usual boost for shape < 1.
    double gamma(double shape) {
        if (shape <= 0.0) throw std::invalid_argument("gamma: shape must be positive");
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Dirichlet(alpha, ..., alpha) sample of the given dimension.
    Eigen::VectorXd dirichlet(double alpha, int dim) {
        Eigen::VectorXd out(dim);
        for (int i = 0; i < dim; ++i) out[i] = gamma(alpha);
        const double total = out.sum();
        if (total <= 0.0) {
            out.setConstant(1.0 / dim);
        } else {
            out /= total;
        }
        return out;
    }

    /// Index draw from an unnormalized weight vector (linear CDF scan).
    int categorical(const Eigen::VectorXd& weights) {
        const double total = weights.sum();
        if (!(total > 0.0)) throw std::invalid_argument("categorical: weights must have positive sum");
        double u = uniform() * total;
        for (int i = 0; i < weights.size(); ++i) {
            u -= weights[i];
            if (u < 0.0) return i;
        }
        return static_cast<int>(weights.size()) - 1;
    }

  private:
    std::mt19937_64 engine_;
};

/// Precomputed CDF for repeated draws from one distribution.
class CategoricalSampler {
  public:
    explicit CategoricalSampler(const Eigen::VectorXd& weights) : cdf_(weights.size()) {
        double acc = 0.0;
        for (int i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            cdf_[i] = acc;
        }
        if (!(acc > 0.0)) throw std::invalid_argument("CategoricalSampler: weights must have positive sum");
        total_ = acc;
    }

    int sample(Rng& rng) const {
        const double u = rng.uniform() * total_;
        const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        const auto idx = static_cast<int>(it - cdf_.begin());
        return std::min(idx, static_cast<int>(cdf_.size()) - 1);
    }

  private:
    std::vector<double> cdf_;
    double total_{0.0};
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic sub-seed derivation: one root seed per invocation, split
/// per task tag and index.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0) {
    return splitmix64(root ^ splitmix64(fnv1a64(tag) + 0x9e3779b97f4a7c15ull * (index + 1)));
}

}  // namespace milo
