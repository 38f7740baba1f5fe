#pragma once

#include <cstdint>
#include <random>

namespace pct {

/// SplitMix64 finalizer. Used to derive independent stream seeds and opaque tokens.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Named purposes for the per-run random streams. Each purpose draws from its
/// own engine so that adding draws to one subsystem never perturbs another.
enum class Stream : std::uint64_t {
    Population = 1,
    Seeding,
    AppInstall,
    Disease,
    Mobility,
    Transmission,
    Testing,
    Symptoms,
    Behaviour,
    Predictor,
    Tokens,
    DomainRandomization,
    Split,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) noexcept {
    return mix64(mix64(master) ^ mix64(salt * 0xD1B54A32D192ED03ULL));
}

class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t master, Stream stream)
        : engine_(derive_seed(master, static_cast<std::uint64_t>(stream))) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform() < p;
    }
    double normal(double mean, double sd) {
        if (sd <= 0.0) return mean;
        return std::normal_distribution<double>(mean, sd)(engine_);
    }
    double lognormal(double log_mean, double log_sd) {
        return std::lognormal_distribution<double>(log_mean, log_sd)(engine_);
    }
    std::uint32_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        return static_cast<std::uint32_t>(std::poisson_distribution<std::int64_t>(mean)(engine_));
    }
    /// Uniform index in [0, n). n must be positive.
    std::uint64_t index(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }
    std::uint64_t next_u64() { return engine_(); }

    engine_type& engine() { return engine_; }

private:
    engine_type engine_;
};

}  // namespace pct
