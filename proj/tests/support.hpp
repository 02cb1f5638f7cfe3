#pragma once

// Shared helpers for the test binaries: a small seeded generator for property
// tests and an independent transcription of the variance formula.

#include "sqz/model.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace sqz_test {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }

    // Splits `total` into n positive parts with random proportions.
    std::vector<double> partition(double total, std::size_t n) {
        std::vector<double> w(n);
        double sum = 0.0;
        for (auto& x : w) sum += (x = uniform(0.05, 1.0));
        for (auto& x : w) x *= total / sum;
        return w;
    }

    sqz::CavityRates rates(double kappa_a) {
        const auto p = partition(kappa_a, 3);
        sqz::CavityRates r;
        r.kappa_in_a = p[0];
        r.kappa_out_a = p[1];
        r.kappa_l_a = p[2];
        r.kappa_b = log_uniform(1e2, 1e4) * kappa_a;
        r.kappa_in_b = uniform(0.1, 1.0) * r.kappa_b;
        r.epsilon = uniform(1e-3, 1.0) * kappa_a;
        return r;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return g;
}

// Variance written out in real arithmetic with flat noise inputs. Kept apart
// from the library so the two can disagree.
struct FlatNoise {
    double seed = 1.0, loss = 1.0, vac = 1.0, pump = 1.0, detuning = 0.0;
};

inline double reference_variance(const sqz::CavityRates& r, double alpha, double beta, bool amplitude, double w,
                                 const FlatNoise& n = {}) {
    const double ka = r.kappa_in_a + r.kappa_out_a + r.kappa_l_a;
    const double a2 = alpha * alpha;
    const double shift = (amplitude ? 3.0 : 1.0) * r.epsilon * r.epsilon * a2 / (2.0 * r.kappa_b);
    const double re = ka + shift + (amplitude ? -1.0 : 1.0) * r.epsilon * beta;
    const double mod2 = re * re + w * w;
    const double cv = (2.0 * r.kappa_out_a - re) * (2.0 * r.kappa_out_a - re) + w * w;
    const double cp = 4.0 * r.kappa_out_a * r.kappa_in_b * (r.epsilon / r.kappa_b) * (r.epsilon / r.kappa_b);
    const double cd = amplitude ? 0.0 : 8.0 * r.kappa_out_a;
    const double num = 4.0 * r.kappa_in_a * r.kappa_out_a * n.seed + 4.0 * r.kappa_l_a * r.kappa_out_a * n.loss +
                       cv * n.vac + a2 * (cp * n.pump + cd * n.detuning);
    return num / mod2;
}

inline sqz::NoiseInputs flat_inputs(const FlatNoise& n) {
    sqz::NoiseInputs in;
    in.seed_plus = in.seed_minus = sqz::constant_density(n.seed);
    in.loss = sqz::constant_density(n.loss);
    in.vac = sqz::constant_density(n.vac);
    in.pump_plus = in.pump_minus = sqz::constant_density(n.pump);
    in.detuning = sqz::constant_density(n.detuning);
    return in;
}

}  // namespace sqz_test
