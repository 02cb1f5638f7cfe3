#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sqz/detection.hpp"
#include "sqz/errors.hpp"
#include "sqz/model.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>

using namespace sqz;
using sqz_test::Gen;

namespace {

DetectionChain lab_chain(bool isolator) {
    DetectionChain c;
    c.quantum_efficiency = 0.93;
    c.fringe_visibility = 0.965;
    if (isolator) c.propagation_losses = {0.09};
    return c;
}

DetectionChain chain_with_efficiency(double eta, double elec) {
    DetectionChain c;
    c.quantum_efficiency = eta;
    c.electronic_noise_rel = elec;
    return c;
}

}  // namespace

TEST_CASE("homodyne variance") {
    CHECK(homodyne_variance(4.0, 0.25, 0.0) == doctest::Approx(4.0));
    CHECK(homodyne_variance(4.0, 0.25, kPi / 2) == doctest::Approx(0.25));
    CHECK(homodyne_variance(4.0, 0.25, kPi / 4) == doctest::Approx(2.125).epsilon(1e-14));
}

TEST_CASE("total efficiency from component values") {
    CHECK(total_efficiency(DetectionChain{}) == 1.0);
    // 0.93 · 0.965² · 0.91 and 0.93 · 0.965², evaluated by hand.
    CHECK(total_efficiency(lab_chain(true)) == doctest::Approx(0.7880957175).epsilon(1e-12));
    CHECK(total_efficiency(lab_chain(false)) == doctest::Approx(0.86603925).epsilon(1e-12));
}

TEST_CASE("forward model of the inferred source") {
    CHECK(from_db(-5.5) == doctest::Approx(0.28183829312644537).epsilon(1e-14));
    const double measured = apply_chain(from_db(-5.5), lab_chain(true));
    CHECK(measured == doctest::Approx(0.4340198343).epsilon(1e-9));
    CHECK(to_db(measured) == doctest::Approx(-3.6249).epsilon(1e-4));
    CHECK(apply_chain(0.7, DetectionChain{}) == 0.7);
}

TEST_CASE("inferred purity from the measured pair") {
    // Measured pair of product 1.6 with V− = 0.434.
    const MeasuredVariancePair m{1.6 / 0.434, 0.434, 0.054};
    const InferredPair p = infer_pair(m, lab_chain(true));
    CHECK(p.purity == doctest::Approx(1.24257).epsilon(1e-4));
    CHECK(p.purity >= 1.2);
    CHECK(p.purity <= 1.4);
    const double eta = total_efficiency(lab_chain(true));
    REQUIRE(p.sigma_minus);
    CHECK(*p.sigma_minus == doctest::Approx(0.054 / eta));
    REQUIRE(p.sigma_purity);
    CHECK(*p.sigma_purity == doctest::Approx(std::hypot(p.v_minus * 0.054 / eta, p.v_plus * 0.054 / eta)));
}

TEST_CASE("vacuum is a fixed point of the chain") {
    Gen g(21);
    for (int i = 0; i < 100; ++i) {
        const auto c = chain_with_efficiency(g.uniform(0.05, 1.0), 0.0);
        CHECK(apply_chain(1.0, c) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(infer_source(1.0, c) == doctest::Approx(1.0).epsilon(1e-14));
        const double e = g.uniform(0.0, 0.5);
        CHECK(apply_chain(1.0, chain_with_efficiency(c.quantum_efficiency, e)) == doctest::Approx(1.0 + e));
    }
}

TEST_CASE("apply then infer is the identity") {
    Gen g(22);
    for (int i = 0; i < 10000; ++i) {
        const double v = g.log_uniform(0.01, 100.0);
        const auto c = chain_with_efficiency(g.uniform(0.05, 1.0), g.uniform(0.0, 0.5));
        CHECK(std::abs(infer_source(apply_chain(v, c), c) - v) <= 1e-12 * std::max(1.0, v));
    }
    CHECK(infer_source(apply_chain(0.282, chain_with_efficiency(0.788, 0.063)), chain_with_efficiency(0.788, 0.063)) ==
          doctest::Approx(0.282).epsilon(1e-12));
}

TEST_CASE("loss degrades squeezing monotonically") {
    Gen g(23);
    for (int i = 0; i < 500; ++i) {
        const double v = g.uniform(0.01, 0.99);
        double last = 0.0;
        for (double eta = 1.0; eta > 0.05; eta -= 0.05) {
            const double m = apply_chain(v, chain_with_efficiency(eta, 0.0));
            CHECK(m > last);
            last = m;
        }
    }
}

TEST_CASE("loss never improves the purity of a minimum-uncertainty state") {
    Gen g(24);
    for (int i = 0; i < 2000; ++i) {
        const double vp = g.log_uniform(1.0, 100.0);
        const double vm = 1.0 / vp;
        const auto c = chain_with_efficiency(g.uniform(0.05, 1.0), 0.0);
        CHECK(purity(apply_chain(vp, c), apply_chain(vm, c)).product >= 1.0 - 1e-12);
    }
    // A strongly mixed state is pulled toward vacuum instead.
    const auto half = chain_with_efficiency(0.5, 0.0);
    CHECK(purity(apply_chain(4.0, half), apply_chain(0.9, half)).product < purity(4.0, 0.9).product);
}

TEST_CASE("purity flags") {
    CHECK(purity(1.0, 1.0).product == 1.0);
    CHECK_FALSE(purity(1.0, 1.0).unphysical);
    CHECK(purity(2.0, 0.4).unphysical);
    CHECK_FALSE(purity(4.0, 0.25).unphysical);
}

TEST_CASE("dB conversions invert") {
    CHECK(to_db(1.0) == 0.0);
    Gen g(25);
    for (int i = 0; i < 1000; ++i) {
        const double v = g.log_uniform(1e-6, 1e6);
        CHECK(std::abs(from_db(to_db(v)) - v) <= 1e-12 * v);
    }
    CHECK(from_db(0.0) == 1.0);
}

TEST_CASE("unphysical measurement is rejected") {
    const auto c = lab_chain(true);
    const double floor = 1.0 - total_efficiency(c);
    CHECK_THROWS_AS(infer_source(floor * 0.9, c), UnphysicalMeasurement);
    CHECK_THROWS_AS(infer_source(floor, c), UnphysicalMeasurement);
    CHECK_NOTHROW(infer_source(floor * 1.01, c));
}

TEST_CASE("phase scan extrema sit on the quadratures") {
    Gen g(26);
    for (int trial = 0; trial < 50; ++trial) {
        const double vm = g.uniform(0.05, 0.95);
        const double vp = g.uniform(1.05, 20.0);
        const auto c = chain_with_efficiency(g.uniform(0.3, 1.0), g.uniform(0.0, 0.2));
        const std::size_t n = 1000;
        const double step = kTwoPi / static_cast<double>(n - 1);
        std::vector<double> grid(n);
        for (std::size_t i = 0; i < n; ++i) grid[i] = static_cast<double>(i) * step;
        const auto scan = phase_scan(vp, vm, c, grid);
        const auto lo = std::min_element(scan.begin(), scan.end(), [](auto& a, auto& b) { return a.v_meas < b.v_meas; });
        const double off = std::remainder(lo->theta - kPi / 2, kPi);
        CHECK(std::abs(off) <= step);
        CHECK(lo->v_meas == doctest::Approx(apply_chain(vm, c)).epsilon(1e-4));
    }
    const std::vector<double> flat_grid{0.0, 0.5, 1.0, 2.0};
    for (const auto& p : phase_scan(2.0, 2.0, DetectionChain{}, flat_grid)) CHECK(p.v_meas == doctest::Approx(2.0));
    const std::vector<double> empty;
    CHECK_THROWS(phase_scan(2.0, 0.5, DetectionChain{}, empty));
}

TEST_CASE("lossless OPO is pure at every frequency") {
    CavityRates r;
    r.kappa_out_a = 2.0;
    r.kappa_b = 100.0;
    r.epsilon = 1.0;
    const CavityParams p(r, 0.0, 1.3);
    for (double w : sqz_test::log_grid(1e-3, 1e3, 50)) {
        const double vp = quadrature_variance(p, NoiseInputs{}, Quadrature::amplitude, w);
        const double vm = quadrature_variance(p, NoiseInputs{}, Quadrature::phase, w);
        CHECK(purity(vp, vm).product == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("chain validation") {
    DetectionChain c;
    c.quantum_efficiency = 0.0;
    CHECK_THROWS(c.validate());
    c.quantum_efficiency = 0.5;
    c.propagation_losses = {1.0};
    CHECK_THROWS(c.validate());
    c.propagation_losses = {};
    c.electronic_noise_rel = -0.1;
    CHECK_THROWS(c.validate());
}
