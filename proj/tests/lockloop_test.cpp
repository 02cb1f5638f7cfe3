#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sqz/analyzer.hpp"
#include "sqz/detection.hpp"
#include "sqz/lockloop.hpp"

#include <cmath>
#include <complex>
#include <limits>

using namespace sqz;

namespace {

LockConfig noiseless(double initial, double gain = 0.25) {
    LockConfig c;
    c.meter_bandwidth = std::numeric_limits<double>::infinity();
    c.initial_phase = initial;
    c.loop_gain = gain;
    return c;
}

double wrapped(double theta, double base) {
    const double d = theta - base;
    return d - kPi * std::round(d / kPi);
}

// Demodulated output averaged over one dither period, by direct quadrature.
double averaged_demod(double theta, const LockConfig& c) {
    const int n = 20000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const double phi = kTwoPi * (k + 0.5) / n;
        sum += 2.0 * homodyne_variance(c.v_plus, c.v_minus, theta + c.dither_amp * std::sin(phi)) *
               std::sin(phi + c.demod_phase);
    }
    return sum / n;
}

}  // namespace

TEST_CASE("error signal zeros sit on the quadratures") {
    LockConfig c;
    CHECK(error_signal_model(kPi / 2, c) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(error_signal_model(0.0, c)) < 1e-15);
    CHECK(error_signal_model(kPi / 2 - 0.1, c) * error_signal_model(kPi / 2 + 0.1, c) < 0.0);
    for (double th = 0.01; th < kPi; th += 0.01) {
        const bool at_zero = std::abs(std::sin(2 * th)) < 1e-9;
        CHECK((std::abs(error_signal_model(th, c)) < 1e-12) == at_zero);
    }
    c.v_plus = c.v_minus = 1.3;
    for (double th = 0.0; th < kPi; th += 0.1) CHECK(error_signal_model(th, c) == 0.0);
}

TEST_CASE("averaged demodulation matches the Bessel form and its first-order model") {
    LockConfig c;
    for (double phi : {0.0, 0.4}) {
        c.demod_phase = phi;
        for (double th = 0.0; th < kPi; th += 0.05) {
            const double exact = -(c.v_plus - c.v_minus) * std::cyl_bessel_j(1.0, 2.0 * c.dither_amp) *
                                 std::sin(2.0 * th) * std::cos(phi);
            CHECK(std::abs(averaged_demod(th, c) - exact) < 1e-9);
            // First order in the dither amplitude: relative error about a²/2.
            CHECK(std::abs(error_signal_model(th, c) - exact) <= 0.006 * std::abs(exact) + 1e-12);
        }
    }
}

TEST_CASE("noise power meter") {
    LockConfig c = noiseless(0.0);
    std::mt19937_64 rng(1);
    CHECK(noise_power_meter(0.3, c, rng) == homodyne_variance(4.0, 0.25, 0.3));

    c.meter_bandwidth = 300e3;
    const double sigma = c.meter_relative_noise();
    CHECK(sigma == doctest::Approx(1.0 / std::sqrt(300e3 * 4e-6)));
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += noise_power_meter(kPi / 2, c, rng);
    CHECK(std::abs(sum / n - 0.25) < 5.0 * 0.25 * sigma / std::sqrt(n));

    c.v_plus = c.v_minus = 2.0;
    double s0 = 0.0, s1 = 0.0;
    for (int i = 0; i < n; ++i) {
        s0 += noise_power_meter(0.0, c, rng);
        s1 += noise_power_meter(1.0, c, rng);
    }
    CHECK(std::abs(s0 - s1) / n < 5.0 * 2.0 * sigma * std::sqrt(2.0 / n));
}

TEST_CASE("the quadrature is a fixed point") {
    const LockConfig c = noiseless(kPi / 2);
    const LockTrace t = simulate_lock(c, {}, 1);
    CHECK(t.summary.converged);
    CHECK(t.summary.residual_rms < c.dither_amp);
    CHECK(std::abs(t.summary.mean_offset) < 1e-6);
    CHECK(t.samples.size() == c.step_count());
}

TEST_CASE("small-offset acquisition follows the linearized loop") {
    const double x0 = 0.01;
    LockConfig c = noiseless(kPi / 2 + x0);
    c.duration = 0.3;
    const LockTrace t = simulate_lock(c, {}, 1);

    // e' = ω_c(2ΔV J1(2a) x − e),  x' = −g ω_c e.
    const double wc = kTwoPi * c.lowpass_corner;
    const double k = 2.0 * (c.v_plus - c.v_minus) * std::cyl_bessel_j(1.0, 2.0 * c.dither_amp);
    const std::complex<double> disc = std::sqrt(std::complex<double>(wc * wc - 4.0 * c.loop_gain * wc * wc * k));
    const std::complex<double> s1 = (-wc + disc) / 2.0;
    const std::complex<double> s2 = (-wc - disc) / 2.0;
    for (double at : {0.02, 0.05, 0.1, 0.2}) {
        const auto x = x0 * (s2 * std::exp(s1 * at) - s1 * std::exp(s2 * at)) / (s2 - s1);
        const auto& sample = t.samples.at(static_cast<std::size_t>(std::llround(at / c.dt)));
        CHECK(std::abs(sample.control_output - kPi / 2 - x.real()) < 0.01 * x0);
    }
}

TEST_CASE("approach is monotone below the gain bound and rings above it") {
    LockConfig c = noiseless(kPi / 2 + 0.2);
    c.duration = 1.0;
    c.record_stride = 50;
    const double bound = monotone_gain_bound(c);
    CHECK(bound == doctest::Approx(1.0 / (8 * 0.1 * 3.75)));

    for (double frac : {0.3, 0.6, 0.9}) {
        c.loop_gain = frac * bound;
        const LockTrace t = simulate_lock(c, {}, 1);
        double last = 1.0;
        for (const auto& s : t.samples) {
            const double x = std::abs(s.control_output - kPi / 2);
            CHECK(x <= last + 1e-9);
            last = x;
        }
        CHECK(last < 0.01);
    }

    c.loop_gain = 4.0 * bound;
    const LockTrace ringing = simulate_lock(c, {}, 1);
    bool crossed = false;
    for (const auto& s : ringing.samples) crossed = crossed || s.control_output < kPi / 2;
    CHECK(crossed);
}

TEST_CASE("default acquisition from a 0.3 rad offset") {
    LockConfig c;
    c.initial_phase = kPi / 2 + 0.3;
    c.record_stride = 100;
    const LockTrace t = simulate_lock(c, {}, 2004);
    CHECK(t.summary.converged);
    CHECK_FALSE(t.summary.diverged);
    CHECK(t.summary.target == LockTarget::minimum);
    CHECK(std::abs(wrapped(t.summary.lock_point, kPi / 2)) < 1e-12);
    CHECK(std::abs(t.summary.mean_offset) < 0.02);
    CHECK(t.summary.residual_rms < 0.05);
    CHECK(t.summary.settle_time < 2.0);
}

TEST_CASE("negative gain locks to the antisqueezed quadrature") {
    LockConfig c;
    c.initial_phase = kPi / 2 + 0.3;
    c.loop_gain = -0.25;
    c.record_stride = 100;
    const LockTrace t = simulate_lock(c, {}, 2004);
    CHECK(t.summary.target == LockTarget::maximum);
    CHECK(t.summary.converged);
    CHECK(std::abs(wrapped(t.summary.lock_point, 0.0)) < 1e-12);
    CHECK(std::abs(t.summary.mean_offset) < 0.02);
}

TEST_CASE("zero gain leaves the phase to the disturbance") {
    LockConfig c = noiseless(0.7, 0.0);
    c.meter_bandwidth = 300e3;
    c.duration = 0.2;
    const Disturbance d = [](double t) { return 0.3 * std::sin(kTwoPi * 3.0 * t); };
    const LockTrace t = simulate_lock(c, d, 5);
    CHECK(t.summary.target == LockTarget::none);
    CHECK_FALSE(t.summary.converged);
    for (const auto& s : t.samples) {
        CHECK(s.control_output == 0.7);
        CHECK(s.theta_disturbance == d(s.t));
        CHECK(s.theta_total == doctest::Approx(0.7 + c.dither_amp * std::sin(kTwoPi * c.dither_freq * s.t) + d(s.t)));
    }
}

TEST_CASE("runs are reproducible per seed") {
    LockConfig c;
    c.duration = 0.5;
    c.initial_phase = 1.9;
    const LockTrace a = simulate_lock(c, {}, 99);
    const LockTrace b = simulate_lock(c, {}, 99);
    const LockTrace other = simulate_lock(c, {}, 100);
    REQUIRE(a.samples.size() == b.samples.size());
    bool identical = true, differs = false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        identical = identical && a.samples[i].error_signal == b.samples[i].error_signal &&
                    a.samples[i].control_output == b.samples[i].control_output;
        differs = differs || a.samples[i].error_signal != other.samples[i].error_signal;
    }
    CHECK(identical);
    CHECK(differs);
}

TEST_CASE("residual grows with meter noise") {
    double last = 0.0;
    for (double bandwidth : {3e6, 3e5, 3e4}) {
        LockConfig c;
        c.meter_bandwidth = bandwidth;
        c.duration = 4.0;
        c.record_stride = 1000;
        const LockTrace t = simulate_lock(c, {}, 7);
        CHECK(t.summary.residual_rms > last);
        last = t.summary.residual_rms;
    }
}

TEST_CASE("config limits and divergence") {
    LockConfig c;
    c.dt = 1e-5;
    CHECK_THROWS(simulate_lock(c, {}, 1));
    c = LockConfig{};
    c.dither_amp = 1.0;
    CHECK_THROWS(c.validate());
    c = LockConfig{};
    c.duration = 100.0;
    CHECK_THROWS(c.validate());
    c = LockConfig{};
    c.record_stride = 0;
    CHECK_THROWS(c.validate());

    c = LockConfig{};
    c.duration = 0.01;
    const LockTrace t =
        simulate_lock(c, [](double t) { return t > 0.005 ? std::numeric_limits<double>::quiet_NaN() : 0.0; }, 1);
    CHECK(t.summary.diverged);
    CHECK_FALSE(t.summary.converged);
}

TEST_CASE("drift disturbance") {
    const auto d = drift_disturbance(0.5, 2.0);
    CHECK(d(1.0) == 0.0);
    CHECK(d(4.0) == doctest::Approx(1.0));
}

TEST_CASE("lock artifact lands in the 20 kHz bin of the stitched trace") {
    const PowerSpectrum unit = [](double) { return 1.0; };
    std::vector<MeasuredTrace> parts{evaluate_plan(unit, {100, 3200, 8, 500, 0}),
                                     evaluate_plan(unit, {1600, 12800, 32, 1000, 0}),
                                     evaluate_plan(unit, {3800, 100000, 128, 2000, 0})};
    const MeasuredTrace stitched = stitch(parts);
    const std::size_t i = bin_containing(stitched, 20e3);
    CHECK(stitched.rbw_of(stitched.bins[i]) == 128.0);
    CHECK(stitched.bins[i].frequency == 19992.0);

    const MeasuredTrace with = inject_lock_artifact(stitched, 20e3, 0.5);
    for (std::size_t k = 0; k < stitched.bins.size(); ++k) {
        CHECK(with.bins[k].power == (k == i ? 1.5 : 1.0));
    }
    const MeasuredTrace none = inject_lock_artifact(stitched, 20e3, 0.0);
    for (std::size_t k = 0; k < stitched.bins.size(); ++k) CHECK(none.bins[k].power == 1.0);

    MeasuredTrace masked = with;
    masked.bins[i].masked = true;
    CHECK(band_mean_power(masked, 15e3, 25e3) == 1.0);
    CHECK_THROWS(inject_lock_artifact(stitched, 200e3, 0.5));
    CHECK_THROWS(inject_lock_artifact(stitched, 50.0, 0.5));
}
