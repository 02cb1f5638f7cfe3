#pragma once

// Noise locking of the homodyne phase. The LO phase is dithered, the
// detected noise power V(θ) is demodulated at the dither frequency, low-pass
// filtered and integrated back onto the phase actuator.
//
// Loop per step (t = n·dt):
//   θ_total = θ_ctrl + a·sin(2π f_d t) + disturbance(t)
//   meter   = V(θ_total)·(1 + N(0,1)/√(B·dt))
//   mixed   = 2·meter·sin(2π f_d t + φ_demod)
//   error  += (1 − e^{−2π f_c dt})·(mixed − error)
//   θ_ctrl −= gain·2π f_c·error·dt
//
// Averaged over a dither period the error is −(V+ − V−)·J1(2a)·sin2θ·cos φ,
// so its zeros are exactly the quadratures. Linearizing about the squeezed
// quadrature gives loop poles from s² + ω_c s + k ω_c = 0 with
// k = gain·ω_c·2a|V+ − V−|; the approach is monotone (no overshoot) while
// gain ≤ 1/(8a|V+ − V−|), see monotone_gain_bound(). Positive gain locks to
// the noise minimum, negative gain to the maximum.

#include "sqz/analyzer.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace sqz {

struct LockConfig {
    double dither_freq = 20e3;       // Hz
    double dither_amp = 0.1;         // rad
    double demod_phase = 0.0;        // rad
    double lowpass_corner = 10.0;    // Hz
    double loop_gain = 0.25;         // dimensionless, sign selects min/max
    double dt = 4e-6;                // s
    double duration = 10.0;          // s
    double meter_bandwidth = 300e3;  // Hz, inf means noiseless
    double v_plus = 4.0;             // variance pair at the analysis frequency
    double v_minus = 0.25;
    double initial_phase = kPi / 2;  // θ_ctrl at t = 0
    double settle_band = 0.05;       // rad, settle time is the last exit from this band
    double converge_tolerance = 0.02;  // rad, |mean offset| over the final half
    std::size_t record_stride = 1;   // keep every n-th step in LockTrace::samples

    // Throws std::invalid_argument on a violated constraint.
    void validate() const;
    std::size_t step_count() const;
    double meter_relative_noise() const;

    bool operator==(const LockConfig&) const = default;
};

struct LockSample {
    double t = 0.0;
    double theta_total = 0.0;
    double theta_disturbance = 0.0;
    double error_signal = 0.0;
    double control_output = 0.0;  // θ_ctrl
};

enum class LockTarget { none, minimum, maximum };

struct LockSummary {
    bool converged = false;
    bool diverged = false;
    LockTarget target = LockTarget::none;
    double lock_point = 0.0;     // extremum nearest the final phase, rad
    double mean_offset = 0.0;    // mean of (θ_ctrl + disturbance − lock_point) over the final half
    double residual_rms = 0.0;   // RMS of the same offset over the final half
    double settle_time = 0.0;    // s; equals duration when never settled
};

struct LockTrace {
    std::vector<LockSample> samples;
    LockSummary summary;
};

using Disturbance = std::function<double(double)>;

// Zero-span analyzer estimate of V(θ), with multiplicative radiometer noise of
// relative std 1/√(B·dt).
double noise_power_meter(double theta, const LockConfig& config, std::mt19937_64& rng);

// First-order demodulated error: dither_amp·cos(demod_phase)·dV/dθ.
double error_signal_model(double theta, const LockConfig& config);

// Largest loop gain magnitude with a non-oscillatory linearized response.
double monotone_gain_bound(const LockConfig& config);

LockTrace simulate_lock(const LockConfig& config, const Disturbance& disturbance, std::uint64_t rng_seed);

// Slow drift that walks the phase off at a constant rate after t_start, a
// stand-in for the free-running OPO cavity drifting off resonance.
Disturbance drift_disturbance(double rate_rad_per_s, double t_start);

// Adds a one-bin peak of the given linear power at the dither frequency.
// Where stitched windows overlap the bin with the nearest center wins.
MeasuredTrace inject_lock_artifact(const MeasuredTrace& trace, double dither_freq, double amplitude);

// Index of the bin whose extent contains f, nearest center on ties.
std::size_t bin_containing(const MeasuredTrace& trace, double f);

}  // namespace sqz
