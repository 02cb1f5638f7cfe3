#pragma once

// FFT spectrum-analyzer emulation. Frequencies here are in Hz, like the
// instrument; powers are linear and relative to shot noise.
//
// A window is a contiguous set of bins of width rbw tiling [f_start, f_stop];
// bin k covers [f_start + k*rbw, f_start + (k+1)*rbw) and its center is the
// reported frequency. Each bin of a synthesized trace is the mean of n_avg
// independent periodogram estimates of Gaussian noise, i.e. Gamma(n_avg)
// distributed with the true power as its mean. Bins are independent; window
// functions and leakage are not modeled.

#include "sqz/detection.hpp"
#include "sqz/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace sqz {

struct WindowPlan {
    double f_start = 0.0;
    double f_stop = 0.0;
    double rbw = 1.0;
    int n_avg = 1;
    double vbw = 0.0;  // metadata only, no effect on statistics

    void validate() const;
    std::size_t bin_count() const;
    double bin_center(std::size_t k) const { return f_start + (static_cast<double>(k) + 0.5) * rbw; }
    // Upper edge of the last bin.
    double covered_stop() const { return f_start + static_cast<double>(bin_count()) * rbw; }

    bool operator==(const WindowPlan&) const = default;
};

struct TraceBin {
    double frequency = 0.0;  // bin center, Hz
    double power = 0.0;      // linear, relative to shot noise
    bool masked = false;
    int window_id = 0;       // index into MeasuredTrace::windows
};

struct MeasuredTrace {
    std::vector<TraceBin> bins;
    std::vector<WindowPlan> windows;
    std::uint64_t rng_seed = 0;

    double rbw_of(const TraceBin& bin) const { return windows.at(static_cast<std::size_t>(bin.window_id)).rbw; }
    std::size_t masked_count() const;
};

// True power spectral density versus frequency in Hz, relative to shot noise.
using PowerSpectrum = std::function<double(double)>;

// Stream splitting for independent per-window generators (splitmix64 of
// master + stream index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Noise-free trace: each bin holds the true power at its center.
MeasuredTrace evaluate_plan(const PowerSpectrum& true_psd, const WindowPlan& plan);

// Averaged-periodogram trace. Deterministic for a fixed seed.
MeasuredTrace synthesize_measurement(const PowerSpectrum& true_psd, const WindowPlan& plan,
                                     std::uint64_t rng_seed);

// Joins windows into one trace. Where windows overlap the finer-RBW data is
// kept: a bin survives only if its center lies outside the spans already
// claimed by finer windows. Throws CoverageError when window spans leave a gap.
MeasuredTrace stitch(std::span<const MeasuredTrace> traces);

// Per-bin linear subtraction. Bins where the electronic power reaches the
// measured power are masked with power 0. Throws GridMismatch on differing bins.
MeasuredTrace subtract_electronic(const MeasuredTrace& measured, const MeasuredTrace& electronic);

// Per-bin linear addition, the inverse of subtract_electronic on unmasked bins.
MeasuredTrace add_electronic(const MeasuredTrace& measured, const MeasuredTrace& electronic);

// Masks every bin whose extent overlaps [k f0 - half_width, k f0 + half_width]
// for k = 1..n_harmonics.
MeasuredTrace mask_mains(const MeasuredTrace& trace, double fundamental, int n_harmonics,
                         double half_width);

// Mean of the unmasked bin powers with centers in [f_lo, f_hi]. Throws
// EmptyBand when no such bin exists.
double band_mean_power(const MeasuredTrace& trace, double f_lo, double f_hi);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_norm = 0.0;
    double relative_residual = 0.0;  // residual_norm / ||y||
    double slope_sigma = 0.0;        // from per-point sigmas, 0 when none given
};

// Ordinary least squares y = slope*x + intercept. sigmas (optional, same
// length) only feed slope_sigma.
LineFit fit_line(std::span<const double> xs, std::span<const double> ys,
                 std::span<const double> sigmas = {});

// Everything seed_sweep needs to turn a seed power into a measured spectrum.
struct SweepModel {
    CavityRates rates;
    double classical_gain = 1.0;
    double carrier_omega = 0.0;                           // rad/s
    std::function<NoiseInputs(double seed_power)> noise;  // technical noise at a given seed power
    DetectionChain chain;                                 // electronic noise is subtracted
    WindowPlan plan;                                      // bin grid and averaging
    double band_lo = 5e3;
    double band_hi = 6e3;
};

struct SweepPoint {
    double seed_power = 0.0;
    double band_mean = 0.0;
    double sigma = 0.0;  // expected std of band_mean under synthesis
};

struct SweepResult {
    std::vector<SweepPoint> points;
    LineFit fit;
};

// Band-mean noise power of the measured quadrature (electronic noise
// subtracted) per seed power, with an affine fit. rng_seed == nullopt gives
// the noise-free analytic sweep.
SweepResult seed_sweep(const SweepModel& model, std::span<const double> seed_powers,
                       std::optional<std::uint64_t> rng_seed);

}  // namespace sqz
