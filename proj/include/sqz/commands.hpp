#pragma once

// Scenario-level commands behind the sqzsim verbs. Each command returns its
// results and, when RunOptions::out_dir is set, writes CSV files there.
// Output is a pure function of the scenario, the seed and the options.

#include "sqz/analyzer.hpp"
#include "sqz/detection.hpp"
#include "sqz/lockloop.hpp"
#include "sqz/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

namespace sqz {

struct RunOptions {
    std::filesystem::path out_dir;        // empty: no files
    std::optional<std::uint64_t> seed;    // overrides the scenario seed
    bool analytic = false;                // skip synthesis noise
    std::ostream* log = nullptr;          // human-readable summary
};

struct BackscatterResult {
    MeasuredTrace no_isolator;
    MeasuredTrace isolator;
    double band_no_isolator = 0.0;  // mean over the backscatter band of each trace
    double band_isolator = 0.0;
    double analytic_no_isolator = 0.0;
    double analytic_isolator = 0.0;
};

struct SpectrumResult {
    MeasuredTrace shot_noise;  // (a) vacuum through the detector
    MeasuredTrace squeezed;    // (b) OPO/OPA output, lock peak included
    MeasuredTrace electronic;  // (c) detector dark noise
    std::optional<std::size_t> lock_bin;
    std::size_t checked_bins = 0;   // unmasked bins from 280 Hz up, lock bin excluded
    std::size_t squeezed_bins = 0;  // of those, power below shot noise
    std::optional<BackscatterResult> backscatter;
};

struct PhaseScanResult {
    double frequency_hz = 0.0;
    double v_plus_source = 1.0;
    double v_minus_source = 1.0;
    double electronic = 0.0;
    std::vector<PhaseScanPoint> points;
    double min_subtracted = 1.0;  // extrema with electronic noise removed
    double max_subtracted = 1.0;
    double measured_purity = 1.0;
};

struct SeedSweepReport {
    SweepResult analytic;
    std::optional<SweepResult> synthesized;
};

struct InferReport {
    double efficiency = 1.0;
    MeasuredVariancePair measured;
    Purity measured_purity;
    InferredPair inferred;
};

SpectrumResult cmd_spectrum(const Scenario& s, const RunOptions& opts);

PhaseScanResult cmd_phase_scan(const Scenario& s, const RunOptions& opts,
                               std::optional<double> frequency_hz = std::nullopt);

SeedSweepReport cmd_seed_sweep(const Scenario& s, const RunOptions& opts,
                               std::optional<std::vector<double>> powers = std::nullopt);

LockTrace cmd_lock(const Scenario& s, const RunOptions& opts);

InferReport cmd_infer(const Scenario& s, const RunOptions& opts);

}  // namespace sqz
