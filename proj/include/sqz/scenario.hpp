#pragma once

// Scenario files: INI-style sections of `key = value` lines, `#` comments.
// Frequencies and rates are in Hz (ordinary, not angular), powers in W,
// efficiencies as fractions and noise levels in dB relative to vacuum. A dB
// field may be `off`. Lists are comma separated; tuples use `:`.
//
//   [cavity]
//   kappa_out_hz = 7.18e6
//   ...
//   [analyzer]
//   windows = 100:3200:8:500, 1600:12800:32:1000   # f_start:f_stop:rbw:n_avg
//
// Unknown sections or keys, malformed numbers and out-of-range values fail
// with a ConfigError naming the line and `section.key`.

#include "sqz/analyzer.hpp"
#include "sqz/detection.hpp"
#include "sqz/lockloop.hpp"
#include "sqz/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sqz {

struct PeakSpec {
    double center_hz = 0.0;
    double width_hz = 1.0;  // FWHM
    double height_db = 0.0;

    bool operator==(const PeakSpec&) const = default;
};

struct CavitySpec {
    double kappa_in_hz = 5e4;
    double kappa_out_hz = 7.18e6;
    double kappa_loss_hz = 0.77e6;
    double kappa_b_hz = 1e10;
    double kappa_in_b_hz = 9.6e9;
    double epsilon_hz = 100.0;
    double classical_gain = 5.0;
    double wavelength_nm = 1064.0;

    bool operator==(const CavitySpec&) const = default;
};

// Seed field. With technical noise on, V_s = 1 + (P/ref_power)·excess(f).
struct SeedSpec {
    double power_w = 0.0;
    bool technical = false;
    double ref_power_w = 1e-12;
    std::optional<double> floor_db;
    std::vector<PeakSpec> peaks;

    bool operator==(const SeedSpec&) const = default;
};

// Pump noise V_p (both quadratures): floor plus peaks.
struct PumpSpec {
    double floor_db = 0.0;
    std::vector<PeakSpec> peaks;

    bool operator==(const PumpSpec&) const = default;
};

// Detuning noise V_Δ: level/(1 + (f/corner)²) plus peaks.
struct DetuningSpec {
    std::optional<double> level_db;
    double corner_hz = 1000.0;
    std::vector<PeakSpec> peaks;

    bool operator==(const DetuningSpec&) const = default;
};

struct DetectionSpec {
    double quantum_efficiency = 0.93;
    double fringe_visibility = 0.965;
    std::vector<double> losses;
    std::optional<double> electronic_noise_db = -12.0;
    double homodyne_phase_rad = kPi / 2;

    bool operator==(const DetectionSpec&) const = default;
};

struct MainsLine {
    double frequency_hz = 150.0;
    double height_db = 0.0;  // peak electronic power relative to shot noise

    bool operator==(const MainsLine&) const = default;
};

struct AnalyzerSpec {
    std::vector<WindowPlan> windows{{100.0, 3200.0, 8.0, 500, 0.0},
                                    {1600.0, 12800.0, 32.0, 1000, 0.0},
                                    {3800.0, 100000.0, 128.0, 2000, 0.0}};
    double mains_hz = 50.0;
    int mains_harmonics = 20;
    double mains_half_width_hz = 4.0;
    double mains_line_sigma_hz = 1.0;
    std::vector<MainsLine> mains_lines;
    std::optional<double> lock_peak_hz = 20e3;
    double lock_peak_power = 0.5;

    bool operator==(const AnalyzerSpec&) const = default;
};

// LO light scattered back into the cavity, removed by the Faraday isolator.
struct BackscatterSpec {
    bool enabled = false;
    double power_w = 1e-12;
    double isolator_loss = 0.09;
    std::vector<PeakSpec> peaks;  // technical seed noise of the scattered light at power_w
    WindowPlan window{100.0, 3200.0, 8.0, 500, 0.0};
    int n_avg_no_isolator = 400;
    double band_lo_hz = 300.0;
    double band_hi_hz = 700.0;

    bool operator==(const BackscatterSpec&) const = default;
};

struct SweepSpec {
    std::vector<double> powers_w{1e-9, 7e-7, 6e-6};
    double band_lo_hz = 5e3;
    double band_hi_hz = 6e3;
    WindowPlan window{2e3, 100e3, 128.0, 1000, 0.0};

    bool operator==(const SweepSpec&) const = default;
};

struct PhaseScanSpec {
    double frequency_hz = 11.2e3;
    std::size_t points = 361;
    double theta_start_rad = 0.0;
    double theta_stop_rad = kPi;
    std::optional<double> electronic_noise_db = -9.0;
    int n_avg = 0;  // 0 keeps the scan noise-free

    bool operator==(const PhaseScanSpec&) const = default;
};

struct LockSpec {
    LockConfig config;
    double analysis_hz = 2e6;
    std::optional<double> v_plus;  // override the model pair at analysis_hz
    std::optional<double> v_minus;
    double drift_rad_per_s = 0.0;
    double drift_start_s = 0.0;

    bool operator==(const LockSpec&) const = default;
};

struct InferSpec {
    std::optional<double> v_plus;
    std::optional<double> v_minus;
    std::optional<double> uncertainty;
    bool electronic_subtracted = true;

    bool operator==(const InferSpec&) const = default;
};

struct Scenario {
    std::string name = "custom";
    std::uint64_t seed = 1;
    CavitySpec cavity;
    SeedSpec seed_field;
    PumpSpec pump;
    DetuningSpec detuning;
    DetectionSpec detection;
    AnalyzerSpec analyzer;
    BackscatterSpec backscatter;
    SweepSpec sweep;
    PhaseScanSpec phase_scan;
    LockSpec lock;
    InferSpec infer;

    bool operator==(const Scenario&) const = default;
};

// Parses and validates. Missing keys keep their defaults.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

// Writes every field; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

// FNV-1a of the serialized form.
std::uint64_t scenario_hash(const Scenario& s);

// Module-level views of a scenario (angular units, linear levels).
CavityRates cavity_rates(const Scenario& s);
double carrier_omega(const Scenario& s);
DetectionChain detection_chain(const Scenario& s);
NoiseInputs noise_inputs(const Scenario& s, double seed_power);
SpectralShape to_shape(std::optional<double> floor_db, std::optional<double> lowpass_db, double corner_hz,
                       const std::vector<PeakSpec>& peaks);
PowerSpectrum electronic_psd(const Scenario& s);
SweepModel sweep_model(const Scenario& s);
// Lock configuration with the variance pair resolved (override or model).
LockConfig lock_config(const Scenario& s);

// Named scenarios reproducing the measurement configurations.
struct Preset {
    std::string_view name;
    std::string_view summary;
    std::string_view text;
};

const std::vector<Preset>& presets();
// Throws std::out_of_range for an unknown name.
Scenario preset_scenario(std::string_view name);

}  // namespace sqz
