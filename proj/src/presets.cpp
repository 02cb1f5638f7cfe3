#include "sqz/scenario.hpp"

#include <stdexcept>
#include <string>

namespace sqz {

namespace {

// Cavity shared by all presets: 8 MHz total linewidth, escape efficiency
// 0.8975, non-resonant pump, classical gain 5. At low sideband frequency the
// unseeded OPO gives V- = 0.282 (-5.5 dB) and V+V- = 1.29 at the output.
constexpr std::string_view kOpoFig2 = R"(# Unseeded OPO, 100 Hz - 100 kHz squeezing spectrum from three FFT windows.
[scenario]
name = opo-fig2
seed = 2004

[cavity]
kappa_in_hz = 5e4
kappa_out_hz = 7.18e6
kappa_loss_hz = 7.7e5
kappa_b_hz = 1e10
kappa_in_b_hz = 9.6e9
epsilon_hz = 100
classical_gain = 5
wavelength_nm = 1064

[seed]
power_w = 0

[detection]
quantum_efficiency = 0.93
fringe_visibility = 0.965
losses = 0.09                 # Faraday isolator
electronic_noise_db = -12
homodyne_phase_rad = 1.5707963267948966

[analyzer]
windows = 100:3200:8:500, 1600:12800:32:1000, 3800:100000:128:2000
mains_hz = 50
mains_harmonics = 20
mains_half_width_hz = 4
mains_line_sigma_hz = 1
mains_lines = 50:-3, 100:-6, 150:10, 250:8
lock_peak_hz = 20000
lock_peak_power = 0.5
)";

// Seeded OPA. Pump and detuning noise reach the output through the
// intracavity field, so the excess grows linearly with seed power.
constexpr std::string_view kOpaFig5 = R"(# Seeded OPA, 2-100 kHz spectra and 5-6 kHz band power versus seed power.
[scenario]
name = opa-fig5
seed = 2005

[cavity]
kappa_in_hz = 5e4
kappa_out_hz = 7.18e6
kappa_loss_hz = 7.7e5
kappa_b_hz = 1e10
kappa_in_b_hz = 9.6e9
epsilon_hz = 100
classical_gain = 5
wavelength_nm = 1064

[seed]
power_w = 1e-9

[pump]
floor_db = 79
peaks = 8000:150:99, 34000:300:112

[detuning]
level_db = 50
corner_hz = 2000

[detection]
quantum_efficiency = 0.93
fringe_visibility = 0.965
losses = none
electronic_noise_db = -12
homodyne_phase_rad = 1.5707963267948966

[analyzer]
windows = 2000:100000:128:1000
mains_harmonics = 0
lock_peak_hz = off

[sweep]
powers_w = 1e-9, 7e-7, 6e-6
band_lo_hz = 5000
band_hi_hz = 6000
window = 2000:100000:128:1000
)";

// Unseeded OPO contaminated by ~1 pW of LO light scattered back off the
// photodetectors; the scattered light carries acoustic noise at 300-700 Hz.
constexpr std::string_view kBackscatterFig4 = R"(# OPO 100 Hz - 3.2 kHz with and without the Faraday isolator.
[scenario]
name = backscatter-fig4
seed = 2006

[cavity]
kappa_in_hz = 5e4
kappa_out_hz = 7.18e6
kappa_loss_hz = 7.7e5
kappa_b_hz = 1e10
kappa_in_b_hz = 9.6e9
epsilon_hz = 100
classical_gain = 5
wavelength_nm = 1064

[seed]
power_w = 0

[detection]
quantum_efficiency = 0.93
fringe_visibility = 0.965
losses = none
electronic_noise_db = -12
homodyne_phase_rad = 1.5707963267948966

[analyzer]
windows = 100:3200:8:500
mains_hz = 50
mains_harmonics = 20
mains_half_width_hz = 4
mains_lines = 150:10, 250:8
lock_peak_hz = off

[backscatter]
enabled = true
power_w = 1e-12
isolator_loss = 0.09
peaks = 350:20:30, 480:25:28, 620:20:30
window = 100:3200:8:500
n_avg_no_isolator = 400
band_lo_hz = 300
band_hi_hz = 700
)";

// Homodyne phase scan at 11.2 kHz and inference of the source state.
constexpr std::string_view kPhaseFig3 = R"(# OPO state at 11.2 kHz versus homodyne phase; source inference.
[scenario]
name = phase-fig3
seed = 2007

[cavity]
kappa_in_hz = 5e4
kappa_out_hz = 7.18e6
kappa_loss_hz = 7.7e5
kappa_b_hz = 1e10
kappa_in_b_hz = 9.6e9
epsilon_hz = 100
classical_gain = 5
wavelength_nm = 1064

[seed]
power_w = 0

[detection]
quantum_efficiency = 0.93
fringe_visibility = 0.965
losses = 0.09
electronic_noise_db = -12
homodyne_phase_rad = 1.5707963267948966

[phase_scan]
frequency_hz = 11200
points = 361
theta_start_rad = 0
theta_stop_rad = 6.283185307179586
electronic_noise_db = -9
n_avg = 0

[infer]
v_plus = 3.687
v_minus = 0.434
uncertainty = 0.054
electronic_subtracted = true
)";

// Noise lock on a (4, 0.25) pair, starting 0.3 rad off the squeezed quadrature.
constexpr std::string_view kLockDefault = R"(# Dither lock of the homodyne phase.
[scenario]
name = lock-default
seed = 2008

[lock]
dither_hz = 20000
dither_amp_rad = 0.1
demod_phase_rad = 0
lowpass_hz = 10
gain = 0.25
dt_s = 4e-6
duration_s = 10
meter_bandwidth_hz = 300000
initial_phase_rad = 1.8707963267948966
settle_band_rad = 0.05
converge_tolerance_rad = 0.02
record_stride = 25
v_plus = 4
v_minus = 0.25
)";

}  // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = {
        {"opo-fig2", "unseeded OPO spectrum, 100 Hz - 100 kHz, three stitched windows", kOpoFig2},
        {"opa-fig5", "seeded OPA with pump/detuning noise; seed power sweep at 5-6 kHz", kOpaFig5},
        {"backscatter-fig4", "OPO seeded by ~1 pW LO backscatter, with and without isolator", kBackscatterFig4},
        {"phase-fig3", "homodyne phase scan at 11.2 kHz and source inference", kPhaseFig3},
        {"lock-default", "noise-dither lock acquisition from 0.3 rad offset", kLockDefault},
    };
    return all;
}

Scenario preset_scenario(std::string_view name) {
    for (const auto& p : presets()) {
        if (p.name == name) return parse_scenario(p.text);
    }
    throw std::out_of_range("unknown preset `" + std::string(name) + "`");
}

}  // namespace sqz
