#pragma once

// Linearized quadrature-noise model of a singly resonant, on-resonance
// OPO/OPA below threshold.
//
// All rates and sideband frequencies are angular (rad/s). Variances are
// normalized to the vacuum (shot-noise) level, so a coherent or vacuum input
// has V = 1.
//
//   V±(ω) = [C_s V_s± + C_l V_l± + C_v±(ω) V_v± + α² (C_p V_p± + C_Δ± V_Δ)] / |D±(ω)|²
//   D±(ω) = iω + κ_a + {3,1} ε²α²/(2κ_b) ∓ εβ
//
// The + quadrature is the amplitude quadrature (anti-squeezed for real β),
// the − quadrature is the phase quadrature (squeezed).

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace sqz {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kHbar = 1.054571817e-34;        // J s
inline constexpr double kSpeedOfLight = 299792458.0;    // m/s

inline constexpr double hz_to_rad(double hz) { return kTwoPi * hz; }
inline constexpr double rad_to_hz(double rad_per_s) { return rad_per_s / kTwoPi; }

enum class Quadrature { amplitude, phase };

// Cavity decay rates and nonlinearity, everything except the intracavity fields.
struct CavityRates {
    double kappa_in_a = 0.0;   // fundamental, input coupler
    double kappa_out_a = 0.0;  // fundamental, output coupler
    double kappa_l_a = 0.0;    // fundamental, intracavity loss
    double kappa_b = 1.0;      // second harmonic, total
    double kappa_in_b = 0.0;   // second harmonic, input coupler
    double epsilon = 0.0;      // nonlinear coupling

    double kappa_a() const noexcept { return kappa_in_a + kappa_out_a + kappa_l_a; }

    // Throws std::invalid_argument on negative/non-finite rates, kappa_a <= 0,
    // kappa_b <= 0 or kappa_in_b > kappa_b.
    void validate() const;

    bool operator==(const CavityRates&) const = default;
};

// One validated OPO/OPA operating point. Construction rejects parameter sets
// at or above threshold with ThresholdError.
class CavityParams {
public:
    CavityParams(const CavityRates& rates, double alpha, double beta);

    const CavityRates& rates() const noexcept { return rates_; }
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double kappa_a() const noexcept { return rates_.kappa_a(); }
    // ε·β, the parametric coupling rate.
    double coupling() const noexcept { return rates_.epsilon * beta_; }

private:
    CavityRates rates_;
    double alpha_;
    double beta_;
};

// Spectral density as a function of sideband frequency ω (rad/s), relative to vacuum.
using SpectralDensity = std::function<double(double)>;

// Lorentzian line; center and full width at half maximum in rad/s.
struct Peak {
    double center = 0.0;
    double width = 1.0;
    double height = 0.0;

    bool operator==(const Peak&) const = default;
};

// floor + lowpass_level / (1 + (ω/corner)²) + Σ Lorentzian peaks.
// The lowpass term is the acoustic-type 1/ω² shape above its corner.
struct SpectralShape {
    double floor = 0.0;
    double lowpass_level = 0.0;
    double corner = 1.0;
    std::vector<Peak> peaks;

    double operator()(double omega) const;
};

struct NoiseInputs {
    SpectralDensity seed_plus;
    SpectralDensity seed_minus;
    SpectralDensity pump_plus;
    SpectralDensity pump_minus;
    SpectralDensity loss;
    SpectralDensity vac;
    SpectralDensity detuning;

    // Vacuum for every field input and no detuning noise.
    NoiseInputs();
};

SpectralDensity constant_density(double value);

// 1 + scale * excess(ω): a vacuum-normalized input carrying technical noise.
SpectralDensity vacuum_plus(SpectralShape excess, double scale = 1.0);

struct QuadratureSpectrum {
    std::vector<double> frequencies;  // rad/s, strictly ascending
    std::vector<double> v_plus;
    std::vector<double> v_minus;

    std::size_t size() const noexcept { return frequencies.size(); }
};

struct Couplings {
    double c_s = 0.0;
    double c_l = 0.0;
    double c_v = 0.0;
    double c_p = 0.0;
    double c_delta = 0.0;
};

std::complex<double> denominator(const CavityParams& params, Quadrature quad, double omega);

Couplings coupling_coefficients(const CavityParams& params, Quadrature quad, double omega);

// Single-frequency evaluation of the variance model.
double quadrature_variance(const CavityParams& params, const NoiseInputs& noise, Quadrature quad,
                           double omega);

// Evaluates both quadratures on an ascending grid. Throws std::invalid_argument
// for an empty or non-ascending grid or negative noise inputs.
QuadratureSpectrum squeezing_spectrum(const CavityParams& params, const NoiseInputs& noise,
                                      std::span<const double> grid);

// Parametric coupling εβ that yields classical intensity gain G of the
// amplified quadrature at ω = 0: εβ = κ_a (√G − 1)/(√G + 1).
double coupling_for_gain(double classical_gain, double kappa_a);

// Builds the operating point for a given seed power (W) and classical gain.
// α follows the amplified steady state driven through the input coupler and is
// exactly 0 for an unseeded cavity. Carrier frequency in rad/s.
CavityParams intracavity_fields(double seed_power, double classical_gain, const CavityRates& rates,
                                double carrier_omega);

// ((κ_a + εβ)/(κ_a − εβ))², inverse of coupling_for_gain.
double classical_gain(const CavityParams& params);

// εβ/κ_a, always in [0, 1).
double threshold_margin(const CavityParams& params);

}  // namespace sqz
