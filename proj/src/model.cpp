#include "sqz/model.hpp"

#include "sqz/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sqz {

namespace {

void require_rate(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0) {
        throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
    }
}

double checked_density(const SpectralDensity& density, double omega, const char* name) {
    const double v = density(omega);
    if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument(std::string("noise input ") + name +
                                    " is negative or non-finite at omega=" + std::to_string(omega));
    }
    return v;
}

}  // namespace

void CavityRates::validate() const {
    require_rate(kappa_in_a, "kappa_in_a");
    require_rate(kappa_out_a, "kappa_out_a");
    require_rate(kappa_l_a, "kappa_l_a");
    require_rate(kappa_b, "kappa_b");
    require_rate(kappa_in_b, "kappa_in_b");
    require_rate(epsilon, "epsilon");
    if (!(kappa_a() > 0.0)) throw std::invalid_argument("kappa_a must be > 0");
    if (!(kappa_b > 0.0)) throw std::invalid_argument("kappa_b must be > 0");
    if (kappa_in_b > kappa_b) throw std::invalid_argument("kappa_in_b must not exceed kappa_b");
}

CavityParams::CavityParams(const CavityRates& rates, double alpha, double beta)
    : rates_(rates), alpha_(alpha), beta_(beta) {
    rates_.validate();
    if (!std::isfinite(alpha) || alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    if (!std::isfinite(beta) || beta < 0.0) throw std::invalid_argument("beta must be >= 0");
    if (coupling() >= kappa_a()) {
        throw ThresholdError("parametric coupling epsilon*beta=" + std::to_string(coupling()) +
                             " is at or above threshold kappa_a=" + std::to_string(kappa_a()));
    }
}

double SpectralShape::operator()(double omega) const {
    double v = floor;
    if (lowpass_level != 0.0) {
        const double r = omega / corner;
        v += lowpass_level / (1.0 + r * r);
    }
    for (const auto& p : peaks) {
        const double hw = 0.5 * p.width;
        const double d = omega - p.center;
        v += p.height * hw * hw / (d * d + hw * hw);
    }
    return v;
}

NoiseInputs::NoiseInputs()
    : seed_plus(constant_density(1.0)),
      seed_minus(constant_density(1.0)),
      pump_plus(constant_density(1.0)),
      pump_minus(constant_density(1.0)),
      loss(constant_density(1.0)),
      vac(constant_density(1.0)),
      detuning(constant_density(0.0)) {}

SpectralDensity constant_density(double value) {
    return [value](double) { return value; };
}

SpectralDensity vacuum_plus(SpectralShape excess, double scale) {
    return [excess = std::move(excess), scale](double omega) { return 1.0 + scale * excess(omega); };
}

std::complex<double> denominator(const CavityParams& params, Quadrature quad, double omega) {
    const auto& r = params.rates();
    const bool amp = quad == Quadrature::amplitude;
    const double a = params.alpha();
    const double back_conversion = (amp ? 3.0 : 1.0) * r.epsilon * r.epsilon * a * a / (2.0 * r.kappa_b);
    const double parametric = amp ? -params.coupling() : params.coupling();
    return {params.kappa_a() + back_conversion + parametric, omega};
}

Couplings coupling_coefficients(const CavityParams& params, Quadrature quad, double omega) {
    const auto& r = params.rates();
    const double ratio = r.epsilon / r.kappa_b;
    Couplings c;
    c.c_s = 4.0 * r.kappa_in_a * r.kappa_out_a;
    c.c_l = 4.0 * r.kappa_l_a * r.kappa_out_a;
    c.c_v = std::norm(2.0 * r.kappa_out_a - denominator(params, quad, omega));
    c.c_p = 4.0 * r.kappa_out_a * r.kappa_in_b * ratio * ratio;
    c.c_delta = quad == Quadrature::amplitude ? 0.0 : 8.0 * r.kappa_out_a;
    return c;
}

double quadrature_variance(const CavityParams& params, const NoiseInputs& noise, Quadrature quad,
                           double omega) {
    const bool amp = quad == Quadrature::amplitude;
    const Couplings c = coupling_coefficients(params, quad, omega);
    const double v_seed = checked_density(amp ? noise.seed_plus : noise.seed_minus, omega, "seed");
    const double v_loss = checked_density(noise.loss, omega, "loss");
    const double v_vac = checked_density(noise.vac, omega, "vac");
    const double v_pump = checked_density(amp ? noise.pump_plus : noise.pump_minus, omega, "pump");
    const double v_det = checked_density(noise.detuning, omega, "detuning");

    const double a2 = params.alpha() * params.alpha();
    const double numerator =
        c.c_s * v_seed + c.c_l * v_loss + c.c_v * v_vac + a2 * (c.c_p * v_pump + c.c_delta * v_det);
    const double v = numerator / std::norm(denominator(params, quad, omega));
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError("quadrature variance is not positive at omega=" + std::to_string(omega));
    }
    return v;
}

QuadratureSpectrum squeezing_spectrum(const CavityParams& params, const NoiseInputs& noise,
                                      std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("frequency grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("frequency grid must be strictly ascending");
    }
    QuadratureSpectrum out;
    out.frequencies.assign(grid.begin(), grid.end());
    out.v_plus.reserve(grid.size());
    out.v_minus.reserve(grid.size());
    for (double w : grid) {
        out.v_plus.push_back(quadrature_variance(params, noise, Quadrature::amplitude, w));
        out.v_minus.push_back(quadrature_variance(params, noise, Quadrature::phase, w));
    }
    return out;
}

double coupling_for_gain(double classical_gain, double kappa_a) {
    if (!std::isfinite(classical_gain) || classical_gain < 1.0) {
        throw std::invalid_argument("classical gain must be >= 1");
    }
    const double root = std::sqrt(classical_gain);
    return kappa_a * (root - 1.0) / (root + 1.0);
}

CavityParams intracavity_fields(double seed_power, double classical_gain, const CavityRates& rates,
                                double carrier_omega) {
    rates.validate();
    if (!std::isfinite(seed_power) || seed_power < 0.0) throw std::invalid_argument("seed power must be >= 0");
    if (!(carrier_omega > 0.0)) throw std::invalid_argument("carrier frequency must be > 0");

    const double ka = rates.kappa_a();
    const double coupling = coupling_for_gain(classical_gain, ka);
    if (coupling >= ka) throw ThresholdError("classical gain implies operation at or above threshold");

    double beta = 0.0;
    if (coupling > 0.0) {
        if (rates.epsilon == 0.0) throw std::invalid_argument("classical gain > 1 requires epsilon > 0");
        beta = coupling / rates.epsilon;
    }

    double alpha = 0.0;
    if (seed_power > 0.0) {
        const double photon_flux = seed_power / (kHbar * carrier_omega);
        alpha = std::sqrt(2.0 * rates.kappa_in_a) * std::sqrt(photon_flux) / (ka - coupling);
    }
    return CavityParams(rates, alpha, beta);
}

double classical_gain(const CavityParams& params) {
    const double ka = params.kappa_a();
    const double r = (ka + params.coupling()) / (ka - params.coupling());
    return r * r;
}

double threshold_margin(const CavityParams& params) { return params.coupling() / params.kappa_a(); }

}  // namespace sqz
