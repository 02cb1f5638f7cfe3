#include "sqz/detection.hpp"

#include "sqz/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sqz {

void DetectionChain::validate() const {
    if (!(quantum_efficiency > 0.0 && quantum_efficiency <= 1.0)) {
        throw std::invalid_argument("quantum_efficiency must be in (0, 1]");
    }
    if (!(fringe_visibility > 0.0 && fringe_visibility <= 1.0)) {
        throw std::invalid_argument("fringe_visibility must be in (0, 1]");
    }
    for (double loss : propagation_losses) {
        if (!(loss >= 0.0 && loss < 1.0)) throw std::invalid_argument("propagation loss must be in [0, 1)");
    }
    if (!std::isfinite(electronic_noise_rel) || electronic_noise_rel < 0.0) {
        throw std::invalid_argument("electronic_noise_rel must be >= 0");
    }
    if (!std::isfinite(homodyne_phase)) throw std::invalid_argument("homodyne_phase must be finite");
}

double homodyne_variance(double v_plus, double v_minus, double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return v_plus * c * c + v_minus * s * s;
}

double total_efficiency(const DetectionChain& chain) {
    double eta = chain.quantum_efficiency * chain.fringe_visibility * chain.fringe_visibility;
    for (double loss : chain.propagation_losses) eta *= 1.0 - loss;
    return eta;
}

double apply_chain(double v_source, const DetectionChain& chain) {
    const double eta = total_efficiency(chain);
    return eta * v_source + (1.0 - eta) + chain.electronic_noise_rel;
}

double infer_source(double v_meas, const DetectionChain& chain) {
    const double eta = total_efficiency(chain);
    const double floor = (1.0 - eta) + chain.electronic_noise_rel;
    if (!(v_meas > floor)) {
        throw UnphysicalMeasurement("measured variance " + std::to_string(v_meas) +
                                    " is not above the detection floor " + std::to_string(floor) +
                                    " (efficiency overestimated or electronic noise not subtracted?)");
    }
    return (v_meas - chain.electronic_noise_rel - (1.0 - eta)) / eta;
}

InferredPair infer_pair(const MeasuredVariancePair& measured, const DetectionChain& chain) {
    InferredPair out;
    out.v_plus = infer_source(measured.v_plus_meas, chain);
    out.v_minus = infer_source(measured.v_minus_meas, chain);
    out.purity = out.v_plus * out.v_minus;
    if (measured.uncertainty) {
        const double eta = total_efficiency(chain);
        const double s = *measured.uncertainty / eta;
        out.sigma_plus = s;
        out.sigma_minus = s;
        out.sigma_purity = std::hypot(out.v_minus * s, out.v_plus * s);
    }
    return out;
}

Purity purity(double v_plus, double v_minus, double tolerance) {
    const double p = v_plus * v_minus;
    return {p, p < 1.0 - tolerance};
}

double to_db(double v) { return 10.0 * std::log10(v); }

double from_db(double db) { return std::pow(10.0, db / 10.0); }

std::vector<PhaseScanPoint> phase_scan(double v_plus, double v_minus, const DetectionChain& chain,
                                       std::span<const double> theta_grid) {
    if (theta_grid.empty()) throw std::invalid_argument("theta grid is empty");
    std::vector<PhaseScanPoint> out;
    out.reserve(theta_grid.size());
    for (double theta : theta_grid) {
        out.push_back({theta, apply_chain(homodyne_variance(v_plus, v_minus, theta), chain)});
    }
    return out;
}

double measured_variance(double v_plus, double v_minus, const DetectionChain& chain) {
    return apply_chain(homodyne_variance(v_plus, v_minus, chain.homodyne_phase), chain);
}

}  // namespace sqz
