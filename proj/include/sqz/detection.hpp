#pragma once

// Balanced homodyne detection chain: quadrature selection by the local
// oscillator phase, linear loss (beam-splitter model) and an additive
// electronic noise floor. All variances are relative to shot noise.

#include <optional>
#include <span>
#include <vector>

namespace sqz {

struct DetectionChain {
    double quantum_efficiency = 1.0;    // photodiode QE, (0, 1]
    double fringe_visibility = 1.0;     // signal/LO mode overlap, (0, 1]
    std::vector<double> propagation_losses;  // fractional power losses, each in [0, 1)
    double electronic_noise_rel = 0.0;  // electronic noise power / shot noise
    double homodyne_phase = 0.0;        // LO phase; 0 reads V+, pi/2 reads V-

    // Throws std::invalid_argument when a field is out of range.
    void validate() const;

    bool operator==(const DetectionChain&) const = default;
};

struct MeasuredVariancePair {
    double v_plus_meas = 1.0;
    double v_minus_meas = 1.0;
    std::optional<double> uncertainty;  // one sigma, applies to each variance
};

struct InferredPair {
    double v_plus = 1.0;
    double v_minus = 1.0;
    std::optional<double> sigma_plus;
    std::optional<double> sigma_minus;
    double purity = 1.0;
    std::optional<double> sigma_purity;
};

struct Purity {
    double product = 1.0;
    bool unphysical = false;  // product below 1 beyond tolerance
};

struct PhaseScanPoint {
    double theta = 0.0;
    double v_meas = 1.0;
};

// V(θ) = V+ cos²θ + V− sin²θ. No cross-quadrature correlations.
double homodyne_variance(double v_plus, double v_minus, double theta);

// QE × visibility² × Π(1 − loss_i).
double total_efficiency(const DetectionChain& chain);

// η·V + (1 − η) + electronic noise.
double apply_chain(double v_source, const DetectionChain& chain);

// Inverse of apply_chain. Throws UnphysicalMeasurement when the measured value
// is at or below the floor (1 − η) + electronic noise.
double infer_source(double v_meas, const DetectionChain& chain);

// Infers both quadratures and the source purity. Uncertainties, when given,
// propagate to first order: σ_source = σ_meas/η, σ_P² = (V−σ+)² + (V+σ−)².
InferredPair infer_pair(const MeasuredVariancePair& measured, const DetectionChain& chain);

Purity purity(double v_plus, double v_minus, double tolerance = 1e-9);

double to_db(double v);
double from_db(double db);

// Measured variance trace as the LO phase is scanned. The scan phase replaces
// the chain's homodyne_phase.
std::vector<PhaseScanPoint> phase_scan(double v_plus, double v_minus, const DetectionChain& chain,
                                       std::span<const double> theta_grid);

// Measured variance of a source pair read at the chain's own homodyne phase.
double measured_variance(double v_plus, double v_minus, const DetectionChain& chain);

}  // namespace sqz
