#include "sqz/lockloop.hpp"

#include "sqz/detection.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sqz {

void LockConfig::validate() const {
    if (!(dither_freq > 0.0)) throw std::invalid_argument("dither_freq must be > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(dt < 1.0 / (10.0 * dither_freq))) {
        throw std::invalid_argument("dt must be below 1/(10*dither_freq) = " + std::to_string(0.1 / dither_freq) + " s");
    }
    if (!(dither_amp > 0.0 && dither_amp < kPi / 4)) throw std::invalid_argument("dither_amp must be in (0, pi/4)");
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be > 0");
    if (duration / dt > 1e7) throw std::invalid_argument("duration/dt exceeds 1e7 steps");
    if (!(lowpass_corner > 0.0)) throw std::invalid_argument("lowpass_corner must be > 0");
    if (!(meter_bandwidth > 0.0)) throw std::invalid_argument("meter_bandwidth must be > 0 (inf for noiseless)");
    if (!(v_plus > 0.0 && v_minus > 0.0)) throw std::invalid_argument("variance pair must be positive");
    if (!std::isfinite(loop_gain) || !std::isfinite(demod_phase) || !std::isfinite(initial_phase)) {
        throw std::invalid_argument("loop_gain, demod_phase and initial_phase must be finite");
    }
    if (!(settle_band > 0.0) || !(converge_tolerance > 0.0)) {
        throw std::invalid_argument("settle_band and converge_tolerance must be > 0");
    }
    if (record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
}

std::size_t LockConfig::step_count() const { return static_cast<std::size_t>(std::llround(duration / dt)); }

double LockConfig::meter_relative_noise() const {
    if (std::isinf(meter_bandwidth)) return 0.0;
    return 1.0 / std::sqrt(meter_bandwidth * dt);
}

double noise_power_meter(double theta, const LockConfig& config, std::mt19937_64& rng) {
    const double v = homodyne_variance(config.v_plus, config.v_minus, theta);
    const double sigma = config.meter_relative_noise();
    if (sigma == 0.0) return v;
    std::normal_distribution<double> gauss(0.0, 1.0);
    return v * (1.0 + sigma * gauss(rng));
}

double error_signal_model(double theta, const LockConfig& config) {
    const double slope = -(config.v_plus - config.v_minus) * std::sin(2.0 * theta);
    return config.dither_amp * std::cos(config.demod_phase) * slope;
}

double monotone_gain_bound(const LockConfig& config) {
    const double spread = std::abs(config.v_plus - config.v_minus);
    if (spread == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (8.0 * config.dither_amp * spread);
}

namespace {

LockTarget target_for(const LockConfig& c) {
    if (c.loop_gain == 0.0 || c.v_plus == c.v_minus) return LockTarget::none;
    return c.loop_gain > 0.0 ? LockTarget::minimum : LockTarget::maximum;
}

// Phase of the targeted extremum modulo pi.
double target_base(const LockConfig& c, LockTarget target) {
    const bool min_at_half_pi = c.v_plus > c.v_minus;
    const bool want_half_pi = (target == LockTarget::minimum) == min_at_half_pi;
    return want_half_pi ? kPi / 2 : 0.0;
}

double wrap_offset(double theta, double base) {
    const double d = theta - base;
    return d - kPi * std::round(d / kPi);
}

}  // namespace

LockTrace simulate_lock(const LockConfig& config, const Disturbance& disturbance, std::uint64_t rng_seed) {
    config.validate();
    const std::size_t steps = config.step_count();
    const double sigma = config.meter_relative_noise();
    const double w_d = kTwoPi * config.dither_freq;
    const double w_c = kTwoPi * config.lowpass_corner;
    const double smoothing = 1.0 - std::exp(-w_c * config.dt);
    const double integrator = config.loop_gain * w_c * config.dt;

    const LockTarget target = target_for(config);
    const double base = target == LockTarget::none ? 0.0 : target_base(config, target);

    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    LockTrace trace;
    trace.samples.reserve(steps / config.record_stride + 1);
    LockSummary& s = trace.summary;
    s.target = target;

    double theta_ctrl = config.initial_phase;
    double error = 0.0;
    const std::size_t half = steps / 2;
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t tail = 0;
    double last_exit = 0.0;
    double phase = 0.0;

    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * config.dt;
        const double dist = disturbance ? disturbance(t) : 0.0;
        const double dither = config.dither_amp * std::sin(w_d * t);
        const double theta_total = theta_ctrl + dither + dist;

        double meter = homodyne_variance(config.v_plus, config.v_minus, theta_total);
        if (sigma > 0.0) meter *= 1.0 + sigma * gauss(rng);
        const double mixed = 2.0 * meter * std::sin(w_d * t + config.demod_phase);
        error += smoothing * (mixed - error);

        if (n % config.record_stride == 0) trace.samples.push_back({t, theta_total, dist, error, theta_ctrl});

        phase = theta_ctrl + dist;
        const double offset = target == LockTarget::none ? phase - config.initial_phase : wrap_offset(phase, base);
        if (std::abs(offset) > config.settle_band) last_exit = t + config.dt;
        if (n >= half) {
            sum += offset;
            sum_sq += offset * offset;
            ++tail;
        }

        theta_ctrl -= integrator * error;
        if (!std::isfinite(theta_ctrl) || !std::isfinite(error)) {
            s.diverged = true;
            break;
        }
    }

    if (tail > 0) {
        s.mean_offset = sum / static_cast<double>(tail);
        s.residual_rms = std::sqrt(sum_sq / static_cast<double>(tail));
    }
    s.settle_time = last_exit;
    if (target != LockTarget::none) {
        s.lock_point = base + kPi * std::round((phase - base) / kPi);
        s.converged = !s.diverged && tail > 0 && std::abs(s.mean_offset) < config.converge_tolerance &&
                      s.residual_rms < config.settle_band;
    }
    return trace;
}

Disturbance drift_disturbance(double rate_rad_per_s, double t_start) {
    return [rate_rad_per_s, t_start](double t) { return t > t_start ? rate_rad_per_s * (t - t_start) : 0.0; };
}

std::size_t bin_containing(const MeasuredTrace& trace, double f) {
    std::size_t best = trace.bins.size();
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trace.bins.size(); ++i) {
        const auto& b = trace.bins[i];
        const double half = 0.5 * trace.rbw_of(b);
        if (f < b.frequency - half || f >= b.frequency + half) continue;
        const double d = std::abs(f - b.frequency);
        if (d < best_distance) {
            best_distance = d;
            best = i;
        }
    }
    if (best == trace.bins.size()) {
        throw std::invalid_argument("frequency " + std::to_string(f) + " Hz is outside the trace span");
    }
    return best;
}

MeasuredTrace inject_lock_artifact(const MeasuredTrace& trace, double dither_freq, double amplitude) {
    if (!(amplitude >= 0.0)) throw std::invalid_argument("lock artifact amplitude must be >= 0");
    const std::size_t i = bin_containing(trace, dither_freq);
    MeasuredTrace out = trace;
    out.bins[i].power += amplitude;
    return out;
}

}  // namespace sqz
