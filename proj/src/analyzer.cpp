#include "sqz/analyzer.hpp"

#include "sqz/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace sqz {

void WindowPlan::validate() const {
    if (!std::isfinite(f_start) || !std::isfinite(f_stop) || !(f_start < f_stop)) {
        throw std::invalid_argument("window requires f_start < f_stop");
    }
    if (!(rbw > 0.0)) throw std::invalid_argument("window rbw must be > 0");
    if (n_avg < 1) throw std::invalid_argument("window n_avg must be >= 1");
}

std::size_t WindowPlan::bin_count() const {
    const double span = (f_stop - f_start) / rbw;
    const double nearest = std::round(span);
    if (std::abs(span - nearest) < 1e-9 * std::max(1.0, span)) return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::ceil(span));
}

std::size_t MeasuredTrace::masked_count() const {
    return static_cast<std::size_t>(
        std::count_if(bins.begin(), bins.end(), [](const TraceBin& b) { return b.masked; }));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

MeasuredTrace empty_trace(const WindowPlan& plan, std::uint64_t seed) {
    plan.validate();
    MeasuredTrace t;
    t.windows = {plan};
    t.rng_seed = seed;
    t.bins.reserve(plan.bin_count());
    return t;
}

double checked_psd(const PowerSpectrum& psd, double f) {
    const double v = psd(f);
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("true PSD must be positive, got " + std::to_string(v) + " at " +
                                    std::to_string(f) + " Hz");
    }
    return v;
}

bool same_frequency(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

void check_grids(const MeasuredTrace& a, const MeasuredTrace& b) {
    if (a.bins.size() != b.bins.size()) {
        throw GridMismatch("traces have " + std::to_string(a.bins.size()) + " and " +
                           std::to_string(b.bins.size()) + " bins");
    }
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
        if (!same_frequency(a.bins[i].frequency, b.bins[i].frequency)) {
            throw GridMismatch("bin " + std::to_string(i) + " frequencies differ: " +
                               std::to_string(a.bins[i].frequency) + " vs " + std::to_string(b.bins[i].frequency));
        }
    }
}

}  // namespace

MeasuredTrace evaluate_plan(const PowerSpectrum& true_psd, const WindowPlan& plan) {
    MeasuredTrace t = empty_trace(plan, 0);
    const std::size_t n = plan.bin_count();
    for (std::size_t k = 0; k < n; ++k) {
        const double f = plan.bin_center(k);
        t.bins.push_back({f, checked_psd(true_psd, f), false, 0});
    }
    return t;
}

MeasuredTrace synthesize_measurement(const PowerSpectrum& true_psd, const WindowPlan& plan,
                                     std::uint64_t rng_seed) {
    MeasuredTrace t = empty_trace(plan, rng_seed);
    std::mt19937_64 rng(rng_seed);
    // Mean of n_avg unit-mean exponentials.
    std::gamma_distribution<double> averaged(static_cast<double>(plan.n_avg), 1.0 / plan.n_avg);
    const std::size_t n = plan.bin_count();
    for (std::size_t k = 0; k < n; ++k) {
        const double f = plan.bin_center(k);
        t.bins.push_back({f, checked_psd(true_psd, f) * averaged(rng), false, 0});
    }
    return t;
}

MeasuredTrace stitch(std::span<const MeasuredTrace> traces) {
    if (traces.empty()) throw std::invalid_argument("nothing to stitch");

    struct Source {
        WindowPlan plan;
        const MeasuredTrace* trace;
        int local_id;
    };
    std::vector<Source> sources;
    for (const auto& t : traces) {
        for (std::size_t w = 0; w < t.windows.size(); ++w) {
            sources.push_back({t.windows[w], &t, static_cast<int>(w)});
        }
    }

    // Spans must connect when walked in order of start frequency.
    std::vector<std::size_t> by_start(sources.size());
    std::iota(by_start.begin(), by_start.end(), std::size_t{0});
    std::stable_sort(by_start.begin(), by_start.end(),
                     [&](std::size_t a, std::size_t b) { return sources[a].plan.f_start < sources[b].plan.f_start; });
    double reach = sources[by_start.front()].plan.f_stop;
    for (std::size_t i = 1; i < by_start.size(); ++i) {
        const auto& p = sources[by_start[i]].plan;
        if (p.f_start > reach) {
            throw CoverageError("gap between windows: nothing covers " + std::to_string(reach) + " Hz to " +
                                std::to_string(p.f_start) + " Hz");
        }
        reach = std::max(reach, p.f_stop);
    }

    std::vector<std::size_t> by_rbw(sources.size());
    std::iota(by_rbw.begin(), by_rbw.end(), std::size_t{0});
    std::stable_sort(by_rbw.begin(), by_rbw.end(),
                     [&](std::size_t a, std::size_t b) { return sources[a].plan.rbw < sources[b].plan.rbw; });

    MeasuredTrace out;
    out.rng_seed = traces.front().rng_seed;
    for (const auto& s : sources) out.windows.push_back(s.plan);

    std::vector<std::pair<double, double>> claimed;
    for (std::size_t idx : by_rbw) {
        const Source& s = sources[idx];
        for (const TraceBin& b : s.trace->bins) {
            if (b.window_id != s.local_id) continue;
            const bool taken = std::any_of(claimed.begin(), claimed.end(), [&](const auto& span) {
                return b.frequency >= span.first && b.frequency <= span.second;
            });
            if (taken) continue;
            TraceBin kept = b;
            kept.window_id = static_cast<int>(idx);
            out.bins.push_back(kept);
        }
        claimed.emplace_back(s.plan.f_start, s.plan.covered_stop());
    }
    std::stable_sort(out.bins.begin(), out.bins.end(),
                     [](const TraceBin& a, const TraceBin& b) { return a.frequency < b.frequency; });
    for (std::size_t i = 1; i < out.bins.size(); ++i) {
        if (!(out.bins[i].frequency > out.bins[i - 1].frequency)) {
            throw CoverageError("stitched bins are not strictly ascending at " +
                                std::to_string(out.bins[i].frequency) + " Hz");
        }
    }
    return out;
}

MeasuredTrace subtract_electronic(const MeasuredTrace& measured, const MeasuredTrace& electronic) {
    check_grids(measured, electronic);
    MeasuredTrace out = measured;
    for (std::size_t i = 0; i < out.bins.size(); ++i) {
        TraceBin& b = out.bins[i];
        const double e = electronic.bins[i].power;
        if (e >= b.power) {
            b.power = 0.0;
            b.masked = true;
        } else {
            b.power -= e;
        }
    }
    return out;
}

MeasuredTrace add_electronic(const MeasuredTrace& measured, const MeasuredTrace& electronic) {
    check_grids(measured, electronic);
    MeasuredTrace out = measured;
    for (std::size_t i = 0; i < out.bins.size(); ++i) out.bins[i].power += electronic.bins[i].power;
    return out;
}

MeasuredTrace mask_mains(const MeasuredTrace& trace, double fundamental, int n_harmonics, double half_width) {
    if (n_harmonics < 0) throw std::invalid_argument("n_harmonics must be >= 0");
    if (n_harmonics == 0) return trace;
    if (!(fundamental > 0.0)) throw std::invalid_argument("mains fundamental must be > 0");
    double finest = 0.0;
    for (const auto& w : trace.windows) finest = finest == 0.0 ? w.rbw : std::min(finest, w.rbw);
    if (half_width < 0.5 * finest) {
        throw std::invalid_argument("mask half_width must be at least half the finest bin spacing");
    }
    MeasuredTrace out = trace;
    for (TraceBin& b : out.bins) {
        const double reach = 0.5 * out.rbw_of(b) + half_width;
        const long k_lo = std::max(1L, static_cast<long>(std::floor((b.frequency - reach) / fundamental)));
        const long k_hi = std::min(static_cast<long>(n_harmonics),
                                   static_cast<long>(std::ceil((b.frequency + reach) / fundamental)));
        for (long k = k_lo; k <= k_hi; ++k) {
            if (std::abs(b.frequency - static_cast<double>(k) * fundamental) < reach) {
                b.masked = true;
                break;
            }
        }
    }
    return out;
}

double band_mean_power(const MeasuredTrace& trace, double f_lo, double f_hi) {
    if (!(f_lo <= f_hi)) throw EmptyBand("band requires f_lo <= f_hi");
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& b : trace.bins) {
        if (b.masked || b.frequency < f_lo || b.frequency > f_hi) continue;
        sum += b.power;
        ++n;
    }
    if (n == 0) {
        throw EmptyBand("no unmasked bins between " + std::to_string(f_lo) + " Hz and " + std::to_string(f_hi) + " Hz");
    }
    return sum / static_cast<double>(n);
}

LineFit fit_line(std::span<const double> xs, std::span<const double> ys, std::span<const double> sigmas) {
    if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("fit_line needs >= 2 matching points");
    if (!sigmas.empty() && sigmas.size() != xs.size()) throw std::invalid_argument("sigma count mismatch");
    const double n = static_cast<double>(xs.size());
    const double x_mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double y_mean = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - x_mean;
        sxx += dx * dx;
        sxy += dx * (ys[i] - y_mean);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_line needs at least two distinct x values");

    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = y_mean - fit.slope * x_mean;
    double rss = 0.0;
    double yy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.slope * xs[i] + fit.intercept);
        rss += r * r;
        yy += ys[i] * ys[i];
    }
    fit.residual_norm = std::sqrt(rss);
    fit.relative_residual = yy > 0.0 ? fit.residual_norm / std::sqrt(yy) : 0.0;
    if (!sigmas.empty()) {
        double var = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double w = (xs[i] - x_mean) / sxx;
            var += w * w * sigmas[i] * sigmas[i];
        }
        fit.slope_sigma = std::sqrt(var);
    }
    return fit;
}

SweepResult seed_sweep(const SweepModel& model, std::span<const double> seed_powers,
                       std::optional<std::uint64_t> rng_seed) {
    if (seed_powers.size() < 3) throw std::invalid_argument("seed sweep needs at least 3 seed powers");
    if (!model.noise) throw std::invalid_argument("seed sweep needs a noise model");
    model.chain.validate();
    model.plan.validate();

    const double elec = model.chain.electronic_noise_rel;
    const PowerSpectrum electronic_psd = [elec](double) { return elec; };

    SweepResult result;
    std::vector<double> xs, ys, sigmas;
    for (std::size_t i = 0; i < seed_powers.size(); ++i) {
        const double p = seed_powers[i];
        const CavityParams params = intracavity_fields(p, model.classical_gain, model.rates, model.carrier_omega);
        const NoiseInputs noise = model.noise(p);
        const DetectionChain& chain = model.chain;
        const PowerSpectrum measured_psd = [&](double f_hz) {
            const double w = hz_to_rad(f_hz);
            return measured_variance(quadrature_variance(params, noise, Quadrature::amplitude, w),
                                     quadrature_variance(params, noise, Quadrature::phase, w), chain);
        };

        const MeasuredTrace expected = evaluate_plan(measured_psd, model.plan);
        double var = 0.0;
        std::size_t in_band = 0;
        for (const auto& b : expected.bins) {
            if (b.frequency < model.band_lo || b.frequency > model.band_hi) continue;
            var += b.power * b.power + elec * elec;
            ++in_band;
        }
        if (in_band == 0) throw EmptyBand("sweep band contains no bins of the window plan");
        const double sigma =
            std::sqrt(var / static_cast<double>(model.plan.n_avg)) / static_cast<double>(in_band);

        double mean = 0.0;
        if (rng_seed) {
            const MeasuredTrace meas = synthesize_measurement(measured_psd, model.plan, derive_seed(*rng_seed, 2 * i));
            const MeasuredTrace el = elec > 0.0
                                         ? synthesize_measurement(electronic_psd, model.plan, derive_seed(*rng_seed, 2 * i + 1))
                                         : MeasuredTrace{};
            const MeasuredTrace clean = elec > 0.0 ? subtract_electronic(meas, el) : meas;
            mean = band_mean_power(clean, model.band_lo, model.band_hi);
        } else {
            MeasuredTrace clean = expected;
            for (auto& b : clean.bins) b.power -= elec;
            mean = band_mean_power(clean, model.band_lo, model.band_hi);
        }
        result.points.push_back({p, mean, sigma});
        xs.push_back(p);
        ys.push_back(mean);
        sigmas.push_back(sigma);
    }
    result.fit = fit_line(xs, ys, sigmas);
    return result;
}

}  // namespace sqz
