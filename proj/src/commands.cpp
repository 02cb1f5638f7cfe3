#include "sqz/commands.hpp"

#include "sqz/csv.hpp"
#include "sqz/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <system_error>

namespace sqz {

namespace {

std::uint64_t run_seed(const Scenario& s, const RunOptions& opts) { return opts.seed.value_or(s.seed); }

void prepare_out_dir(const RunOptions& opts) {
    if (opts.out_dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(opts.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + opts.out_dir.string() + ": " + ec.message());
}

std::vector<std::string> common_metadata(const Scenario& s, std::uint64_t seed, bool analytic) {
    std::ostringstream hash;
    hash << std::hex << scenario_hash(s);
    return {"scenario: " + s.name, "scenario_hash: " + hash.str(), "seed: " + std::to_string(seed),
            std::string("mode: ") + (analytic ? "analytic" : "synthesized")};
}

void emit_trace(const RunOptions& opts, const char* file, const MeasuredTrace& trace,
                std::vector<std::string> metadata, const std::string& label) {
    if (opts.out_dir.empty()) return;
    metadata.push_back("trace: " + label);
    std::ostringstream o;
    write_trace_csv(o, trace, metadata);
    write_file(opts.out_dir / file, o.str());
}

// Measured quadrature (at the chain's homodyne phase) without the electronic floor.
PowerSpectrum detected_psd(const CavityParams& params, const NoiseInputs& noise, DetectionChain chain) {
    chain.electronic_noise_rel = 0.0;
    return [params, noise, chain](double f_hz) {
        const double w = hz_to_rad(f_hz);
        return measured_variance(quadrature_variance(params, noise, Quadrature::amplitude, w),
                                 quadrature_variance(params, noise, Quadrature::phase, w), chain);
    };
}

PowerSpectrum sum_psd(PowerSpectrum a, PowerSpectrum b) {
    return [a = std::move(a), b = std::move(b)](double f) { return a(f) + b(f); };
}

MeasuredTrace acquire(const PowerSpectrum& psd, const WindowPlan& plan, std::uint64_t seed, bool analytic) {
    if (analytic) {
        MeasuredTrace t = evaluate_plan(psd, plan);
        t.rng_seed = seed;
        return t;
    }
    return synthesize_measurement(psd, plan, seed);
}

MeasuredTrace apply_mains_mask(const Scenario& s, const MeasuredTrace& t) {
    const auto& a = s.analyzer;
    return mask_mains(t, a.mains_hz, a.mains_harmonics, a.mains_half_width_hz);
}

BackscatterResult run_backscatter(const Scenario& s, std::uint64_t seed, bool analytic) {
    const auto& b = s.backscatter;
    const CavityRates rates = cavity_rates(s);
    const PowerSpectrum elec = electronic_psd(s);

    Scenario scattered = s;
    scattered.seed_field.technical = true;
    scattered.seed_field.ref_power_w = b.power_w > 0.0 ? b.power_w : 1.0;
    scattered.seed_field.floor_db.reset();
    scattered.seed_field.peaks = b.peaks;

    const CavityParams seeded = intracavity_fields(b.power_w, s.cavity.classical_gain, rates, carrier_omega(s));
    const CavityParams unseeded = intracavity_fields(0.0, s.cavity.classical_gain, rates, carrier_omega(s));
    DetectionChain without = detection_chain(s);
    DetectionChain with = without;
    with.propagation_losses.push_back(b.isolator_loss);

    const PowerSpectrum psd_without = sum_psd(detected_psd(seeded, noise_inputs(scattered, b.power_w), without), elec);
    const PowerSpectrum psd_with = sum_psd(detected_psd(unseeded, noise_inputs(s, 0.0), with), elec);

    WindowPlan plan_without = b.window;
    plan_without.n_avg = b.n_avg_no_isolator;

    BackscatterResult r;
    r.no_isolator = apply_mains_mask(s, acquire(psd_without, plan_without, derive_seed(seed, 1000), analytic));
    r.isolator = apply_mains_mask(s, acquire(psd_with, b.window, derive_seed(seed, 1001), analytic));
    r.band_no_isolator = band_mean_power(r.no_isolator, b.band_lo_hz, b.band_hi_hz);
    r.band_isolator = band_mean_power(r.isolator, b.band_lo_hz, b.band_hi_hz);
    r.analytic_no_isolator =
        band_mean_power(apply_mains_mask(s, evaluate_plan(psd_without, plan_without)), b.band_lo_hz, b.band_hi_hz);
    r.analytic_isolator =
        band_mean_power(apply_mains_mask(s, evaluate_plan(psd_with, b.window)), b.band_lo_hz, b.band_hi_hz);
    return r;
}

std::string db_string(double v) { return v > 0.0 ? format_number(to_db(v)) : "-inf"; }

}  // namespace

SpectrumResult cmd_spectrum(const Scenario& s, const RunOptions& opts) {
    const std::uint64_t seed = run_seed(s, opts);
    const CavityParams params =
        intracavity_fields(s.seed_field.power_w, s.cavity.classical_gain, cavity_rates(s), carrier_omega(s));
    const NoiseInputs noise = noise_inputs(s, s.seed_field.power_w);
    const DetectionChain chain = detection_chain(s);
    const PowerSpectrum elec = electronic_psd(s);

    const PowerSpectrum shot_psd = [elec](double f) { return 1.0 + elec(f); };
    const PowerSpectrum sqz_psd = sum_psd(detected_psd(params, noise, chain), elec);

    std::vector<MeasuredTrace> shot, sqz, el;
    for (std::size_t i = 0; i < s.analyzer.windows.size(); ++i) {
        const auto& plan = s.analyzer.windows[i];
        shot.push_back(acquire(shot_psd, plan, derive_seed(seed, 3 * i), opts.analytic));
        sqz.push_back(acquire(sqz_psd, plan, derive_seed(seed, 3 * i + 1), opts.analytic));
        el.push_back(acquire(elec, plan, derive_seed(seed, 3 * i + 2), opts.analytic));
    }

    SpectrumResult r;
    r.shot_noise = apply_mains_mask(s, stitch(shot));
    r.squeezed = apply_mains_mask(s, stitch(sqz));
    r.electronic = apply_mains_mask(s, stitch(el));
    if (s.analyzer.lock_peak_hz) {
        r.squeezed = inject_lock_artifact(r.squeezed, *s.analyzer.lock_peak_hz, s.analyzer.lock_peak_power);
        r.lock_bin = bin_containing(r.squeezed, *s.analyzer.lock_peak_hz);
    }
    for (std::size_t i = 0; i < r.squeezed.bins.size(); ++i) {
        const auto& b = r.squeezed.bins[i];
        if (b.masked || b.frequency < 280.0 || (r.lock_bin && *r.lock_bin == i)) continue;
        ++r.checked_bins;
        if (b.power < 1.0) ++r.squeezed_bins;
    }
    if (s.backscatter.enabled) r.backscatter = run_backscatter(s, seed, opts.analytic);

    if (!opts.out_dir.empty()) {
        prepare_out_dir(opts);
        const auto meta = common_metadata(s, seed, opts.analytic);
        emit_trace(opts, "shot_noise.csv", r.shot_noise, meta, "shot noise");
        emit_trace(opts, "squeezed.csv", r.squeezed, meta, "squeezed");
        emit_trace(opts, "electronic.csv", r.electronic, meta, "electronic");

        std::ostringstream o;
        for (const auto& m : meta) o << "# " << m << "\n";
        o << "frequency_hz,shot_noise_db,squeezed_db,electronic_db,squeezing_db,masked\n";
        for (std::size_t i = 0; i < r.squeezed.bins.size(); ++i) {
            const auto& a = r.shot_noise.bins[i];
            const auto& b = r.squeezed.bins[i];
            const auto& c = r.electronic.bins[i];
            const bool masked = a.masked || b.masked || c.masked;
            o << format_number(b.frequency) << "," << db_string(a.power) << "," << db_string(b.power) << ","
              << db_string(c.power) << "," << format_number(to_db(b.power / a.power)) << "," << (masked ? 1 : 0) << "\n";
        }
        write_file(opts.out_dir / "composite.csv", o.str());

        if (r.backscatter) {
            emit_trace(opts, "backscatter_no_isolator.csv", r.backscatter->no_isolator, meta, "without isolator");
            emit_trace(opts, "backscatter_isolator.csv", r.backscatter->isolator, meta, "with isolator");
        }
    }

    if (opts.log) {
        auto& log = *opts.log;
        log << "spectrum " << s.name << ": " << r.squeezed.bins.size() << " bins, " << r.squeezed.masked_count()
            << " masked\n"
            << "  below shot noise from 280 Hz: " << r.squeezed_bins << " of " << r.checked_bins << " unmasked bins\n";
        if (r.lock_bin) {
            log << "  lock peak bin at " << format_number(r.squeezed.bins[*r.lock_bin].frequency) << " Hz\n";
        }
        if (r.backscatter) {
            const auto& b = *r.backscatter;
            log << "  backscatter band " << format_number(s.backscatter.band_lo_hz) << "-"
                << format_number(s.backscatter.band_hi_hz) << " Hz: without isolator " << db_string(b.band_no_isolator)
                << " dB, with isolator " << db_string(b.band_isolator) << " dB\n";
        }
    }
    return r;
}

PhaseScanResult cmd_phase_scan(const Scenario& s, const RunOptions& opts, std::optional<double> frequency_hz) {
    const auto& ps = s.phase_scan;
    const std::uint64_t seed = run_seed(s, opts);
    const CavityParams params =
        intracavity_fields(s.seed_field.power_w, s.cavity.classical_gain, cavity_rates(s), carrier_omega(s));
    const NoiseInputs noise = noise_inputs(s, s.seed_field.power_w);
    DetectionChain chain = detection_chain(s);
    chain.electronic_noise_rel = ps.electronic_noise_db ? from_db(*ps.electronic_noise_db) : 0.0;

    PhaseScanResult r;
    r.frequency_hz = frequency_hz.value_or(ps.frequency_hz);
    const double w = hz_to_rad(r.frequency_hz);
    r.v_plus_source = quadrature_variance(params, noise, Quadrature::amplitude, w);
    r.v_minus_source = quadrature_variance(params, noise, Quadrature::phase, w);
    r.electronic = chain.electronic_noise_rel;

    std::vector<double> thetas(ps.points);
    for (std::size_t k = 0; k < ps.points; ++k) {
        thetas[k] = ps.points == 1 ? ps.theta_start_rad
                                   : ps.theta_start_rad + (ps.theta_stop_rad - ps.theta_start_rad) *
                                                              static_cast<double>(k) / static_cast<double>(ps.points - 1);
    }
    r.points = phase_scan(r.v_plus_source, r.v_minus_source, chain, thetas);
    if (ps.n_avg > 0 && !opts.analytic) {
        std::mt19937_64 rng(seed);
        std::gamma_distribution<double> averaged(static_cast<double>(ps.n_avg), 1.0 / ps.n_avg);
        for (auto& p : r.points) p.v_meas *= averaged(rng);
    }

    const auto [lo, hi] = std::minmax_element(r.points.begin(), r.points.end(),
                                              [](const auto& a, const auto& b) { return a.v_meas < b.v_meas; });
    r.min_subtracted = lo->v_meas - r.electronic;
    r.max_subtracted = hi->v_meas - r.electronic;
    r.measured_purity = r.min_subtracted * r.max_subtracted;

    if (!opts.out_dir.empty()) {
        prepare_out_dir(opts);
        std::ostringstream o;
        for (const auto& m : common_metadata(s, seed, opts.analytic || ps.n_avg == 0)) o << "# " << m << "\n";
        o << "# frequency_hz: " << format_number(r.frequency_hz) << "\n"
          << "# source_v_plus: " << format_number(r.v_plus_source) << "\n"
          << "# source_v_minus: " << format_number(r.v_minus_source) << "\n"
          << "# electronic_rel_snl: " << format_number(r.electronic) << "\n"
          << "# measured_purity: " << format_number(r.measured_purity) << "\n"
          << "theta_rad,power_rel_snl,power_db,minus_electronic_db\n";
        for (const auto& p : r.points) {
            o << format_number(p.theta) << "," << format_number(p.v_meas) << "," << db_string(p.v_meas) << ","
              << db_string(p.v_meas - r.electronic) << "\n";
        }
        write_file(opts.out_dir / "phase_scan.csv", o.str());
    }
    if (opts.log) {
        *opts.log << "phase scan at " << format_number(r.frequency_hz) << " Hz: min " << db_string(r.min_subtracted)
                  << " dB, max " << db_string(r.max_subtracted) << " dB (electronic noise subtracted), purity "
                  << format_number(r.measured_purity) << "\n";
    }
    return r;
}

SeedSweepReport cmd_seed_sweep(const Scenario& s, const RunOptions& opts, std::optional<std::vector<double>> powers) {
    const std::uint64_t seed = run_seed(s, opts);
    const std::vector<double> p = powers.value_or(s.sweep.powers_w);
    const SweepModel model = sweep_model(s);

    SeedSweepReport r;
    r.analytic = seed_sweep(model, p, std::nullopt);
    if (!opts.analytic) r.synthesized = seed_sweep(model, p, seed);
    const SweepResult& shown = r.synthesized ? *r.synthesized : r.analytic;

    if (!opts.out_dir.empty()) {
        prepare_out_dir(opts);
        std::ostringstream o;
        for (const auto& m : common_metadata(s, seed, opts.analytic)) o << "# " << m << "\n";
        o << "# band_hz: " << format_number(model.band_lo) << "-" << format_number(model.band_hi) << "\n"
          << "# fit_slope_per_w: " << format_number(shown.fit.slope) << "\n"
          << "# fit_slope_sigma_per_w: " << format_number(shown.fit.slope_sigma) << "\n"
          << "# fit_intercept: " << format_number(shown.fit.intercept) << "\n"
          << "# fit_residual_norm: " << format_number(shown.fit.residual_norm) << "\n"
          << "# fit_relative_residual: " << format_number(shown.fit.relative_residual) << "\n"
          << "# model_slope_per_w: " << format_number(r.analytic.fit.slope) << "\n"
          << "# model_intercept: " << format_number(r.analytic.fit.intercept) << "\n"
          << "seed_power_w,band_mean_rel_snl,band_mean_db,sigma_rel_snl,model_rel_snl\n";
        for (std::size_t i = 0; i < shown.points.size(); ++i) {
            const auto& pt = shown.points[i];
            o << format_number(pt.seed_power) << "," << format_number(pt.band_mean) << "," << db_string(pt.band_mean)
              << "," << format_number(pt.sigma) << "," << format_number(r.analytic.points[i].band_mean) << "\n";
        }
        write_file(opts.out_dir / "seed_sweep.csv", o.str());
    }
    if (opts.log) {
        *opts.log << "seed sweep " << s.name << " (" << (opts.analytic ? "analytic" : "synthesized") << "):\n";
        for (const auto& pt : shown.points) {
            *opts.log << "  " << format_number(pt.seed_power) << " W -> " << format_number(pt.band_mean) << " ("
                      << db_string(pt.band_mean) << " dB)\n";
        }
        *opts.log << "  fit: slope " << format_number(shown.fit.slope) << " /W, intercept "
                  << format_number(shown.fit.intercept) << ", relative residual "
                  << format_number(shown.fit.relative_residual) << "\n";
    }
    return r;
}

LockTrace cmd_lock(const Scenario& s, const RunOptions& opts) {
    const std::uint64_t seed = run_seed(s, opts);
    const LockConfig config = lock_config(s);
    const Disturbance disturbance =
        s.lock.drift_rad_per_s != 0.0 ? drift_disturbance(s.lock.drift_rad_per_s, s.lock.drift_start_s) : Disturbance{};
    LockTrace trace = simulate_lock(config, disturbance, seed);

    if (!opts.out_dir.empty()) {
        prepare_out_dir(opts);
        auto meta = common_metadata(s, seed, false);
        meta.push_back("v_plus: " + format_number(config.v_plus));
        meta.push_back("v_minus: " + format_number(config.v_minus));
        meta.push_back("record_stride: " + std::to_string(config.record_stride));
        std::ostringstream o;
        write_lock_csv(o, trace, meta);
        write_file(opts.out_dir / "lock_trace.csv", o.str());
    }
    if (opts.log) {
        const auto& sm = trace.summary;
        *opts.log << "lock " << s.name << ": " << (sm.converged ? "converged" : "not converged")
                  << (sm.diverged ? " (diverged)" : "") << ", lock point " << format_number(sm.lock_point)
                  << " rad, mean offset " << format_number(sm.mean_offset) << " rad, residual rms "
                  << format_number(sm.residual_rms) << " rad, settled at " << format_number(sm.settle_time) << " s\n";
    }
    return trace;
}

InferReport cmd_infer(const Scenario& s, const RunOptions& opts) {
    if (!s.infer.v_plus || !s.infer.v_minus) {
        throw ConfigError(0, "infer", "v_plus and v_minus are required for inference");
    }
    DetectionChain chain = detection_chain(s);
    if (s.infer.electronic_subtracted) chain.electronic_noise_rel = 0.0;

    InferReport r;
    r.efficiency = total_efficiency(chain);
    r.measured = {*s.infer.v_plus, *s.infer.v_minus, s.infer.uncertainty};
    r.measured_purity = purity(r.measured.v_plus_meas, r.measured.v_minus_meas);
    r.inferred = infer_pair(r.measured, chain);

    const auto sigma = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    std::ostringstream o;
    o << "# scenario: " << s.name << "\n"
      << "# efficiency: " << format_number(r.efficiency) << "\n"
      << "quantity,value,sigma,db\n"
      << "measured_v_plus," << format_number(r.measured.v_plus_meas) << "," << sigma(r.measured.uncertainty) << ","
      << db_string(r.measured.v_plus_meas) << "\n"
      << "measured_v_minus," << format_number(r.measured.v_minus_meas) << "," << sigma(r.measured.uncertainty) << ","
      << db_string(r.measured.v_minus_meas) << "\n"
      << "measured_purity," << format_number(r.measured_purity.product) << ",,\n"
      << "inferred_v_plus," << format_number(r.inferred.v_plus) << "," << sigma(r.inferred.sigma_plus) << ","
      << db_string(r.inferred.v_plus) << "\n"
      << "inferred_v_minus," << format_number(r.inferred.v_minus) << "," << sigma(r.inferred.sigma_minus) << ","
      << db_string(r.inferred.v_minus) << "\n"
      << "inferred_purity," << format_number(r.inferred.purity) << "," << sigma(r.inferred.sigma_purity) << ",\n";

    if (!opts.out_dir.empty()) {
        prepare_out_dir(opts);
        write_file(opts.out_dir / "infer.csv", o.str());
    }
    if (opts.log) *opts.log << o.str();
    return r;
}

}  // namespace sqz
