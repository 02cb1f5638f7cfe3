// sqzsim: command-line front end for the squeezed-light simulator.
//
//   sqzsim spectrum   --preset opo-fig2 --out results/
//   sqzsim seed-sweep --scenario my.ini --analytic
//   sqzsim presets [name]
//
// Exit codes: 0 success, 1 usage, 2 scenario parse/validation error,
// 3 physics-domain error (threshold, unphysical measurement), 4 I/O error.

#include "sqz/commands.hpp"
#include "sqz/errors.hpp"
#include "sqz/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kDomain = 3, kIo = 4 };

struct Common {
    std::string scenario_path;
    std::string preset;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool analytic = false;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, Common& c) {
    auto* scen = cmd->add_option("--scenario", c.scenario_path, "Scenario file");
    auto* pre = cmd->add_option("--preset", c.preset, "Named preset (see `sqzsim presets`)");
    scen->excludes(pre);
    cmd->add_option("--out", c.out_dir, "Output directory for CSV files");
    cmd->add_option("--seed", c.seed, "RNG seed, overrides the scenario");
    cmd->add_flag("--analytic", c.analytic, "Use expected values instead of synthesized noise");
    cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv"}));
}

sqz::Scenario resolve(const Common& c) {
    if (!c.scenario_path.empty()) return sqz::load_scenario(c.scenario_path);
    if (!c.preset.empty()) return sqz::preset_scenario(c.preset);
    throw CLI::RequiredError("--scenario or --preset");
}

sqz::RunOptions options(const Common& c) {
    return {c.out_dir, c.seed, c.analytic, &std::cout};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Squeezed-light OPO/OPA simulator"};
    app.require_subcommand(1);

    Common common;
    auto* spectrum = app.add_subcommand("spectrum", "Shot-noise, squeezed and electronic traces");
    add_common(spectrum, common);

    auto* scan = app.add_subcommand("phase-scan", "Noise power versus homodyne phase");
    add_common(scan, common);
    std::optional<double> scan_freq;
    scan->add_option("--frequency", scan_freq, "Sideband frequency in Hz");

    auto* sweep = app.add_subcommand("seed-sweep", "Band-mean noise versus seed power");
    add_common(sweep, common);
    std::vector<double> sweep_powers;
    sweep->add_option("--powers", sweep_powers, "Seed powers in W")->delimiter(',');

    auto* lock = app.add_subcommand("lock", "Noise-locking loop simulation");
    add_common(lock, common);

    auto* infer = app.add_subcommand("infer", "Infer source variances from measured values");
    add_common(infer, common);

    auto* list = app.add_subcommand("presets", "List presets, or print one as a scenario file");
    std::string preset_name;
    list->add_option("name", preset_name, "Preset to print");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*list) {
            if (preset_name.empty()) {
                for (const auto& p : sqz::presets()) std::cout << p.name << "\t" << p.summary << "\n";
            } else {
                std::cout << sqz::serialize_scenario(sqz::preset_scenario(preset_name));
            }
            return kOk;
        }
        const sqz::Scenario s = resolve(common);
        const sqz::RunOptions opts = options(common);
        if (*spectrum) {
            sqz::cmd_spectrum(s, opts);
        } else if (*scan) {
            sqz::cmd_phase_scan(s, opts, scan_freq);
        } else if (*sweep) {
            std::optional<std::vector<double>> powers;
            if (!sweep_powers.empty()) powers = sweep_powers;
            sqz::cmd_seed_sweep(s, opts, powers);
        } else if (*lock) {
            sqz::cmd_lock(s, opts);
        } else if (*infer) {
            sqz::cmd_infer(s, opts);
        }
        return kOk;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const sqz::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const sqz::DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kDomain;
    } catch (const sqz::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: unknown preset: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}
