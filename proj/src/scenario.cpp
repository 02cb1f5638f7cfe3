#include "sqz/scenario.hpp"

#include "sqz/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

namespace sqz {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

struct Entry {
    std::string value;
    std::size_t line = 0;
    bool used = false;
};

struct Section {
    std::size_t line = 0;
    std::map<std::string, Entry> entries;
};

using Document = std::map<std::string, Section>;

Document tokenize(std::string_view text) {
    Document doc;
    std::string current;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string_view line = trim(raw);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line_no, "", "unterminated section header");
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (current.empty()) throw ConfigError(line_no, "", "empty section name");
            if (doc.count(current)) throw ConfigError(line_no, current, "duplicate section");
            doc[current].line = line_no;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(line_no, current, "expected `key = value`");
        if (current.empty()) throw ConfigError(line_no, "", "key outside of any section");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError(line_no, current, "missing key");
        auto& entries = doc[current].entries;
        if (entries.count(key)) throw ConfigError(line_no, current + "." + key, "duplicate key");
        entries[key] = Entry{std::string(trim(line.substr(eq + 1))), line_no, false};
    }
    return doc;
}

// Reads typed values out of one section, recording which keys were consumed.
class Reader {
public:
    Reader(Document& doc, std::string name) : name_(std::move(name)) {
        auto it = doc.find(name_);
        if (it != doc.end()) section_ = &it->second;
    }

    void number(const char* key, double& out) {
        if (Entry* e = find(key)) out = parse_number(*e, key, e->value);
    }

    void db(const char* key, std::optional<double>& out) {
        if (Entry* e = find(key)) out = e->value == "off" ? std::nullopt : std::optional(parse_number(*e, key, e->value));
    }

    void optional_number(const char* key, std::optional<double>& out) { db(key, out); }

    void integer(const char* key, int& out) {
        if (Entry* e = find(key)) {
            const auto v = parse_integer<long long>(*e, key, e->value);
            if (v < INT32_MIN || v > INT32_MAX) fail(*e, key, "integer out of range");
            out = static_cast<int>(v);
        }
    }

    void count(const char* key, std::size_t& out) {
        if (Entry* e = find(key)) out = parse_integer<std::size_t>(*e, key, e->value);
    }

    void seed(const char* key, std::uint64_t& out) {
        if (Entry* e = find(key)) out = parse_integer<std::uint64_t>(*e, key, e->value);
    }

    void boolean(const char* key, bool& out) {
        if (Entry* e = find(key)) {
            const std::string& v = e->value;
            if (v == "true" || v == "yes" || v == "on") out = true;
            else if (v == "false" || v == "no" || v == "off") out = false;
            else fail(*e, key, "expected true or false, got `" + v + "`");
        }
    }

    void text(const char* key, std::string& out) {
        if (Entry* e = find(key)) out = e->value;
    }

    void numbers(const char* key, std::vector<double>& out) {
        if (Entry* e = find(key)) {
            out.clear();
            if (e->value.empty() || e->value == "none") return;
            for (auto item : split(e->value, ',')) out.push_back(parse_number(*e, key, item));
        }
    }

    void peaks(const char* key, std::vector<PeakSpec>& out) {
        if (Entry* e = find(key)) {
            out.clear();
            for (const auto& f : tuples(*e, key, 3, 3)) out.push_back({f[0], f[1], f[2]});
        }
    }

    void mains_lines(const char* key, std::vector<MainsLine>& out) {
        if (Entry* e = find(key)) {
            out.clear();
            for (const auto& f : tuples(*e, key, 2, 2)) out.push_back({f[0], f[1]});
        }
    }

    void window(const char* key, WindowPlan& out) {
        if (Entry* e = find(key)) {
            const auto all = tuples(*e, key, 4, 5);
            if (all.size() != 1) fail(*e, key, "expected a single f_start:f_stop:rbw:n_avg[:vbw] tuple");
            out = to_plan(*e, key, all.front());
        }
    }

    void windows(const char* key, std::vector<WindowPlan>& out) {
        if (Entry* e = find(key)) {
            out.clear();
            for (const auto& f : tuples(*e, key, 4, 5)) out.push_back(to_plan(*e, key, f));
        }
    }

    // Runs a module-level validation, re-raising failures against this section.
    template <class F>
    void validate(F&& check) {
        try {
            check();
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(section_ ? section_->line : 0, name_, ex.what());
        }
    }

private:
    Entry* find(const char* key) {
        if (!section_) return nullptr;
        auto it = section_->entries.find(key);
        if (it == section_->entries.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    [[noreturn]] void fail(const Entry& e, const char* key, const std::string& what) const {
        throw ConfigError(e.line, name_ + "." + key, what);
    }

    double parse_number(const Entry& e, const char* key, std::string_view s) const {
        s = trim(s);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
            fail(e, key, "expected a number, got `" + std::string(s) + "`");
        }
        if (std::isnan(v)) fail(e, key, "NaN is not allowed");
        return v;
    }

    template <class T>
    T parse_integer(const Entry& e, const char* key, std::string_view s) const {
        s = trim(s);
        T v{};
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
            fail(e, key, "expected an integer, got `" + std::string(s) + "`");
        }
        return v;
    }

    std::vector<std::vector<double>> tuples(const Entry& e, const char* key, std::size_t min_fields,
                                            std::size_t max_fields) const {
        std::vector<std::vector<double>> out;
        if (e.value.empty() || e.value == "none") return out;
        for (auto item : split(e.value, ',')) {
            const auto fields = split(item, ':');
            if (fields.size() < min_fields || fields.size() > max_fields) {
                fail(e, key, "malformed tuple `" + std::string(item) + "`");
            }
            std::vector<double> values;
            for (auto f : fields) values.push_back(parse_number(e, key, f));
            out.push_back(std::move(values));
        }
        return out;
    }

    WindowPlan to_plan(const Entry& e, const char* key, const std::vector<double>& f) const {
        WindowPlan p{f[0], f[1], f[2], 0, f.size() > 4 ? f[4] : 0.0};
        if (f[3] != std::floor(f[3]) || f[3] < 1 || f[3] > 1e9) fail(e, key, "n_avg must be a positive integer");
        p.n_avg = static_cast<int>(f[3]);
        try {
            p.validate();
        } catch (const std::invalid_argument& ex) {
            fail(e, key, ex.what());
        }
        return p;
    }

    std::string name_;
    Section* section_ = nullptr;
};

const char* const kSections[] = {"scenario", "cavity",   "seed",       "pump", "detuning", "detection",
                                 "analyzer", "backscatter", "sweep", "phase_scan", "lock", "infer"};

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "off"; }

std::string fmt(const std::vector<double>& v) {
    if (v.empty()) return "none";
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
    return out;
}

std::string fmt(const std::vector<PeakSpec>& v) {
    if (v.empty()) return "none";
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? ", " : "") + fmt(v[i].center_hz) + ":" + fmt(v[i].width_hz) + ":" + fmt(v[i].height_db);
    }
    return out;
}

std::string fmt(const WindowPlan& p) {
    return fmt(p.f_start) + ":" + fmt(p.f_stop) + ":" + fmt(p.rbw) + ":" + std::to_string(p.n_avg) + ":" + fmt(p.vbw);
}

std::string fmt(const std::vector<WindowPlan>& v) {
    if (v.empty()) return "none";
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
    return out;
}

std::string fmt(bool b) { return b ? "true" : "false"; }

}  // namespace

Scenario parse_scenario(std::string_view text) {
    Document doc = tokenize(text);
    for (const auto& [name, section] : doc) {
        bool known = false;
        for (const char* k : kSections) known = known || name == k;
        if (!known) throw ConfigError(section.line, name, "unknown section");
    }

    Scenario s;
    {
        Reader r(doc, "scenario");
        r.text("name", s.name);
        r.seed("seed", s.seed);
    }
    {
        Reader r(doc, "cavity");
        auto& c = s.cavity;
        r.number("kappa_in_hz", c.kappa_in_hz);
        r.number("kappa_out_hz", c.kappa_out_hz);
        r.number("kappa_loss_hz", c.kappa_loss_hz);
        r.number("kappa_b_hz", c.kappa_b_hz);
        r.number("kappa_in_b_hz", c.kappa_in_b_hz);
        r.number("epsilon_hz", c.epsilon_hz);
        r.number("classical_gain", c.classical_gain);
        r.number("wavelength_nm", c.wavelength_nm);
        r.validate([&] {
            cavity_rates(s).validate();
            coupling_for_gain(c.classical_gain, 1.0);
            if (c.classical_gain > 1.0 && c.epsilon_hz == 0.0) throw std::invalid_argument("classical_gain > 1 needs epsilon_hz > 0");
            if (!(c.wavelength_nm > 0.0)) throw std::invalid_argument("wavelength_nm must be > 0");
        });
    }
    {
        Reader r(doc, "seed");
        auto& sd = s.seed_field;
        r.number("power_w", sd.power_w);
        r.boolean("technical", sd.technical);
        r.number("ref_power_w", sd.ref_power_w);
        r.db("floor_db", sd.floor_db);
        r.peaks("peaks", sd.peaks);
        r.validate([&] {
            if (!(sd.power_w >= 0.0)) throw std::invalid_argument("power_w must be >= 0");
            if (!(sd.ref_power_w > 0.0)) throw std::invalid_argument("ref_power_w must be > 0");
        });
    }
    {
        Reader r(doc, "pump");
        r.number("floor_db", s.pump.floor_db);
        r.peaks("peaks", s.pump.peaks);
    }
    {
        Reader r(doc, "detuning");
        r.db("level_db", s.detuning.level_db);
        r.number("corner_hz", s.detuning.corner_hz);
        r.peaks("peaks", s.detuning.peaks);
        r.validate([&] {
            if (!(s.detuning.corner_hz > 0.0)) throw std::invalid_argument("corner_hz must be > 0");
        });
    }
    {
        Reader r(doc, "detection");
        auto& d = s.detection;
        r.number("quantum_efficiency", d.quantum_efficiency);
        r.number("fringe_visibility", d.fringe_visibility);
        r.numbers("losses", d.losses);
        r.db("electronic_noise_db", d.electronic_noise_db);
        r.number("homodyne_phase_rad", d.homodyne_phase_rad);
        r.validate([&] { detection_chain(s).validate(); });
    }
    {
        Reader r(doc, "analyzer");
        auto& a = s.analyzer;
        r.windows("windows", a.windows);
        r.number("mains_hz", a.mains_hz);
        r.integer("mains_harmonics", a.mains_harmonics);
        r.number("mains_half_width_hz", a.mains_half_width_hz);
        r.number("mains_line_sigma_hz", a.mains_line_sigma_hz);
        r.mains_lines("mains_lines", a.mains_lines);
        r.optional_number("lock_peak_hz", a.lock_peak_hz);
        r.number("lock_peak_power", a.lock_peak_power);
        r.validate([&] {
            if (a.windows.empty()) throw std::invalid_argument("at least one window is required");
            if (!(a.mains_hz > 0.0)) throw std::invalid_argument("mains_hz must be > 0");
            if (a.mains_harmonics < 0) throw std::invalid_argument("mains_harmonics must be >= 0");
            if (!(a.mains_line_sigma_hz > 0.0)) throw std::invalid_argument("mains_line_sigma_hz must be > 0");
            if (!(a.lock_peak_power >= 0.0)) throw std::invalid_argument("lock_peak_power must be >= 0");
        });
    }
    {
        Reader r(doc, "backscatter");
        auto& b = s.backscatter;
        r.boolean("enabled", b.enabled);
        r.number("power_w", b.power_w);
        r.number("isolator_loss", b.isolator_loss);
        r.peaks("peaks", b.peaks);
        r.window("window", b.window);
        r.integer("n_avg_no_isolator", b.n_avg_no_isolator);
        r.number("band_lo_hz", b.band_lo_hz);
        r.number("band_hi_hz", b.band_hi_hz);
        r.validate([&] {
            if (!(b.power_w >= 0.0)) throw std::invalid_argument("power_w must be >= 0");
            if (!(b.isolator_loss >= 0.0 && b.isolator_loss < 1.0)) throw std::invalid_argument("isolator_loss must be in [0, 1)");
            if (b.n_avg_no_isolator < 1) throw std::invalid_argument("n_avg_no_isolator must be >= 1");
            if (!(b.band_lo_hz < b.band_hi_hz)) throw std::invalid_argument("band_lo_hz must be below band_hi_hz");
        });
    }
    {
        Reader r(doc, "sweep");
        auto& w = s.sweep;
        r.numbers("powers_w", w.powers_w);
        r.number("band_lo_hz", w.band_lo_hz);
        r.number("band_hi_hz", w.band_hi_hz);
        r.window("window", w.window);
        r.validate([&] {
            for (double p : w.powers_w) {
                if (!(p >= 0.0)) throw std::invalid_argument("seed powers must be >= 0");
            }
            if (!(w.band_lo_hz < w.band_hi_hz)) throw std::invalid_argument("band_lo_hz must be below band_hi_hz");
        });
    }
    {
        Reader r(doc, "phase_scan");
        auto& p = s.phase_scan;
        r.number("frequency_hz", p.frequency_hz);
        r.count("points", p.points);
        r.number("theta_start_rad", p.theta_start_rad);
        r.number("theta_stop_rad", p.theta_stop_rad);
        r.db("electronic_noise_db", p.electronic_noise_db);
        r.integer("n_avg", p.n_avg);
        r.validate([&] {
            if (p.points < 1) throw std::invalid_argument("points must be >= 1");
            if (!(p.frequency_hz >= 0.0)) throw std::invalid_argument("frequency_hz must be >= 0");
            if (p.n_avg < 0) throw std::invalid_argument("n_avg must be >= 0");
        });
    }
    {
        Reader r(doc, "lock");
        auto& l = s.lock;
        auto& c = l.config;
        r.number("dither_hz", c.dither_freq);
        r.number("dither_amp_rad", c.dither_amp);
        r.number("demod_phase_rad", c.demod_phase);
        r.number("lowpass_hz", c.lowpass_corner);
        r.number("gain", c.loop_gain);
        r.number("dt_s", c.dt);
        r.number("duration_s", c.duration);
        r.number("meter_bandwidth_hz", c.meter_bandwidth);
        r.number("initial_phase_rad", c.initial_phase);
        r.number("settle_band_rad", c.settle_band);
        r.number("converge_tolerance_rad", c.converge_tolerance);
        r.count("record_stride", c.record_stride);
        r.number("analysis_hz", l.analysis_hz);
        r.optional_number("v_plus", l.v_plus);
        r.optional_number("v_minus", l.v_minus);
        r.number("drift_rad_per_s", l.drift_rad_per_s);
        r.number("drift_start_s", l.drift_start_s);
        r.validate([&] {
            if (l.v_plus.has_value() != l.v_minus.has_value()) throw std::invalid_argument("set both v_plus and v_minus or neither");
            lock_config(s).validate();
        });
    }
    {
        Reader r(doc, "infer");
        auto& i = s.infer;
        r.optional_number("v_plus", i.v_plus);
        r.optional_number("v_minus", i.v_minus);
        r.optional_number("uncertainty", i.uncertainty);
        r.boolean("electronic_subtracted", i.electronic_subtracted);
        r.validate([&] {
            if ((i.v_plus && !(*i.v_plus > 0.0)) || (i.v_minus && !(*i.v_minus > 0.0))) {
                throw std::invalid_argument("measured variances must be > 0");
            }
            if (i.uncertainty && !(*i.uncertainty >= 0.0)) throw std::invalid_argument("uncertainty must be >= 0");
        });
    }

    for (const auto& [name, section] : doc) {
        for (const auto& [key, entry] : section.entries) {
            if (!entry.used) throw ConfigError(entry.line, name + "." + key, "unknown key");
        }
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
    std::ostringstream o;
    o << "[scenario]\n"
      << "name = " << s.name << "\n"
      << "seed = " << s.seed << "\n\n";

    const auto& c = s.cavity;
    o << "[cavity]\n"
      << "kappa_in_hz = " << fmt(c.kappa_in_hz) << "\n"
      << "kappa_out_hz = " << fmt(c.kappa_out_hz) << "\n"
      << "kappa_loss_hz = " << fmt(c.kappa_loss_hz) << "\n"
      << "kappa_b_hz = " << fmt(c.kappa_b_hz) << "\n"
      << "kappa_in_b_hz = " << fmt(c.kappa_in_b_hz) << "\n"
      << "epsilon_hz = " << fmt(c.epsilon_hz) << "\n"
      << "classical_gain = " << fmt(c.classical_gain) << "\n"
      << "wavelength_nm = " << fmt(c.wavelength_nm) << "\n\n";

    const auto& sd = s.seed_field;
    o << "[seed]\n"
      << "power_w = " << fmt(sd.power_w) << "\n"
      << "technical = " << fmt(sd.technical) << "\n"
      << "ref_power_w = " << fmt(sd.ref_power_w) << "\n"
      << "floor_db = " << fmt(sd.floor_db) << "\n"
      << "peaks = " << fmt(sd.peaks) << "\n\n";

    o << "[pump]\n"
      << "floor_db = " << fmt(s.pump.floor_db) << "\n"
      << "peaks = " << fmt(s.pump.peaks) << "\n\n";

    o << "[detuning]\n"
      << "level_db = " << fmt(s.detuning.level_db) << "\n"
      << "corner_hz = " << fmt(s.detuning.corner_hz) << "\n"
      << "peaks = " << fmt(s.detuning.peaks) << "\n\n";

    const auto& d = s.detection;
    o << "[detection]\n"
      << "quantum_efficiency = " << fmt(d.quantum_efficiency) << "\n"
      << "fringe_visibility = " << fmt(d.fringe_visibility) << "\n"
      << "losses = " << fmt(d.losses) << "\n"
      << "electronic_noise_db = " << fmt(d.electronic_noise_db) << "\n"
      << "homodyne_phase_rad = " << fmt(d.homodyne_phase_rad) << "\n\n";

    const auto& a = s.analyzer;
    o << "[analyzer]\n"
      << "windows = " << fmt(a.windows) << "\n"
      << "mains_hz = " << fmt(a.mains_hz) << "\n"
      << "mains_harmonics = " << a.mains_harmonics << "\n"
      << "mains_half_width_hz = " << fmt(a.mains_half_width_hz) << "\n"
      << "mains_line_sigma_hz = " << fmt(a.mains_line_sigma_hz) << "\n"
      << "mains_lines = ";
    if (a.mains_lines.empty()) o << "none";
    for (std::size_t i = 0; i < a.mains_lines.size(); ++i) {
        o << (i ? ", " : "") << fmt(a.mains_lines[i].frequency_hz) << ":" << fmt(a.mains_lines[i].height_db);
    }
    o << "\n"
      << "lock_peak_hz = " << fmt(a.lock_peak_hz) << "\n"
      << "lock_peak_power = " << fmt(a.lock_peak_power) << "\n\n";

    const auto& b = s.backscatter;
    o << "[backscatter]\n"
      << "enabled = " << fmt(b.enabled) << "\n"
      << "power_w = " << fmt(b.power_w) << "\n"
      << "isolator_loss = " << fmt(b.isolator_loss) << "\n"
      << "peaks = " << fmt(b.peaks) << "\n"
      << "window = " << fmt(b.window) << "\n"
      << "n_avg_no_isolator = " << b.n_avg_no_isolator << "\n"
      << "band_lo_hz = " << fmt(b.band_lo_hz) << "\n"
      << "band_hi_hz = " << fmt(b.band_hi_hz) << "\n\n";

    const auto& w = s.sweep;
    o << "[sweep]\n"
      << "powers_w = " << fmt(w.powers_w) << "\n"
      << "band_lo_hz = " << fmt(w.band_lo_hz) << "\n"
      << "band_hi_hz = " << fmt(w.band_hi_hz) << "\n"
      << "window = " << fmt(w.window) << "\n\n";

    const auto& p = s.phase_scan;
    o << "[phase_scan]\n"
      << "frequency_hz = " << fmt(p.frequency_hz) << "\n"
      << "points = " << p.points << "\n"
      << "theta_start_rad = " << fmt(p.theta_start_rad) << "\n"
      << "theta_stop_rad = " << fmt(p.theta_stop_rad) << "\n"
      << "electronic_noise_db = " << fmt(p.electronic_noise_db) << "\n"
      << "n_avg = " << p.n_avg << "\n\n";

    const auto& l = s.lock;
    o << "[lock]\n"
      << "dither_hz = " << fmt(l.config.dither_freq) << "\n"
      << "dither_amp_rad = " << fmt(l.config.dither_amp) << "\n"
      << "demod_phase_rad = " << fmt(l.config.demod_phase) << "\n"
      << "lowpass_hz = " << fmt(l.config.lowpass_corner) << "\n"
      << "gain = " << fmt(l.config.loop_gain) << "\n"
      << "dt_s = " << fmt(l.config.dt) << "\n"
      << "duration_s = " << fmt(l.config.duration) << "\n"
      << "meter_bandwidth_hz = " << fmt(l.config.meter_bandwidth) << "\n"
      << "initial_phase_rad = " << fmt(l.config.initial_phase) << "\n"
      << "settle_band_rad = " << fmt(l.config.settle_band) << "\n"
      << "converge_tolerance_rad = " << fmt(l.config.converge_tolerance) << "\n"
      << "record_stride = " << l.config.record_stride << "\n"
      << "analysis_hz = " << fmt(l.analysis_hz) << "\n"
      << "v_plus = " << fmt(l.v_plus) << "\n"
      << "v_minus = " << fmt(l.v_minus) << "\n"
      << "drift_rad_per_s = " << fmt(l.drift_rad_per_s) << "\n"
      << "drift_start_s = " << fmt(l.drift_start_s) << "\n\n";

    const auto& i = s.infer;
    o << "[infer]\n"
      << "v_plus = " << fmt(i.v_plus) << "\n"
      << "v_minus = " << fmt(i.v_minus) << "\n"
      << "uncertainty = " << fmt(i.uncertainty) << "\n"
      << "electronic_subtracted = " << fmt(i.electronic_subtracted) << "\n";
    return o.str();
}

std::uint64_t scenario_hash(const Scenario& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_scenario(s)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

CavityRates cavity_rates(const Scenario& s) {
    const auto& c = s.cavity;
    CavityRates r;
    r.kappa_in_a = hz_to_rad(c.kappa_in_hz);
    r.kappa_out_a = hz_to_rad(c.kappa_out_hz);
    r.kappa_l_a = hz_to_rad(c.kappa_loss_hz);
    r.kappa_b = hz_to_rad(c.kappa_b_hz);
    r.kappa_in_b = hz_to_rad(c.kappa_in_b_hz);
    r.epsilon = hz_to_rad(c.epsilon_hz);
    return r;
}

double carrier_omega(const Scenario& s) { return kTwoPi * kSpeedOfLight / (s.cavity.wavelength_nm * 1e-9); }

DetectionChain detection_chain(const Scenario& s) {
    const auto& d = s.detection;
    DetectionChain chain;
    chain.quantum_efficiency = d.quantum_efficiency;
    chain.fringe_visibility = d.fringe_visibility;
    chain.propagation_losses = d.losses;
    chain.electronic_noise_rel = d.electronic_noise_db ? from_db(*d.electronic_noise_db) : 0.0;
    chain.homodyne_phase = d.homodyne_phase_rad;
    return chain;
}

SpectralShape to_shape(std::optional<double> floor_db, std::optional<double> lowpass_db, double corner_hz,
                       const std::vector<PeakSpec>& peaks) {
    SpectralShape shape;
    shape.floor = floor_db ? from_db(*floor_db) : 0.0;
    shape.lowpass_level = lowpass_db ? from_db(*lowpass_db) : 0.0;
    shape.corner = hz_to_rad(corner_hz);
    for (const auto& p : peaks) shape.peaks.push_back({hz_to_rad(p.center_hz), hz_to_rad(p.width_hz), from_db(p.height_db)});
    return shape;
}

NoiseInputs noise_inputs(const Scenario& s, double seed_power) {
    NoiseInputs n;
    if (s.seed_field.technical) {
        const auto& sd = s.seed_field;
        const SpectralShape excess = to_shape(sd.floor_db, std::nullopt, 1.0, sd.peaks);
        n.seed_plus = vacuum_plus(excess, seed_power / sd.ref_power_w);
        n.seed_minus = n.seed_plus;
    }
    const SpectralShape pump = to_shape(s.pump.floor_db, std::nullopt, 1.0, s.pump.peaks);
    n.pump_plus = pump;
    n.pump_minus = pump;
    n.detuning = to_shape(std::nullopt, s.detuning.level_db, s.detuning.corner_hz, s.detuning.peaks);
    return n;
}

PowerSpectrum electronic_psd(const Scenario& s) {
    const double floor = s.detection.electronic_noise_db ? from_db(*s.detection.electronic_noise_db) : 0.0;
    std::vector<std::pair<double, double>> lines;
    for (const auto& l : s.analyzer.mains_lines) lines.emplace_back(l.frequency_hz, from_db(l.height_db));
    const double sigma = s.analyzer.mains_line_sigma_hz;
    return [floor, lines, sigma](double f) {
        double v = floor;
        for (const auto& [center, height] : lines) {
            const double z = (f - center) / sigma;
            v += height * std::exp(-0.5 * z * z);
        }
        return v;
    };
}

SweepModel sweep_model(const Scenario& s) {
    SweepModel m;
    m.rates = cavity_rates(s);
    m.classical_gain = s.cavity.classical_gain;
    m.carrier_omega = carrier_omega(s);
    m.noise = [s](double p) { return noise_inputs(s, p); };
    m.chain = detection_chain(s);
    m.plan = s.sweep.window;
    m.band_lo = s.sweep.band_lo_hz;
    m.band_hi = s.sweep.band_hi_hz;
    return m;
}

LockConfig lock_config(const Scenario& s) {
    LockConfig c = s.lock.config;
    if (s.lock.v_plus && s.lock.v_minus) {
        c.v_plus = *s.lock.v_plus;
        c.v_minus = *s.lock.v_minus;
        return c;
    }
    const CavityParams params =
        intracavity_fields(s.seed_field.power_w, s.cavity.classical_gain, cavity_rates(s), carrier_omega(s));
    const NoiseInputs noise = noise_inputs(s, s.seed_field.power_w);
    const DetectionChain chain = detection_chain(s);
    const double w = hz_to_rad(s.lock.analysis_hz);
    c.v_plus = apply_chain(quadrature_variance(params, noise, Quadrature::amplitude, w), chain);
    c.v_minus = apply_chain(quadrature_variance(params, noise, Quadrature::phase, w), chain);
    return c;
}

}  // namespace sqz
