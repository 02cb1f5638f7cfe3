#include "sqz/csv.hpp"

#include "sqz/detection.hpp"
#include "sqz/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace sqz {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_trace_csv(std::ostream& out, const MeasuredTrace& trace, const std::vector<std::string>& metadata) {
    for (std::size_t i = 0; i < trace.windows.size(); ++i) {
        const auto& w = trace.windows[i];
        out << "# window " << i << ": f_start_hz=" << format_number(w.f_start) << " f_stop_hz=" << format_number(w.f_stop)
            << " rbw_hz=" << format_number(w.rbw) << " n_avg=" << w.n_avg << " vbw_hz=" << format_number(w.vbw) << "\n";
    }
    out << "# rng_seed: " << trace.rng_seed << "\n";
    for (const auto& m : metadata) out << "# " << m << "\n";
    out << kTraceHeader << "\n";
    for (const auto& b : trace.bins) {
        const std::string db = b.power > 0.0 ? format_number(to_db(b.power)) : "-inf";
        out << format_number(b.frequency) << "," << format_number(b.power) << "," << db << "," << (b.masked ? 1 : 0)
            << "," << b.window_id << "\n";
    }
}

void write_lock_csv(std::ostream& out, const LockTrace& trace, const std::vector<std::string>& metadata) {
    const auto& s = trace.summary;
    const char* target = s.target == LockTarget::minimum ? "minimum" : s.target == LockTarget::maximum ? "maximum" : "none";
    out << "# converged: " << (s.converged ? "true" : "false") << "\n"
        << "# diverged: " << (s.diverged ? "true" : "false") << "\n"
        << "# target: " << target << "\n"
        << "# lock_point_rad: " << format_number(s.lock_point) << "\n"
        << "# mean_offset_rad: " << format_number(s.mean_offset) << "\n"
        << "# residual_rms_rad: " << format_number(s.residual_rms) << "\n"
        << "# settle_time_s: " << format_number(s.settle_time) << "\n";
    for (const auto& m : metadata) out << "# " << m << "\n";
    out << kLockHeader << "\n";
    for (const auto& p : trace.samples) {
        out << format_number(p.t) << "," << format_number(p.theta_total) << "," << format_number(p.theta_disturbance)
            << "," << format_number(p.error_signal) << "," << format_number(p.control_output) << "\n";
    }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace sqz
