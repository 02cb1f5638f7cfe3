#pragma once

// Plot-ready CSV output. Metadata goes in leading `#` lines.
//
// Trace files:  frequency_hz,power_rel_snl,power_db,masked,window_id
// Lock files:   t_s,theta_total_rad,theta_disturbance_rad,error_signal,control_output

#include "sqz/analyzer.hpp"
#include "sqz/lockloop.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace sqz {

inline constexpr const char* kTraceHeader = "frequency_hz,power_rel_snl,power_db,masked,window_id";
inline constexpr const char* kLockHeader = "t_s,theta_total_rad,theta_disturbance_rad,error_signal,control_output";

// Shortest round-trip decimal form.
std::string format_number(double v);

// Window plans and RNG seed are always written; extra lines are appended as-is.
void write_trace_csv(std::ostream& out, const MeasuredTrace& trace, const std::vector<std::string>& metadata = {});

void write_lock_csv(std::ostream& out, const LockTrace& trace, const std::vector<std::string>& metadata = {});

// Opens the file or throws IoError.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace sqz
