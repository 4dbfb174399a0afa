#pragma once

#include "femu/config.hpp"
#include "femu/updating.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace femu {

/// JSON document for one method. Wall time is deliberately absent so reruns
/// with the same seeds are byte-identical; see timing_csv.
std::string report_json(const UpdateReport& report, const RunConfig& cfg);

/// One row per GA generation or SA temperature level.
std::string history_csv(const UpdateReport& report);

/// One row per outer RSM iteration.
std::string rsm_iterations_csv(const UpdateReport& report);

/// Per-mode frequencies (Hz) and signed % errors for every report, columns in
/// the order given.
std::string comparison_csv(const std::vector<UpdateReport>& reports);

/// Fixed-width table: frequencies per mode, then average error, mean MAC,
/// FE evaluations and wall time rows.
std::string comparison_text(const std::vector<UpdateReport>& reports);

std::string timing_csv(const std::vector<UpdateReport>& reports);

/// Writes text with LF endings, replacing any existing file.
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace femu
