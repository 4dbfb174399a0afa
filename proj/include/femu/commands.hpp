#pragma once

#include "femu/config.hpp"
#include "femu/scenario.hpp"
#include "femu/updating.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace femu {

// Process exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_config = 2;

struct RunOptions {
    std::filesystem::path config;
    std::optional<std::string> method;         // overrides [run] method
    std::optional<std::filesystem::path> out;  // overrides [run] out
    std::optional<std::uint64_t> seed;         // reseeds every method
};

/// Runs the selected methods and writes, into the output directory:
/// report_<m>.json, history_<m>.csv (GA/SA), rsm_iterations.csv (RSM),
/// comparison.csv, comparison.txt, timing.csv and resolved_config.ini.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Writes the RSM design with full-model costs as CSV.
int cmd_sample(const std::filesystem::path& config, const std::filesystem::path& out_file, std::ostream& out,
               std::ostream& err);

/// Prints frequencies, rigid-body flags and observed mode shapes of the
/// initial and ground-truth models.
int cmd_modes(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

/// Config after command-line overrides; throws ConfigError.
RunConfig resolve_config(const RunOptions& options);

/// Methods in comparison-table order: rsm, sa, ga.
std::vector<UpdateReport> run_methods(const RunConfig& cfg, const Scenario& scenario);

std::string sample_table(const Scenario& scenario, const RsmConfig& cfg);
TrainingSet parse_sample_table(const std::string& text, std::size_t parameter_count,
                               const std::string& origin = "<string>");
std::string modes_summary(const Scenario& scenario);

} // namespace femu
