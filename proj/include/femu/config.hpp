#pragma once

#include "femu/optimizers.hpp"
#include "femu/scenario.hpp"
#include "femu/updating.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace femu {

/// Bad or unreadable configuration. line is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, std::string origin = {}, std::size_t line = 0,
                std::string field = {});
    const std::string& origin() const { return origin_; }
    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::string origin_;
    std::size_t line_;
    std::string field_;
};

enum class Method { Rsm, Ga, Sa, All };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct RunConfig {
    ScenarioSpec scenario;
    std::string structure_file; // as written in the config; empty for the built-in H
    std::string rsm_design_file; // sample table to warm-start RSM, as written
    std::filesystem::path rsm_design_path; // the same, resolved against the config directory
    Method method = Method::All;
    RsmConfig rsm;
    GaConfig ga;
    SaConfig sa;
    std::string out_dir = "femu_out";
};

/// Parses INI text. Relative structure-file paths resolve against base_dir.
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>",
                       const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Reseeds every method from one seed: GA and SA get it directly, RSM uses it
/// for the design, the net and the inner GA.
void apply_seed(RunConfig& cfg, std::uint64_t seed);

/// Every resolved field as (section.key, value), in a fixed order.
std::vector<std::pair<std::string, std::string>> resolved_fields(const RunConfig& cfg);

/// INI text that parses back to the same resolved config.
std::string to_ini(const RunConfig& cfg);

/// Line-based structure definition:
///   formulation planar|grillage
///   node x y                                  (m)
///   element a b area I J Ip density E [nu]    (SI units)
///   fix dof                                   (global DOF index)
/// Blank lines and text after '#' are ignored.
BeamStructure parse_structure(const std::string& text, const std::string& origin = "<string>");
BeamStructure load_structure(const std::filesystem::path& path);

} // namespace femu
