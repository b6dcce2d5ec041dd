#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "covidx/ensemble.hpp"
#include "covidx/table.hpp"

namespace covidx {

struct InputConfig {
    enum class Kind { csv, dpc_national };
    Kind kind = Kind::csv;
    std::filesystem::path path;
    std::string date_column = "date";  // csv only
    std::vector<std::string> columns;  // csv only; empty = every non-date column
};

struct OutputConfig {
    std::filesystem::path path;
    OutputFormat format = OutputFormat::csv;
};

struct SpreadConfig {
    std::filesystem::path input;
    std::filesystem::path output;
    Smoothing smoothing;  // applied to the regional counts before the entropy
};

/// Everything `covidx index` needs. Relative paths are resolved against the
/// directory of the config file by load_run_config.
struct RunConfig {
    InputConfig input;
    PreprocessSettings preprocess;
    /// Resolved at run time by resolve_model_space when `default_model_space` is set.
    std::vector<ModelSpec> model_space;
    bool default_model_space = false;
    OutputConfig output;
    std::optional<SpreadConfig> spread;
};

/// Parses the JSON config. Unknown keys, wrong types and broken invariants
/// raise ConfigError with the offending field path in the message.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// "none", "ema:<alpha>" or "moving_average:<window>" (alias "ma:<window>").
Smoothing parse_smoothing(const std::string& text);

/// The default space for `panel`: levels members always, log-first-difference
/// members only when every value is strictly positive after preprocessing.
std::vector<ModelSpec> resolve_model_space(const RunConfig& config, const Panel& panel);

/// Annotated example config printed by `covidx default-config`.
std::string example_config();

} // namespace covidx
