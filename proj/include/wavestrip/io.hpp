#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "wavestrip/continuation.hpp"
#include "wavestrip/wave_operator.hpp"

namespace wavestrip {

/// Parsed run configuration: the physical/numerical problem, the run mode,
/// and the mode-specific options (kept as JSON until the command consumes
/// them). Validation failures throw ConfigError naming the offending key.
struct RunConfig {
    Problem problem;
    std::string mode;
    nlohmann::json options;       // mode-specific block
    std::string output_dir = "out";
    ContinuationConfig continuation;
};

RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_json(const nlohmann::json& j);

nlohmann::json vorticity_to_json(const VorticityModel& m);
VorticityModel vorticity_from_json(const nlohmann::json& j);

/// Full-precision decimal formatting (%.17g); round-trips exactly.
std::string fmt_full(double v);

/// Self-describing JSON persistence of a state. Lossless at stored precision.
void save_state(const std::string& path, const Problem& p, const State& s);

struct LoadedState {
    Problem problem;
    State state;
};

LoadedState load_state(const std::string& path);

/// Continuation checkpoint: last two branch points plus the resolved
/// thresholds, enough to resume without re-deriving the tangent.
void save_checkpoint(const std::string& path, const Problem& p,
                     const ContinuationConfig& cfg,
                     const BranchPoint& prev, const BranchPoint& last);

struct LoadedCheckpoint {
    Problem problem;
    ContinuationConfig config;
    BranchPoint prev;
    BranchPoint last;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

} // namespace wavestrip
