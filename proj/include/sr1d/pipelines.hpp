#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sr1d/io.hpp"

namespace sr1d::pipelines {

/// Outcome of one subcommand. Output paths are relative to the run directory.
struct RunResult {
    bool ok = true;
    std::vector<std::string> failures;
    std::vector<std::string> outputs;
    io::json summary = io::json::object();

    void fail(std::string why) {
        ok = false;
        failures.push_back(std::move(why));
    }
};

RunResult cmd_exact(const io::RunConfig& cfg, const std::filesystem::path& dir);
RunResult cmd_meanfield(const io::RunConfig& cfg, const std::filesystem::path& dir);
RunResult cmd_twa(const io::RunConfig& cfg, const std::filesystem::path& dir);
RunResult cmd_superspin(const io::RunConfig& cfg, const std::filesystem::path& dir);
RunResult cmd_thresholds(const io::RunConfig& cfg, const std::filesystem::path& dir);
RunResult cmd_linewidth(const io::RunConfig& cfg, const std::filesystem::path& dir);
RunResult cmd_ansatz_fit(const io::RunConfig& cfg, const std::filesystem::path& dir);
RunResult cmd_collapse(const io::RunConfig& cfg, const std::filesystem::path& dir);

const std::vector<std::string>& command_names();

/// Run a subcommand into cfg.output, writing summary.json and manifest.json.
/// Errors thrown by the pipeline are caught and recorded as failures.
RunResult run_command(const std::string& name, const io::RunConfig& cfg);

}  // namespace sr1d::pipelines
