#include <cstdio>
#include <fstream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sr1d/io.hpp"
#include "sr1d/pipelines.hpp"

using sr1d::io::json;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<double> dt;
    std::optional<int> traj;
};

json read_document(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw sr1d::io::ConfigError({path + ": cannot open config file"});
    try {
        json doc = json::parse(in);
        // a manifest from an earlier run carries its effective config
        if (doc.is_object() && doc.contains("config") && doc.contains("tool")) return doc.at("config");
        return doc;
    } catch (const json::parse_error& e) {
        throw sr1d::io::ConfigError({path + ": " + e.what()});
    }
}

int run(const std::string& command, const Overrides& ov) {
    sr1d::io::RunConfig cfg;
    try {
        json doc = read_document(ov.config);
        if (doc.is_object()) {
            if (ov.out) doc["run"]["output"] = *ov.out;
            if (ov.seed) doc["run"]["seed"] = *ov.seed;
            if (ov.workers) doc["run"]["workers"] = *ov.workers;
            if (ov.dt) doc["run"]["dt"] = *ov.dt;
            if (ov.traj) doc["run"]["traj"] = *ov.traj;
        }
        cfg = sr1d::io::parse_config(doc);
    } catch (const sr1d::io::ConfigError& e) {
        std::fprintf(stderr, "sr1d %s: invalid configuration\n", command.c_str());
        for (const auto& p : e.problems()) std::fprintf(stderr, "  %s\n", p.c_str());
        return 2;
    }

    const auto res = sr1d::pipelines::run_command(command, cfg);
    for (const auto& f : res.failures) std::fprintf(stderr, "sr1d %s: %s\n", command.c_str(), f.c_str());
    std::printf("%s: %s (%s)\n", command.c_str(), res.ok ? "ok" : "failed", cfg.output.c_str());
    return res.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steady-state superradiance in one-dimensional reservoirs"};
    app.require_subcommand(1);
    Overrides ov;
    std::string chosen;

    for (const auto& name : sr1d::pipelines::command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", ov.config, "JSON config file (or a manifest.json)")->check(CLI::ExistingFile);
        sub->add_option("--out", ov.out, "output directory");
        sub->add_option("--seed", ov.seed, "master seed");
        sub->add_option("--workers", ov.workers, "OpenMP threads");
        sub->add_option("--dt", ov.dt, "time step");
        sub->add_option("--traj", ov.traj, "number of TWA trajectories");
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return run(chosen, ov);
}
