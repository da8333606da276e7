#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sr1d/models.hpp"

namespace sr1d::io {

using json = nlohmann::ordered_json;

/// Raised when a configuration fails validation; `problems` lists every offending key.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Every run parameter, with defaults. Mirrors the JSON config sections one to one.
struct RunConfig {
    // model
    ModelKind kind = ModelKind::RingCavity;
    int n_atoms = 4;
    double kd = 2.0943951023931953;  // 2 pi / 3
    Rates rates{1.0, 0.0, 1.0};
    std::optional<std::vector<double>> positions;
    // run
    std::uint64_t seed = 1;
    int workers = 1;
    double dt = 0.0;  // 0 picks 0.01 / (N Gamma_1D)
    int traj = 100;
    double t_end = 20.0;
    std::string output = "out";
    // grid
    std::vector<double> w_grid;
    double tau_max = 3.0;
    int tau_samples = 61;
    // exact
    bool spectrum = false;
    FieldDirection exact_field = FieldDirection::Right;
    double detuning_max = 10.0;
    int detuning_samples = 201;
    // meanfield
    int stride = 0;
    std::string initial = "random";
    double seed_coherence = 1e-3;
    double sync_fraction = 0.1;
    bool probe = false;
    // twa
    int taps = 50;
    double twa_t_average = 0.0;
    bool correlations = true;
    int histogram_bins = 41;
    FieldDirection twa_field = FieldDirection::Right;
    bool correlator = false;
    // superspin
    int superspin_m = 1;
    int superspin_p = 1;
    bool pump_source = true;
    // thresholds / linewidth steady-state protocol
    std::string solver = "twa";
    double t_relax = 0.0;
    double t_average = 0.0;
    int samples = 20;
    FieldDirection linewidth_field = FieldDirection::Right;
    // ansatz-fit / collapse
    std::string ansatz_input;
    std::string collapse_input;
};

/// Every problem with a config document (unknown sections or keys, wrong types, bad ranges).
std::vector<std::string> validate_config(const json& doc);

/// Validate and read a config document; a run manifest (with a "config" member) is accepted too.
RunConfig parse_config(const json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Full effective config; parse_config(to_json(c)) reproduces c.
json to_json(const RunConfig& cfg);

ReservoirModel make_model(const RunConfig& cfg);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

/// Small CSV writer with deterministic number formatting.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    CsvWriter& cell(double x);
    CsvWriter& cell(long long x);
    CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
    CsvWriter& cell(const std::string& s);
    void end_row();
    void close();
    ~CsvWriter();

private:
    std::FILE* file_ = nullptr;
    bool first_ = true;
};

void write_json(const std::filesystem::path& path, const json& doc);

/// Correlation matrix as rows (n, m, re, im), 1-based indices.
void write_matrix_csv(const std::filesystem::path& path, const ComplexMatrix& c);
ComplexMatrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace sr1d::io
