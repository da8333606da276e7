#include "sr1d/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <tuple>

namespace sr1d::io {

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& p : problems) msg += "\n  " + p;
          return msg;
      }()),
      problems_(std::move(problems)) {}

namespace {

enum class Type { Int, UInt, Number, Bool, String, NumberArray };

struct Field {
    std::string section;
    std::string key;
    Type type;
    // returns an empty string when the (type-checked) value is acceptable
    std::function<std::string(const json&)> check;
    std::function<void(RunConfig&, const json&)> read;
    std::function<json(const RunConfig&)> write;
};

std::string type_name(Type t) {
    switch (t) {
        case Type::Int: return "an integer";
        case Type::UInt: return "a non-negative integer";
        case Type::Number: return "a number";
        case Type::Bool: return "a boolean";
        case Type::String: return "a string";
        case Type::NumberArray: return "an array of numbers";
    }
    return "";
}

bool has_type(const json& v, Type t) {
    switch (t) {
        case Type::Int: return v.is_number_integer();
        case Type::UInt: return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
        case Type::Number: return v.is_number();
        case Type::Bool: return v.is_boolean();
        case Type::String: return v.is_string();
        case Type::NumberArray:
            if (!v.is_array()) return false;
            for (const auto& e : v)
                if (!e.is_number()) return false;
            return true;
    }
    return false;
}

auto any_value = [](const json&) { return std::string(); };

std::function<std::string(const json&)> at_least(double lo, bool strict) {
    return [=](const json& v) {
        const double x = v.get<double>();
        if (strict ? x > lo : x >= lo) return std::string();
        std::ostringstream msg;
        msg << "must be " << (strict ? "> " : ">= ") << lo << " (got " << x << ")";
        return msg.str();
    };
}

std::function<std::string(const json&)> one_of(std::vector<std::string> allowed) {
    return [=](const json& v) {
        const auto s = v.get<std::string>();
        for (const auto& a : allowed)
            if (s == a) return std::string();
        std::string msg = "must be one of";
        for (const auto& a : allowed) msg += " '" + a + "'";
        return msg + " (got '" + s + "')";
    };
}

const std::vector<std::string> kDirections{"right", "left", "cavity"};

const std::vector<Field>& schema() {
    static const std::vector<Field> fields = {
        {"model", "kind", Type::String, one_of({"cavity", "ring", "waveguide"}),
         [](RunConfig& c, const json& v) { c.kind = model_kind_from_string(v.get<std::string>()); },
         [](const RunConfig& c) { return json(to_string(c.kind)); }},
        {"model", "n_atoms", Type::Int, at_least(1, false),
         [](RunConfig& c, const json& v) { c.n_atoms = v.get<int>(); },
         [](const RunConfig& c) { return json(c.n_atoms); }},
        {"model", "kd", Type::Number, any_value,
         [](RunConfig& c, const json& v) { c.kd = v.get<double>(); },
         [](const RunConfig& c) { return json(c.kd); }},
        {"model", "gamma_1d", Type::Number, at_least(0, true),
         [](RunConfig& c, const json& v) { c.rates.gamma_1d = v.get<double>(); },
         [](const RunConfig& c) { return json(c.rates.gamma_1d); }},
        {"model", "gamma_prime", Type::Number, at_least(0, false),
         [](RunConfig& c, const json& v) { c.rates.gamma_prime = v.get<double>(); },
         [](const RunConfig& c) { return json(c.rates.gamma_prime); }},
        {"model", "pump", Type::Number, at_least(0, false),
         [](RunConfig& c, const json& v) { c.rates.pump = v.get<double>(); },
         [](const RunConfig& c) { return json(c.rates.pump); }},
        {"model", "positions", Type::NumberArray, any_value,
         [](RunConfig& c, const json& v) { c.positions = v.get<std::vector<double>>(); },
         [](const RunConfig& c) { return c.positions ? json(*c.positions) : json(nullptr); }},

        {"run", "seed", Type::UInt, any_value,
         [](RunConfig& c, const json& v) { c.seed = v.get<std::uint64_t>(); },
         [](const RunConfig& c) { return json(c.seed); }},
        {"run", "workers", Type::Int, at_least(1, false),
         [](RunConfig& c, const json& v) { c.workers = v.get<int>(); },
         [](const RunConfig& c) { return json(c.workers); }},
        {"run", "dt", Type::Number, at_least(0, false),
         [](RunConfig& c, const json& v) { c.dt = v.get<double>(); },
         [](const RunConfig& c) { return json(c.dt); }},
        {"run", "traj", Type::Int, at_least(1, false),
         [](RunConfig& c, const json& v) { c.traj = v.get<int>(); },
         [](const RunConfig& c) { return json(c.traj); }},
        {"run", "t_end", Type::Number, at_least(0, true),
         [](RunConfig& c, const json& v) { c.t_end = v.get<double>(); },
         [](const RunConfig& c) { return json(c.t_end); }},
        {"run", "output", Type::String, any_value,
         [](RunConfig& c, const json& v) { c.output = v.get<std::string>(); },
         [](const RunConfig& c) { return json(c.output); }},

        {"grid", "w", Type::NumberArray, any_value,
         [](RunConfig& c, const json& v) { c.w_grid = v.get<std::vector<double>>(); },
         [](const RunConfig& c) { return json(c.w_grid); }},
        {"grid", "tau_max", Type::Number, at_least(0, true),
         [](RunConfig& c, const json& v) { c.tau_max = v.get<double>(); },
         [](const RunConfig& c) { return json(c.tau_max); }},
        {"grid", "tau_samples", Type::Int, at_least(2, false),
         [](RunConfig& c, const json& v) { c.tau_samples = v.get<int>(); },
         [](const RunConfig& c) { return json(c.tau_samples); }},

        {"exact", "spectrum", Type::Bool, any_value,
         [](RunConfig& c, const json& v) { c.spectrum = v.get<bool>(); },
         [](const RunConfig& c) { return json(c.spectrum); }},
        {"exact", "field", Type::String, one_of(kDirections),
         [](RunConfig& c, const json& v) { c.exact_field = field_direction_from_string(v.get<std::string>()); },
         [](const RunConfig& c) { return json(to_string(c.exact_field)); }},
        {"exact", "detuning_max", Type::Number, at_least(0, true),
         [](RunConfig& c, const json& v) { c.detuning_max = v.get<double>(); },
         [](const RunConfig& c) { return json(c.detuning_max); }},
        {"exact", "detuning_samples", Type::Int, at_least(2, false),
         [](RunConfig& c, const json& v) { c.detuning_samples = v.get<int>(); },
         [](const RunConfig& c) { return json(c.detuning_samples); }},

        {"meanfield", "stride", Type::Int, at_least(0, false),
         [](RunConfig& c, const json& v) { c.stride = v.get<int>(); },
         [](const RunConfig& c) { return json(c.stride); }},
        {"meanfield", "initial", Type::String, one_of({"random", "right", "left"}),
         [](RunConfig& c, const json& v) { c.initial = v.get<std::string>(); },
         [](const RunConfig& c) { return json(c.initial); }},
        {"meanfield", "seed_coherence", Type::Number, at_least(0, true),
         [](RunConfig& c, const json& v) { c.seed_coherence = v.get<double>(); },
         [](const RunConfig& c) { return json(c.seed_coherence); }},
        {"meanfield", "sync_fraction", Type::Number, at_least(0, true),
         [](RunConfig& c, const json& v) { c.sync_fraction = v.get<double>(); },
         [](const RunConfig& c) { return json(c.sync_fraction); }},
        {"meanfield", "probe", Type::Bool, any_value,
         [](RunConfig& c, const json& v) { c.probe = v.get<bool>(); },
         [](const RunConfig& c) { return json(c.probe); }},

        {"twa", "taps", Type::Int, at_least(1, false),
         [](RunConfig& c, const json& v) { c.taps = v.get<int>(); },
         [](const RunConfig& c) { return json(c.taps); }},
        {"twa", "t_average", Type::Number, at_least(0, false),
         [](RunConfig& c, const json& v) { c.twa_t_average = v.get<double>(); },
         [](const RunConfig& c) { return json(c.twa_t_average); }},
        {"twa", "correlations", Type::Bool, any_value,
         [](RunConfig& c, const json& v) { c.correlations = v.get<bool>(); },
         [](const RunConfig& c) { return json(c.correlations); }},
        {"twa", "histogram_bins", Type::Int, at_least(1, false),
         [](RunConfig& c, const json& v) { c.histogram_bins = v.get<int>(); },
         [](const RunConfig& c) { return json(c.histogram_bins); }},
        {"twa", "field", Type::String, one_of(kDirections),
         [](RunConfig& c, const json& v) { c.twa_field = field_direction_from_string(v.get<std::string>()); },
         [](const RunConfig& c) { return json(to_string(c.twa_field)); }},
        {"twa", "correlator", Type::Bool, any_value,
         [](RunConfig& c, const json& v) { c.correlator = v.get<bool>(); },
         [](const RunConfig& c) { return json(c.correlator); }},

        {"superspin", "m", Type::Int, at_least(1, false),
         [](RunConfig& c, const json& v) { c.superspin_m = v.get<int>(); },
         [](const RunConfig& c) { return json(c.superspin_m); }},
        {"superspin", "p", Type::Int, at_least(1, false),
         [](RunConfig& c, const json& v) { c.superspin_p = v.get<int>(); },
         [](const RunConfig& c) { return json(c.superspin_p); }},
        {"superspin", "pump_source", Type::Bool, any_value,
         [](RunConfig& c, const json& v) { c.pump_source = v.get<bool>(); },
         [](const RunConfig& c) { return json(c.pump_source); }},

        {"steady", "solver", Type::String, one_of({"twa", "superspin", "analytic"}),
         [](RunConfig& c, const json& v) { c.solver = v.get<std::string>(); },
         [](const RunConfig& c) { return json(c.solver); }},
        {"steady", "t_relax", Type::Number, at_least(0, false),
         [](RunConfig& c, const json& v) { c.t_relax = v.get<double>(); },
         [](const RunConfig& c) { return json(c.t_relax); }},
        {"steady", "t_average", Type::Number, at_least(0, false),
         [](RunConfig& c, const json& v) { c.t_average = v.get<double>(); },
         [](const RunConfig& c) { return json(c.t_average); }},
        {"steady", "samples", Type::Int, at_least(2, false),
         [](RunConfig& c, const json& v) { c.samples = v.get<int>(); },
         [](const RunConfig& c) { return json(c.samples); }},
        {"steady", "field", Type::String, one_of(kDirections),
         [](RunConfig& c, const json& v) { c.linewidth_field = field_direction_from_string(v.get<std::string>()); },
         [](const RunConfig& c) { return json(to_string(c.linewidth_field)); }},

        {"ansatz", "input", Type::String, any_value,
         [](RunConfig& c, const json& v) { c.ansatz_input = v.get<std::string>(); },
         [](const RunConfig& c) { return json(c.ansatz_input); }},
        {"collapse", "input", Type::String, any_value,
         [](RunConfig& c, const json& v) { c.collapse_input = v.get<std::string>(); },
         [](const RunConfig& c) { return json(c.collapse_input); }},
    };
    return fields;
}

const json& unwrap_manifest(const json& doc) {
    if (doc.is_object() && doc.contains("config") && doc.contains("tool")) return doc.at("config");
    return doc;
}

}  // namespace

std::vector<std::string> validate_config(const json& raw) {
    const json& doc = unwrap_manifest(raw);
    std::vector<std::string> problems;
    if (!doc.is_object()) return {"config must be a JSON object"};

    std::set<std::string> sections;
    for (const auto& f : schema()) sections.insert(f.section);
    for (const auto& [name, body] : doc.items()) {
        if (!sections.count(name)) {
            problems.push_back(name + ": unknown section");
            continue;
        }
        if (!body.is_object()) {
            problems.push_back(name + ": must be an object");
            continue;
        }
        for (const auto& [key, value] : body.items()) {
            const Field* field = nullptr;
            for (const auto& f : schema())
                if (f.section == name && f.key == key) field = &f;
            const std::string path = name + "." + key;
            if (!field) {
                problems.push_back(path + ": unknown key");
                continue;
            }
            if (value.is_null() && field->type == Type::NumberArray) continue;
            if (!has_type(value, field->type)) {
                problems.push_back(path + ": must be " + type_name(field->type));
                continue;
            }
            if (auto err = field->check(value); !err.empty()) problems.push_back(path + ": " + err);
        }
    }
    if (!problems.empty()) return problems;

    // cross-key checks on the merged values
    RunConfig cfg;
    for (const auto& f : schema())
        if (doc.contains(f.section) && doc.at(f.section).contains(f.key) &&
            !doc.at(f.section).at(f.key).is_null())
            f.read(cfg, doc.at(f.section).at(f.key));
    if (cfg.positions && static_cast<int>(cfg.positions->size()) != cfg.n_atoms)
        problems.push_back("model.positions: has " + std::to_string(cfg.positions->size()) +
                           " entries but model.n_atoms is " + std::to_string(cfg.n_atoms));
    for (std::size_t i = 0; i < cfg.w_grid.size(); ++i) {
        if (!(cfg.w_grid[i] > 0.0)) {
            problems.push_back("grid.w: pump rates must be positive");
            break;
        }
        if (i > 0 && !(cfg.w_grid[i] > cfg.w_grid[i - 1])) {
            problems.push_back("grid.w: pump rates must be strictly increasing");
            break;
        }
    }
    return problems;
}

RunConfig parse_config(const json& raw) {
    auto problems = validate_config(raw);
    if (!problems.empty()) throw ConfigError(std::move(problems));
    const json& doc = unwrap_manifest(raw);
    RunConfig cfg;
    for (const auto& f : schema())
        if (doc.contains(f.section) && doc.at(f.section).contains(f.key) &&
            !doc.at(f.section).at(f.key).is_null())
            f.read(cfg, doc.at(f.section).at(f.key));
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path.string() + ": cannot open config file"});
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError({path.string() + ": " + e.what()});
    }
    return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
    json doc = json::object();
    for (const auto& f : schema()) doc[f.section][f.key] = f.write(cfg);
    return doc;
}

ReservoirModel make_model(const RunConfig& cfg) {
    return build_model(cfg.kind, cfg.n_atoms, cfg.kd, cfg.rates, cfg.positions);
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    file_ = std::fopen(path.string().c_str(), "w");
    if (!file_) throw Error("cannot write " + path.string());
    for (const auto& h : header) cell(h);
    end_row();
}

CsvWriter& CsvWriter::cell(double x) { return cell(format_double(x)); }

CsvWriter& CsvWriter::cell(long long x) { return cell(std::to_string(x)); }

CsvWriter& CsvWriter::cell(const std::string& s) {
    if (!first_) std::fputc(',', file_);
    std::fputs(s.c_str(), file_);
    first_ = false;
    return *this;
}

void CsvWriter::end_row() {
    std::fputc('\n', file_);
    first_ = true;
}

void CsvWriter::close() {
    if (file_) std::fclose(file_);
    file_ = nullptr;
}

CsvWriter::~CsvWriter() { close(); }

void write_json(const std::filesystem::path& path, const json& doc) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

void write_matrix_csv(const std::filesystem::path& path, const ComplexMatrix& c) {
    CsvWriter csv(path, {"n", "m", "re", "im"});
    for (int a = 0; a < c.rows(); ++a)
        for (int b = 0; b < c.cols(); ++b)
            csv.cell(a + 1).cell(b + 1).cell(c(a, b).real()).cell(c(a, b).imag()).end_row();
}

ComplexMatrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::tuple<int, int, double, double>> rows;
    int n = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        int a, b;
        double re, im;
        if (!(ss >> a >> b >> re >> im)) throw Error(path.string() + ": malformed row '" + line + "'");
        rows.emplace_back(a, b, re, im);
        n = std::max({n, a, b});
    }
    ComplexMatrix c = ComplexMatrix::Zero(n, n);
    for (const auto& [a, b, re, im] : rows) {
        if (a < 1 || b < 1) throw Error(path.string() + ": indices are 1-based");
        c(a - 1, b - 1) = cplx(re, im);
    }
    return c;
}

}  // namespace sr1d::io
