#include "mamdp/config.hpp"

#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <sstream>
#include <string>

#include "mamdp/errors.hpp"

namespace mamdp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path, what);
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known) fail(join(path, item.key()), "unknown field");
    }
}

const json& require_field(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(join(path, key), "required field is missing");
    return *it;
}

int read_int(const json& value, const std::string& path) {
    if (!value.is_number_integer() && !value.is_number_unsigned())
        fail(path, "must be an integer");
    return value.get<int>();
}

long long read_long(const json& value, const std::string& path) {
    if (!value.is_number_integer() && !value.is_number_unsigned())
        fail(path, "must be an integer");
    return value.get<long long>();
}

double read_real(const json& value, const std::string& path) {
    if (!value.is_number()) fail(path, "must be a number");
    return value.get<double>();
}

bool read_bool(const json& value, const std::string& path) {
    if (!value.is_boolean()) fail(path, "must be true or false");
    return value.get<bool>();
}

std::string read_string(const json& value, const std::string& path) {
    if (!value.is_string()) fail(path, "must be a string");
    return value.get<std::string>();
}

std::vector<int> read_int_list(const json& value, const std::string& path) {
    if (!value.is_array()) fail(path, "must be a list of integers");
    std::vector<int> out;
    out.reserve(value.size());
    for (std::size_t k = 0; k < value.size(); ++k)
        out.push_back(read_int(value[k], path + "[" + std::to_string(k) + "]"));
    return out;
}

/// Re-scopes a ConfigError raised with the default "scenario.*" field path to
/// the actual location of the scenario object (bench rows).
[[noreturn]] void rescope(const ConfigError& e, const std::string& scenario_path) {
    const std::string prefix = "scenario";
    std::string field = e.field;
    if (field.compare(0, prefix.size(), prefix) == 0)
        field = scenario_path + field.substr(prefix.size());
    const std::string what = e.what();
    std::string message = what;
    const std::string lead = e.field + ": ";
    if (what.compare(0, lead.size(), lead) == 0) message = what.substr(lead.size());
    throw ConfigError(field, message);
}

ScenarioConfig parse_scenario(const json& obj, const std::string& path) {
    if (!obj.is_object()) fail(path, "must be an object");
    const std::string type = read_string(require_field(obj, "type", path), join(path, "type"));

    ScenarioConfig scenario;
    if (type == "grid") {
        scenario.kind = ScenarioConfig::Kind::Grid;
        reject_unknown(obj, path,
                       {"type", "rows", "cols", "n_robots", "targets", "start_cells",
                        "move_success", "congestion_factor", "congestion_threshold",
                        "detect_prob"});
        GridConfig& g = scenario.grid;
        g.rows = read_int(require_field(obj, "rows", path), join(path, "rows"));
        g.cols = read_int(require_field(obj, "cols", path), join(path, "cols"));
        g.n_robots = read_int(require_field(obj, "n_robots", path), join(path, "n_robots"));
        g.targets = read_int_list(require_field(obj, "targets", path), join(path, "targets"));
        g.start_cells =
            read_int_list(require_field(obj, "start_cells", path), join(path, "start_cells"));
        g.move_success =
            read_real(require_field(obj, "move_success", path), join(path, "move_success"));
        g.congestion_factor = read_real(require_field(obj, "congestion_factor", path),
                                        join(path, "congestion_factor"));
        g.congestion_threshold = read_int(require_field(obj, "congestion_threshold", path),
                                          join(path, "congestion_threshold"));
        g.detect_prob =
            read_real(require_field(obj, "detect_prob", path), join(path, "detect_prob"));
    } else if (type == "patrol") {
        scenario.kind = ScenarioConfig::Kind::Patrol;
        reject_unknown(obj, path,
                       {"type", "n_locations", "n_units", "n_adversaries", "unit_success",
                        "adversary_hold", "unit_clash_factor", "adversary_evade_factor",
                        "catch_prob"});
        PatrolConfig& p = scenario.patrol;
        p.n_locations =
            read_int(require_field(obj, "n_locations", path), join(path, "n_locations"));
        p.n_units = read_int(require_field(obj, "n_units", path), join(path, "n_units"));
        p.n_adversaries =
            read_int(require_field(obj, "n_adversaries", path), join(path, "n_adversaries"));
        p.unit_success =
            read_real(require_field(obj, "unit_success", path), join(path, "unit_success"));
        p.adversary_hold =
            read_real(require_field(obj, "adversary_hold", path), join(path, "adversary_hold"));
        p.unit_clash_factor = read_real(require_field(obj, "unit_clash_factor", path),
                                        join(path, "unit_clash_factor"));
        p.adversary_evade_factor = read_real(require_field(obj, "adversary_evade_factor", path),
                                             join(path, "adversary_evade_factor"));
        p.catch_prob =
            read_real(require_field(obj, "catch_prob", path), join(path, "catch_prob"));
    } else {
        fail(join(path, "type"), "must be \"grid\" or \"patrol\"");
    }

    try {
        if (scenario.kind == ScenarioConfig::Kind::Grid)
            scenario.grid.validate();
        else
            scenario.patrol.validate();
    } catch (const ConfigError& e) {
        if (path != "scenario") rescope(e, path);
        throw;
    }
    return scenario;
}

SolverSection parse_solver(const json& obj, const std::string& path) {
    if (!obj.is_object()) fail(path, "must be an object");
    reject_unknown(obj, path,
                   {"epsilon", "max_rounds", "tol", "companion_mode", "refresh_local_kernels",
                    "sample_budget", "seed"});
    SolverSection solver;
    if (auto it = obj.find("epsilon"); it != obj.end()) {
        solver.epsilon = read_real(*it, join(path, "epsilon"));
        if (solver.epsilon < 0.0) fail(join(path, "epsilon"), "must be >= 0");
    }
    if (auto it = obj.find("max_rounds"); it != obj.end()) {
        solver.max_rounds = read_int(*it, join(path, "max_rounds"));
        if (solver.max_rounds < 1) fail(join(path, "max_rounds"), "must be >= 1");
    }
    if (auto it = obj.find("tol"); it != obj.end()) {
        solver.tol = read_real(*it, join(path, "tol"));
        if (solver.tol <= 0.0) fail(join(path, "tol"), "must be > 0");
    }
    if (auto it = obj.find("companion_mode"); it != obj.end()) {
        const std::string mode = read_string(*it, join(path, "companion_mode"));
        if (mode == "uniform")
            solver.companion_mode = CompanionDistribution::Uniform;
        else if (mode == "product_qhat")
            solver.companion_mode = CompanionDistribution::ProductQhat;
        else if (mode == "sampled")
            solver.companion_mode = CompanionDistribution::Sampled;
        else
            fail(join(path, "companion_mode"),
                 "must be \"uniform\", \"product_qhat\", or \"sampled\"");
    }
    if (auto it = obj.find("refresh_local_kernels"); it != obj.end())
        solver.refresh_local_kernels = read_bool(*it, join(path, "refresh_local_kernels"));
    if (auto it = obj.find("sample_budget"); it != obj.end()) {
        solver.sample_budget = read_long(*it, join(path, "sample_budget"));
        if (solver.sample_budget != -1 && solver.sample_budget < 1)
            fail(join(path, "sample_budget"), "must be -1 (auto) or >= 1");
    }
    if (auto it = obj.find("seed"); it != obj.end()) {
        if (read_long(*it, join(path, "seed")) < 0) fail(join(path, "seed"), "must be >= 0");
        solver.seed = it->get<std::uint64_t>();
    }
    return solver;
}

AnalysisSection parse_analysis(const json& obj, const std::string& path) {
    if (!obj.is_object()) fail(path, "must be an object");
    reject_unknown(obj, path,
                   {"delta_budget", "sensitivity_samples", "oracle_enabled", "oracle_cap"});
    AnalysisSection analysis;
    if (auto it = obj.find("delta_budget"); it != obj.end()) {
        analysis.delta_budget = read_long(*it, join(path, "delta_budget"));
        if (analysis.delta_budget < 1) fail(join(path, "delta_budget"), "must be >= 1");
    }
    if (auto it = obj.find("sensitivity_samples"); it != obj.end()) {
        analysis.sensitivity_samples = read_int(*it, join(path, "sensitivity_samples"));
        if (analysis.sensitivity_samples < 1)
            fail(join(path, "sensitivity_samples"), "must be >= 1");
    }
    if (auto it = obj.find("oracle_enabled"); it != obj.end())
        analysis.oracle_enabled = read_bool(*it, join(path, "oracle_enabled"));
    if (auto it = obj.find("oracle_cap"); it != obj.end()) {
        analysis.oracle_cap = read_long(*it, join(path, "oracle_cap"));
        if (analysis.oracle_cap < 1) fail(join(path, "oracle_cap"), "must be >= 1");
    }
    return analysis;
}

BenchSection parse_bench(const json& obj, const std::string& path) {
    if (!obj.is_object()) fail(path, "must be an object");
    reject_unknown(obj, path, {"trials", "rows"});
    BenchSection bench;
    if (auto it = obj.find("trials"); it != obj.end()) {
        bench.trials = read_int(*it, join(path, "trials"));
        if (bench.trials < 1) fail(join(path, "trials"), "must be >= 1");
    }
    const json& rows = require_field(obj, "rows", path);
    if (!rows.is_array()) fail(join(path, "rows"), "must be a list");
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::string row_path = join(path, "rows[" + std::to_string(k) + "]");
        const json& row = rows[k];
        if (!row.is_object()) fail(row_path, "must be an object");
        reject_unknown(row, row_path, {"label", "scenario"});
        BenchRow parsed;
        parsed.label =
            read_string(require_field(row, "label", row_path), join(row_path, "label"));
        if (parsed.label.empty()) fail(join(row_path, "label"), "must not be empty");
        parsed.scenario =
            parse_scenario(require_field(row, "scenario", row_path), join(row_path, "scenario"));
        bench.rows.push_back(std::move(parsed));
    }
    return bench;
}

}  // namespace

std::string ScenarioConfig::describe() const {
    std::ostringstream out;
    if (kind == Kind::Grid) {
        out << "N=" << grid.n_robots << " B=" << grid.targets.size() << " L=" << grid.rows << "x"
            << grid.cols << " targets(";
        for (std::size_t k = 0; k < grid.targets.size(); ++k)
            out << (k ? " " : "") << grid.targets[k];
        out << ") starts(";
        for (std::size_t k = 0; k < grid.start_cells.size(); ++k)
            out << (k ? " " : "") << grid.start_cells[k];
        out << ")";
    } else {
        out << "units=" << patrol.n_units << " adversaries=" << patrol.n_adversaries
            << " locations=" << patrol.n_locations;
    }
    return out.str();
}

SearchConfig SolverSection::to_search_config() const {
    SearchConfig config;
    config.epsilon = epsilon;
    config.max_rounds = max_rounds;
    config.companion_mode = companion_mode;
    config.tol = tol;
    config.seed = seed;
    config.refresh_local_kernels = refresh_local_kernels;
    config.sample_budget = sample_budget;
    return config;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail("config", std::string("not valid JSON: ") + e.what());
    }
    if (!root.is_object()) fail("config", "top level must be an object");
    reject_unknown(root, "", {"schema_version", "scenario", "solver", "analysis", "bench"});

    ExperimentConfig config;
    config.schema_version =
        read_int(require_field(root, "schema_version", ""), "schema_version");
    if (config.schema_version != 1)
        fail("schema_version",
             "unsupported value " + std::to_string(config.schema_version) + "; expected 1");

    if (auto it = root.find("scenario"); it != root.end())
        config.scenario = parse_scenario(*it, "scenario");
    if (auto it = root.find("solver"); it != root.end())
        config.solver = parse_solver(*it, "solver");
    if (auto it = root.find("analysis"); it != root.end())
        config.analysis = parse_analysis(*it, "analysis");
    if (auto it = root.find("bench"); it != root.end()) config.bench = parse_bench(*it, "bench");
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("config", "cannot read file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

ScenarioBuild build_scenario(const ScenarioConfig& config) {
    return config.kind == ScenarioConfig::Kind::Grid ? build_grid(config.grid)
                                                     : build_patrol(config.patrol);
}

}  // namespace mamdp
