#include "nlsnpd/cli_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

namespace nlsnpd::cli {

namespace {

enum class ValueType { Number, Integer, Boolean, Text };

// Every accepted key.  Anything else is a config error.
const std::map<std::string, ValueType>& schema() {
  static const std::map<std::string, ValueType> keys = {
      {"model.hbar", ValueType::Number},
      {"model.mass", ValueType::Number},
      {"model.L", ValueType::Number},
      {"model.eta", ValueType::Number},
      {"model.q", ValueType::Number},
      {"grid.points_per_shift", ValueType::Integer},
      {"grid.periods", ValueType::Integer},
      {"guard.floor_rel", ValueType::Number},
      {"guard.halfwidth_steps", ValueType::Integer},
      {"spectrum.family", ValueType::Text},
      {"spectrum.kappa_min", ValueType::Number},
      {"spectrum.kappa_max", ValueType::Number},
      {"spectrum.count", ValueType::Integer},
      {"verify.kind", ValueType::Text},
      {"verify.kappa", ValueType::Number},
      {"verify.alpha", ValueType::Text},
      {"verify.energy", ValueType::Number},
      {"verify.tolerance", ValueType::Number},
      {"recurse.p0", ValueType::Number},
      {"recurse.p1", ValueType::Number},
      {"recurse.kappa", ValueType::Number},
      {"recurse.energy", ValueType::Number},
      {"recurse.steps", ValueType::Integer},
      {"evolve.initial", ValueType::Text},
      {"evolve.wavenumber", ValueType::Integer},
      {"evolve.kappa", ValueType::Number},
      {"evolve.kind", ValueType::Text},
      {"evolve.boundary", ValueType::Text},
      {"evolve.scheme", ValueType::Text},
      {"evolve.dt", ValueType::Number},
      {"evolve.steps", ValueType::Integer},
      {"evolve.snapshot_every", ValueType::Integer},
      {"evolve.norm_tolerance", ValueType::Number},
      {"evolve.absorbing_rate", ValueType::Number},
      {"evolve.max_stiffness", ValueType::Number},
      {"evolve.integrator", ValueType::Text},
      {"search.kind", ValueType::Text},
      {"search.kappa_plus", ValueType::Number},
      {"search.kappa_minus", ValueType::Number},
      {"search.periods_each_side", ValueType::Integer},
      {"search.window_shifts", ValueType::Number},
      {"search.max_iters", ValueType::Integer},
      {"search.optimize_energy", ValueType::Boolean},
      {"limits.kappa", ValueType::Number},
      {"limits.lambda_count", ValueType::Integer},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_number(const std::string& text, double& out) {
  if (text.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return errno == 0 && end == text.c_str() + text.size() && std::isfinite(out);
}

bool parse_integer(const std::string& text, long& out) {
  if (text.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtol(text.c_str(), &end, 10);
  return errno == 0 && end == text.c_str() + text.size();
}

bool parse_bool(const std::string& text, bool& out) {
  if (text == "true" || text == "1" || text == "yes") {
    out = true;
    return true;
  }
  if (text == "false" || text == "0" || text == "no") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace

void RunConfig::assign(const std::string& key, const std::string& value,
                       const std::string& where) {
  const auto it = schema().find(key);
  if (it == schema().end())
    throw ConfigError(where + ": unknown key '" + key + "'");
  double d = 0.0;
  long l = 0;
  bool b = false;
  switch (it->second) {
    case ValueType::Number:
      if (!parse_number(value, d))
        throw ConfigError(where + ": key '" + key + "' expects a finite number, got '" +
                          value + "'");
      break;
    case ValueType::Integer:
      if (!parse_integer(value, l))
        throw ConfigError(where + ": key '" + key + "' expects an integer, got '" +
                          value + "'");
      break;
    case ValueType::Boolean:
      if (!parse_bool(value, b))
        throw ConfigError(where + ": key '" + key + "' expects true/false, got '" +
                          value + "'");
      break;
    case ValueType::Text:
      if (value.empty()) throw ConfigError(where + ": key '" + key + "' is empty");
      break;
  }
  values_[key] = value;
  origin_[key] = where;
}

RunConfig RunConfig::parse(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (cfg.values_.count(key))
      throw ConfigError(where + ": duplicate key '" + key + "' (first set at " +
                        cfg.origin_[key] + ")");
    cfg.assign(key, trim(line.substr(eq + 1)), where);
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse(in, path.string());
}

void RunConfig::set(const std::string& assignment, const std::string& source) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError(source + ": expected key=value, got '" + assignment + "'");
  assign(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), source);
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::optional<double> RunConfig::get_double(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  double d = 0.0;
  parse_number(it->second, d);
  return d;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  return get_double(key).value_or(fallback);
}

long RunConfig::get_long(const std::string& key, long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  long l = 0;
  parse_integer(it->second, l);
  return l;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  bool b = fallback;
  parse_bool(it->second, b);
  return b;
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

ModelParams RunConfig::params() const {
  try {
    return make_params(get_double("model.hbar", 1.0), get_double("model.mass", 1.0),
                       get_double("model.L", 1.0), get_double("model.eta", 1.0),
                       get_double("model.q", 1.0));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size())
    throw DomainError("csv row has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(header_.size()));
  rows_.push_back(std::move(cells));
}

void CsvTable::write(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write(out);
}

CsvTable CsvTable::read(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty csv");
  CsvTable table(split(line));
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    table.add_row(split(line));
  }
  return table;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return read(in);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  throw ConfigError("csv has no column '" + name + "'");
}

unsigned sweep_threads() {
  if (const char* env = std::getenv("NLS_NPD_THREADS")) {
    long n = 0;
    if (parse_integer(env, n) && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

nlohmann::json params_json(const ModelParams& params) {
  return {{"hbar", params.hbar()},
          {"mass", params.mass()},
          {"L", params.L()},
          {"eta", params.eta()},
          {"q", params.q()},
          {"energy_scale", params.energy_scale()}};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Numerical lab for the nonpolynomial differential-difference NLS"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;

  using Handler = CommandOutcome (*)(const RunConfig&, const std::filesystem::path&);
  const std::vector<std::pair<std::string, Handler>> commands = {
      {"spectrum", cmd_spectrum}, {"verify", cmd_verify}, {"evolve", cmd_evolve},
      {"recurse", cmd_recurse},   {"search", cmd_search}, {"limits", cmd_limits},
  };
  for (const auto& [name, handler] : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("overrides", overrides, "key=value overrides");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  std::string command;
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    out << nlohmann::json{{"status", "config_error"}, {"error", e.what()}}.dump() << "\n";
    return kConfigError;
  }
  Handler handler = nullptr;
  for (const auto& [name, h] : commands)
    if (app.got_subcommand(name)) {
      command = name;
      handler = h;
    }

  nlohmann::json status = {{"command", command}, {"version", kVersion}};
  try {
    RunConfig cfg = RunConfig::load(config_path);
    for (const auto& o : overrides) cfg.set(o);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    CommandOutcome outcome = handler(cfg, dir);
    status["status"] = outcome.passed ? "pass" : "fail";
    status["failures"] = outcome.failures;
    status["summary"] = outcome.summary;
    out << status.dump() << "\n";
    return outcome.passed ? kPass : kCheckFailure;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    status["status"] = "config_error";
    status["error"] = e.what();
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    status["status"] = "config_error";
    status["error"] = e.what();
  } catch (const RangeError& e) {
    err << "config error: " << e.what() << "\n";
    status["status"] = "config_error";
    status["error"] = e.what();
  }
  out << status.dump() << "\n";
  return kConfigError;
}

}  // namespace nlsnpd::cli
