#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "krylov/cli.hpp"

namespace krylov {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& s, const std::string& key) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + s + "' is not a number");
  }
  if (pos != s.size()) throw ConfigError("key '" + key + "': '" + s + "' is not a number");
  return v;
}

std::int64_t parse_integer(const std::string& s, const std::string& key) {
  const double v = parse_number(s, key);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
  return static_cast<std::int64_t>(v);
}

std::string g17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

ScalarFn FunctionSpec::make() const {
  auto param = [this](std::size_t i, double dflt) { return i < params.size() ? params[i] : dflt; };
  if (name == "one") return [](double) { return 1.0; };
  if (name == "identity") return [](double x) { return x; };
  if (name == "exp") {
    const double c = param(0, 1.0);
    return [c](double x) { return std::exp(c * x); };
  }
  if (name == "sqrt") return [](double x) { return std::sqrt(x); };
  if (name == "inv") return [](double x) { return 1.0 / x; };
  if (name == "invsqrt") return [](double x) { return 1.0 / std::sqrt(x); };
  if (name == "abs") return [](double x) { return std::abs(x); };
  if (name == "log") return [](double x) { return std::log(x); };
  if (name == "poly") {
    const std::vector<double> c = params;
    return [c](double x) {
      double s = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
      return s;
    };
  }
  throw ConfigError("unknown function '" + name + "'");
}

std::string FunctionSpec::text() const {
  std::string s = name;
  if (!params.empty()) {
    s += "(";
    for (std::size_t i = 0; i < params.size(); ++i) s += (i ? ", " : "") + g17(params[i]);
    s += ")";
  }
  return s;
}

FunctionSpec parse_function_spec(const std::string& text_in) {
  const std::string text = trim(text_in);
  FunctionSpec f;
  const auto open = text.find('(');
  if (open == std::string::npos) {
    f.name = text;
  } else {
    if (text.back() != ')') throw ConfigError("function '" + text + "': missing ')'");
    f.name = trim(text.substr(0, open));
    std::stringstream ss(text.substr(open + 1, text.size() - open - 2));
    std::string item;
    while (std::getline(ss, item, ',')) f.params.push_back(parse_number(trim(item), "function"));
  }
  f.make();  // rejects unknown names
  return f;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  bool have_matrix = false;
  std::string section;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> seen;

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "run" && section != "tolerances") throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = (section.empty() ? "run" : section) + "." + key;
    if (seen.count(full)) throw ConfigError(where + "duplicate key '" + key + "'");
    seen[full] = lineno;

    if (section == "tolerances") {
      cfg.tolerances[key] = parse_number(value, key);
      continue;
    }
    try {
      if (key == "experiment") {
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
          item = trim(item);
          if (item == "all") {
            for (const auto& info : experiment_catalog()) cfg.experiments.push_back(info.name);
          } else {
            experiment_info(item);
            cfg.experiments.push_back(item);
          }
        }
      } else if (key == "matrix") {
        cfg.matrix = parse_matrix_spec(value);
        have_matrix = true;
      } else if (key == "k") {
        cfg.k = parse_integer(value, key);
      } else if (key == "m") {
        cfg.m = parse_integer(value, key);
      } else if (key == "seed") {
        const auto s = parse_integer(value, key);
        if (s < 0) throw ConfigError("seed must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(s);
      } else if (key == "output") {
        cfg.output = value;
      } else if (key == "function") {
        cfg.function = parse_function_spec(value);
      } else if (key == "reorth") {
        if (value == "none") {
          cfg.reorth = ReorthMode::None;
        } else if (value == "full") {
          cfg.reorth = ReorthMode::Full;
        } else {
          throw ConfigError("reorth must be 'none' or 'full'");
        }
      } else if (key == "threads") {
        cfg.threads = static_cast<int>(parse_integer(value, key));
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const KrylovError& e) {
      throw ConfigError(where + e.what());
    }
  }

  if (cfg.experiments.empty()) throw ConfigError("missing key 'experiment'");
  if (!have_matrix) throw ConfigError("missing key 'matrix'");
  if (cfg.k < 1) throw ConfigError("k must be at least 1");
  if (cfg.m < 1) throw ConfigError("m must be at least 1");
  if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
  for (const auto& [key, v] : cfg.tolerances) {
    bool known = false;
    for (const auto& name : cfg.experiments) known = known || experiment_info(name).default_tolerances.count(key) > 0;
    if (!known) throw ConfigError("unknown tolerance '" + key + "' for the selected experiments");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string normalized_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "experiment=";
  for (std::size_t i = 0; i < cfg.experiments.size(); ++i) os << (i ? "," : "") << cfg.experiments[i];
  os << "\nmatrix=" << format_matrix_spec(cfg.matrix) << "\nk=" << cfg.k << "\nm=" << cfg.m << "\nseed=" << cfg.seed
     << "\noutput=" << cfg.output << "\nfunction=" << (cfg.function ? cfg.function->text() : "default")
     << "\nreorth=" << (cfg.reorth == ReorthMode::Full ? "full" : "none") << "\n";
  for (const auto& [key, v] : cfg.tolerances) os << "tolerances." << key << "=" << g17(v) << "\n";
  // threads is deliberately left out: results do not depend on it.
  return os.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : normalized_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace krylov
