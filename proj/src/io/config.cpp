#include "ofm/io/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

#include "ofm/core/spectral.hpp"

namespace ofm {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::ostringstream os;
  os << "config: " << problems.size() << (problems.size() == 1 ? " problem" : " problems");
  for (const auto& p : problems) os << "\n  - " << p;
  return os.str();
}

/* A parsed scalar before it knows its destination type. */
struct Value {
  enum Kind { Int, Real, Bool, Str } kind = Str;
  long long i = 0;
  double d = 0.0;
  bool b = false;
  std::string s;
};

Value classify(const std::string& raw) {
  Value v;
  if (raw.size() >= 2 && ((raw.front() == '"' && raw.back() == '"') ||
                          (raw.front() == '\'' && raw.back() == '\''))) {
    v.kind = Value::Str;
    v.s = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = Value::Bool;
    v.b = raw == "true";
    return v;
  }
  try {
    size_t used = 0;
    long long i = std::stoll(raw, &used);
    if (used == raw.size()) {
      v.kind = Value::Int;
      v.i = i;
      v.d = double(i);
      return v;
    }
  } catch (...) {
  }
  try {
    size_t used = 0;
    double d = std::stod(raw, &used);
    if (used == raw.size()) {
      v.kind = Value::Real;
      v.d = d;
      return v;
    }
  } catch (...) {
  }
  v.kind = Value::Str;
  v.s = raw;
  return v;
}

class Router {
 public:
  explicit Router(RunConfig& cfg) : cfg_(cfg) { register_all(); }

  bool known_section(const std::string& s) const { return setters_.count(s) != 0; }

  void set(const std::string& section, const std::string& key, const Value& v,
           std::vector<std::string>& problems) {
    auto sec = setters_.find(section);
    if (sec == setters_.end()) {
      problems.push_back("unknown section [" + section + "]");
      return;
    }
    auto it = sec->second.find(key);
    if (it == sec->second.end()) {
      problems.push_back("unknown key " + section + "." + key);
      return;
    }
    std::string err = it->second(v);
    if (!err.empty()) problems.push_back(section + "." + key + ": " + err);
  }

 private:
  using Setter = std::function<std::string(const Value&)>;

  static Setter int_to(int& dst) {
    return [&dst](const Value& v) -> std::string {
      if (v.kind != Value::Int) return "expected an integer";
      dst = int(v.i);
      return {};
    };
  }
  static Setter long_to(long& dst) {
    return [&dst](const Value& v) -> std::string {
      if (v.kind != Value::Int) return "expected an integer";
      dst = long(v.i);
      return {};
    };
  }
  static Setter real_to(double& dst) {
    return [&dst](const Value& v) -> std::string {
      if (v.kind != Value::Int && v.kind != Value::Real) return "expected a number";
      dst = v.d;
      return {};
    };
  }
  static Setter bool_to(bool& dst) {
    return [&dst](const Value& v) -> std::string {
      if (v.kind != Value::Bool) return "expected true or false";
      dst = v.b;
      return {};
    };
  }
  static Setter str_to(std::string& dst) {
    return [&dst](const Value& v) -> std::string {
      if (v.kind != Value::Str) return "expected a string";
      dst = v.s;
      return {};
    };
  }

  void kernel_keys(const std::string& section, KernelConfig& k) {
    auto& m = setters_[section];
    m["family"] = [&k](const Value& v) -> std::string {
      if (v.kind != Value::Str) return "expected a string";
      try {
        k.family = kernel_family_from_string(v.s);
      } catch (const std::exception& e) {
        return e.what();
      }
      return {};
    };
    m["sigma2"] = real_to(k.sigma2);
    m["l"] = real_to(k.l);
    m["zeta"] = real_to(k.zeta);
    m["alpha"] = real_to(k.alpha);
    m["l0"] = real_to(k.l0);
    m["l1"] = real_to(k.l1);
  }

  void register_all() {
    RunConfig& c = cfg_;
    setters_["run"]["seed"] = [&c](const Value& v) -> std::string {
      if (v.kind != Value::Int || v.i < 0) return "expected a nonnegative integer";
      c.run.seed = std::uint64_t(v.i);
      c.run.seed_set = true;
      return {};
    };
    setters_["run"]["threads"] = int_to(c.run.threads);
    setters_["run"]["out"] = str_to(c.run.out);

    setters_["grid"]["resolution"] = int_to(c.grid.resolution);
    setters_["grid"]["resolution_y"] = int_to(c.grid.resolution_y);
    setters_["grid"]["lo"] = real_to(c.grid.lo);
    setters_["grid"]["hi"] = real_to(c.grid.hi);

    kernel_keys("data_kernel", c.data_kernel);
    kernel_keys("reference_kernel", c.reference_kernel);

    setters_["dataset"]["kind"] = str_to(c.dataset.kind);
    setters_["dataset"]["count"] = int_to(c.dataset.count);
    setters_["dataset"]["bound_lower"] = real_to(c.dataset.bound_lower);
    setters_["dataset"]["bound_upper"] = real_to(c.dataset.bound_upper);
    setters_["dataset"]["path"] = str_to(c.dataset.path);

    setters_["fno"]["modes0"] = int_to(c.fno.modes0);
    setters_["fno"]["modes1"] = int_to(c.fno.modes1);
    setters_["fno"]["width"] = int_to(c.fno.width);
    setters_["fno"]["n_layers"] = int_to(c.fno.n_layers);
    setters_["fno"]["time_features"] = int_to(c.fno.time_features);
    setters_["fno"]["activation"] = str_to(c.fno.activation);

    setters_["cfm"]["sigma_min"] = real_to(c.cfm.sigma_min);
    setters_["cfm"]["batch"] = int_to(c.cfm.batch);
    setters_["cfm"]["epochs"] = int_to(c.cfm.epochs);
    setters_["cfm"]["lr"] = real_to(c.cfm.lr);
    setters_["cfm"]["optimizer"] = str_to(c.cfm.optimizer);
    setters_["cfm"]["ot_coupling"] = bool_to(c.cfm.ot_coupling);
    setters_["cfm"]["checkpoint_every"] = int_to(c.cfm.checkpoint_every);

    setters_["solver"]["kind"] = str_to(c.solver.kind);
    setters_["solver"]["steps"] = int_to(c.solver.steps);
    setters_["solver"]["atol"] = real_to(c.solver.atol);
    setters_["solver"]["rtol"] = real_to(c.solver.rtol);
    setters_["solver"]["max_evals"] = int_to(c.solver.max_evals);

    setters_["divergence"]["mode"] = str_to(c.divergence.mode);
    setters_["divergence"]["n_probes"] = int_to(c.divergence.n_probes);
    setters_["divergence"]["probe_law"] = str_to(c.divergence.probe_law);

    setters_["sgld"]["iterations"] = long_to(c.sgld.iterations);
    setters_["sgld"]["burn_in"] = long_to(c.sgld.burn_in);
    setters_["sgld"]["thinning"] = long_to(c.sgld.thinning);
    setters_["sgld"]["temperature"] = real_to(c.sgld.temperature);
    setters_["sgld"]["lr_initial"] = real_to(c.sgld.lr_initial);
    setters_["sgld"]["lr_final"] = real_to(c.sgld.lr_final);
    setters_["sgld"]["posterior_mode"] = str_to(c.sgld.posterior_mode);

    setters_["regression"]["n_obs"] = int_to(c.regression.n_obs);
    setters_["regression"]["noise_std"] = real_to(c.regression.noise_std);
    setters_["regression"]["truth_samples"] = int_to(c.regression.truth_samples);

    setters_["metrics"]["eval_samples"] = int_to(c.metrics.eval_samples);
  }

  RunConfig& cfg_;
  std::map<std::string, std::map<std::string, Setter>> setters_;
};

void collect(std::vector<std::string>& problems, const std::string& label,
             const std::function<void()>& check) {
  try {
    check();
  } catch (const std::exception& e) {
    problems.push_back(label + ": " + e.what());
  }
}

void validate_config(const RunConfig& cfg, std::vector<std::string>& problems) {
  if (!cfg.run.seed_set) problems.push_back("run.seed is mandatory");
  if (cfg.run.threads < 1) problems.push_back("run.threads must be >= 1");
  if (cfg.run.out.empty()) problems.push_back("run.out must not be empty");

  if (cfg.grid.resolution < 2) problems.push_back("grid.resolution must be >= 2");
  if (cfg.grid.resolution_y < 0) problems.push_back("grid.resolution_y must be >= 0");
  if (cfg.grid.resolution_y == 1) problems.push_back("grid.resolution_y of 1 is not a plane");
  if (!(cfg.grid.lo < cfg.grid.hi)) problems.push_back("grid.lo must be below grid.hi");

  collect(problems, "data_kernel", [&] { cfg.data_kernel.validate(); });
  collect(problems, "reference_kernel", [&] { cfg.reference_kernel.validate(); });

  if (cfg.dataset.kind != "gp" && cfg.dataset.kind != "tgp")
    problems.push_back("dataset.kind must be gp or tgp");
  if (cfg.dataset.count < 1) problems.push_back("dataset.count must be >= 1");
  if (!(cfg.dataset.bound_lower < cfg.dataset.bound_upper))
    problems.push_back("dataset.bound_lower must be below dataset.bound_upper");

  FnoConfig fno = cfg.fno;
  fno.dim = cfg.grid.resolution_y > 0 ? 2 : 1;
  collect(problems, "fno", [&] { fno.validate(); });
  try {
    GridSpec g = cfg.make_grid();
    if (fno.modes0 > max_modes(g, 0))
      problems.push_back("fno.modes0 = " + std::to_string(fno.modes0) + " exceeds the limit " +
                         std::to_string(max_modes(g, 0)) + " for resolution " +
                         std::to_string(cfg.grid.resolution));
    if (fno.dim == 2 && fno.modes1 > max_modes(g, 1))
      problems.push_back("fno.modes1 = " + std::to_string(fno.modes1) + " exceeds the limit " +
                         std::to_string(max_modes(g, 1)) + " for resolution_y " +
                         std::to_string(cfg.grid.resolution_y));
  } catch (...) {
    // grid problems were already reported above
  }

  collect(problems, "cfm", [&] { cfg.cfm.validate(); });
  collect(problems, "solver", [&] { cfg.solver.validate(); });
  collect(problems, "divergence", [&] { cfg.divergence.validate(); });
  collect(problems, "sgld", [&] { cfg.sgld.validate(); });

  if (cfg.regression.n_obs < 0) problems.push_back("regression.n_obs must be >= 0");
  if (cfg.regression.n_obs > cfg.grid.resolution *
                                 std::max(1, cfg.grid.resolution_y))
    problems.push_back("regression.n_obs exceeds the number of grid points");
  if (!(cfg.regression.noise_std > 0))
    problems.push_back("regression.noise_std must be positive");
  if (cfg.regression.truth_samples < 2)
    problems.push_back("regression.truth_samples must be >= 2");
  if (cfg.metrics.eval_samples < 50)
    problems.push_back("metrics.eval_samples must be >= 50");
}

RunConfig parse_json_config(const std::string& text, const std::string& source_name) {
  RunConfig cfg;
  std::vector<std::string> problems;
  Router router(cfg);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError({source_name + ": invalid json: " + e.what()});
  }
  if (!j.is_object()) throw ConfigError({source_name + ": top level must be an object"});
  for (auto& [section, body] : j.items()) {
    if (!body.is_object()) {
      problems.push_back("section " + section + " must be an object of keys");
      continue;
    }
    for (auto& [key, val] : body.items()) {
      Value v;
      if (val.is_boolean()) {
        v.kind = Value::Bool;
        v.b = val.get<bool>();
      } else if (val.is_number_integer() || val.is_number_unsigned()) {
        v.kind = Value::Int;
        v.i = val.get<long long>();
        v.d = double(v.i);
      } else if (val.is_number_float()) {
        v.kind = Value::Real;
        v.d = val.get<double>();
      } else if (val.is_string()) {
        v.kind = Value::Str;
        v.s = val.get<std::string>();
      } else {
        problems.push_back(section + "." + key + ": unsupported value type");
        continue;
      }
      router.set(section, key, v, problems);
    }
  }
  validate_config(cfg, problems);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

GridSpec RunConfig::make_grid() const {
  return grid.resolution_y > 0
             ? GridSpec::plane(grid.resolution, grid.resolution_y, grid.lo, grid.hi, grid.lo,
                               grid.hi)
             : GridSpec::line(grid.resolution, grid.lo, grid.hi);
}

RunConfig parse_config_text(const std::string& text, const std::string& source_name) {
  size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{')
    return parse_json_config(text, source_name);

  RunConfig cfg;
  std::vector<std::string> problems;
  Router router(cfg);

  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = std::string::npos;
    bool quoted = false;
    for (size_t p = 0; p < line.size(); ++p) {
      if (line[p] == '"') quoted = !quoted;
      if (!quoted && (line[p] == '#' || line[p] == ';')) {
        hash = p;
        break;
      }
    }
    if (hash != std::string::npos) line = line.substr(0, hash);

    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        problems.push_back("line " + std::to_string(lineno) + ": malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!router.known_section(section))
        problems.push_back("line " + std::to_string(lineno) + ": unknown section [" + section +
                           "]");
      continue;
    }

    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string raw = trim(line.substr(eq + 1));
    if (key.empty() || raw.empty()) {
      problems.push_back("line " + std::to_string(lineno) + ": empty key or value");
      continue;
    }
    if (section.empty()) {
      problems.push_back("line " + std::to_string(lineno) + ": key outside any section");
      continue;
    }
    if (!router.known_section(section)) continue;  // already reported once
    router.set(section, key, classify(raw), problems);
  }

  validate_config(cfg, problems);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot open config file: " + path});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  auto q = [](const std::string& s) { return '"' + s + '"'; };

  os << "[run]\n"
     << "seed = " << c.run.seed << "\n"
     << "threads = " << c.run.threads << "\n"
     << "out = " << q(c.run.out) << "\n\n";

  os << "[grid]\n"
     << "resolution = " << c.grid.resolution << "\n"
     << "resolution_y = " << c.grid.resolution_y << "\n"
     << "lo = " << c.grid.lo << "\n"
     << "hi = " << c.grid.hi << "\n\n";

  auto kernel = [&](const char* name, const KernelConfig& k) {
    os << "[" << name << "]\n"
       << "family = " << q(to_string(k.family)) << "\n"
       << "sigma2 = " << k.sigma2 << "\n"
       << "l = " << k.l << "\n"
       << "zeta = " << k.zeta << "\n"
       << "alpha = " << k.alpha << "\n"
       << "l0 = " << k.l0 << "\n"
       << "l1 = " << k.l1 << "\n\n";
  };
  kernel("data_kernel", c.data_kernel);
  kernel("reference_kernel", c.reference_kernel);

  os << "[dataset]\n"
     << "kind = " << q(c.dataset.kind) << "\n"
     << "count = " << c.dataset.count << "\n"
     << "bound_lower = " << c.dataset.bound_lower << "\n"
     << "bound_upper = " << c.dataset.bound_upper << "\n"
     << "path = " << q(c.dataset.path) << "\n\n";

  os << "[fno]\n"
     << "modes0 = " << c.fno.modes0 << "\n"
     << "modes1 = " << c.fno.modes1 << "\n"
     << "width = " << c.fno.width << "\n"
     << "n_layers = " << c.fno.n_layers << "\n"
     << "time_features = " << c.fno.time_features << "\n"
     << "activation = " << q(c.fno.activation) << "\n\n";

  os << "[cfm]\n"
     << "sigma_min = " << c.cfm.sigma_min << "\n"
     << "batch = " << c.cfm.batch << "\n"
     << "epochs = " << c.cfm.epochs << "\n"
     << "lr = " << c.cfm.lr << "\n"
     << "optimizer = " << q(c.cfm.optimizer) << "\n"
     << "ot_coupling = " << (c.cfm.ot_coupling ? "true" : "false") << "\n"
     << "checkpoint_every = " << c.cfm.checkpoint_every << "\n\n";

  os << "[solver]\n"
     << "kind = " << q(c.solver.kind) << "\n"
     << "steps = " << c.solver.steps << "\n"
     << "atol = " << c.solver.atol << "\n"
     << "rtol = " << c.solver.rtol << "\n"
     << "max_evals = " << c.solver.max_evals << "\n\n";

  os << "[divergence]\n"
     << "mode = " << q(c.divergence.mode) << "\n"
     << "n_probes = " << c.divergence.n_probes << "\n"
     << "probe_law = " << q(c.divergence.probe_law) << "\n\n";

  os << "[sgld]\n"
     << "iterations = " << c.sgld.iterations << "\n"
     << "burn_in = " << c.sgld.burn_in << "\n"
     << "thinning = " << c.sgld.thinning << "\n"
     << "temperature = " << c.sgld.temperature << "\n"
     << "lr_initial = " << c.sgld.lr_initial << "\n"
     << "lr_final = " << c.sgld.lr_final << "\n"
     << "posterior_mode = " << q(c.sgld.posterior_mode) << "\n\n";

  os << "[regression]\n"
     << "n_obs = " << c.regression.n_obs << "\n"
     << "noise_std = " << c.regression.noise_std << "\n"
     << "truth_samples = " << c.regression.truth_samples << "\n\n";

  os << "[metrics]\n"
     << "eval_samples = " << c.metrics.eval_samples << "\n";
  return os.str();
}

}  // namespace ofm
