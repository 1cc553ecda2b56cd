#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ofm/data/dataset.hpp"
#include "ofm/flow/cfm.hpp"
#include "ofm/fno/operator.hpp"

namespace ofm {

/* One config file drives every subcommand.  Sectioned key = value text
 * (JSON with the same section/key layout is accepted too); unknown sections
 * or keys are rejected, and validation reports every problem at once rather
 * than stopping at the first.
 *
 * Input paths named here are resolved by the subcommand that reads them, not
 * at parse time, so one file can describe a pipeline whose early steps create
 * what later steps consume. */

struct RunSection {
  std::uint64_t seed = 0;
  bool seed_set = false;  // seed is mandatory; parse tracks presence
  int threads = 1;
  std::string out = "out";
};

struct GridSection {
  int resolution = 256;
  int resolution_y = 0;  // 0 keeps the domain one-dimensional
  double lo = 0.0, hi = 1.0;
};

struct DatasetSection {
  std::string kind = "gp";  // gp | tgp
  int count = 2000;
  double bound_lower = -1.2, bound_upper = 1.2;  // tgp only
  std::string path;  // container written by gen-data / read by later stages
};

struct RegressionSection {
  int n_obs = 6;
  double noise_std = 0.1;
  int truth_samples = 1000;  // oracle posterior draws for scoring
};

struct MetricsSection {
  int eval_samples = 1000;  // model draws for distribution diagnostics
};

struct RunConfig {
  RunSection run;
  GridSection grid;
  KernelConfig data_kernel;
  KernelConfig reference_kernel;
  DatasetSection dataset;
  FnoConfig fno;
  TrainConfig cfm;
  SolverConfig solver;
  DivergenceConfig divergence;
  SgldConfig sgld;
  RegressionSection regression;
  MetricsSection metrics;

  RunConfig() {  // the reference measure defaults to a rough exponential GP
    reference_kernel.l = 0.01;
    reference_kernel.zeta = 0.5;
  }

  GridSpec make_grid() const;
};

/* Carries the full problem list; what() joins them line by line. */
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& source_name);

/* Emits every key explicitly (defaults applied); parsing the result yields an
 * equivalent config. */
std::string serialize_config(const RunConfig& cfg);

}  // namespace ofm
