#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ofm/data/dataset.hpp"
#include "ofm/flow/cfm.hpp"
#include "ofm/flow/field.hpp"
#include "ofm/flow/likelihood.hpp"
#include "ofm/io/artifacts.hpp"
#include "ofm/io/checkpoint.hpp"
#include "ofm/io/config.hpp"
#include "ofm/metrics/metrics.hpp"
#include "ofm/regression/posterior.hpp"

#ifndef OFM_BUILD_REV
#define OFM_BUILD_REV "unknown"
#endif

namespace fs = std::filesystem;
using namespace ofm;

namespace {

/* Fixed stream tags so each consumer of randomness gets an independent,
 * reproducible generator from the one run seed. */
constexpr std::uint64_t kStreamData = 11, kStreamEval = 12, kStreamTruth = 13, kStreamObs = 14,
                        kStreamSample = 15, kStreamLoglik = 16, kStreamSgld = 17,
                        kStreamOracle = 18;

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) { return Rng(seed, tag).u64(); }

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<std::string> checkpoint;
  std::optional<int> resolution;
  std::optional<std::string> div_mode;
  std::optional<std::string> posterior_mode;
  std::optional<int> epochs;
  int count = 64;       // sample-prior
  int limit = 16;       // loglik (0 = all)
  bool zero_init = false;
  bool print_ref_logpdf = false;
  std::string data_path;  // loglik input override
};

/* Applies command-line overrides, then revalidates by round-tripping through
 * the parser so an invalid effective config fails exactly like a bad file. */
RunConfig effective_config(const Flags& f) {
  RunConfig cfg = parse_config(f.config_path);
  if (f.seed) {
    cfg.run.seed = *f.seed;
    cfg.run.seed_set = true;
  }
  if (f.threads) cfg.run.threads = *f.threads;
  if (f.out) cfg.run.out = *f.out;
  if (f.resolution) cfg.grid.resolution = *f.resolution;
  if (f.div_mode) cfg.divergence.mode = *f.div_mode;
  if (f.posterior_mode) {
    std::string m = *f.posterior_mode;
    if (m == "exact-reparam") m = "exact_reparam";
    if (m == "paper-eq17") m = "paper_eq17";
    cfg.sgld.posterior_mode = m;
  }
  if (f.epochs) cfg.cfm.epochs = *f.epochs;
  return parse_config_text(serialize_config(cfg), "effective config");
}

class RunLog {
 public:
  RunLog(const fs::path& out_dir, const std::string& command, const RunConfig& cfg) {
    fs::create_directories(out_dir);
    path_ = out_dir / (command + ".log");
    log_.open(path_, std::ios::trunc);
    std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    log_ << "command: " << command << "\nstarted: " << stamp << "\nbuild: " << OFM_BUILD_REV
         << "\ncompiler: " << __VERSION__ << "\neigen: " << EIGEN_WORLD_VERSION << '.'
         << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION
         << "\nthreads: " << cfg.run.threads << "\n\n--- effective config ---\n"
         << serialize_config(cfg) << "\n--- run ---\n";
  }
  /* Mirrors result lines to stdout and the log file. */
  void line(const std::string& s) {
    std::cout << s << "\n";
    log_ << s << "\n";
  }
  void note(const std::string& s) { log_ << s << "\n"; }
  std::string path() const { return path_.string(); }

 private:
  fs::path path_;
  std::ofstream log_;
};

fs::path dataset_path(const RunConfig& cfg) {
  return cfg.dataset.path.empty() ? fs::path(cfg.run.out) / "dataset.ofm"
                                  : fs::path(cfg.dataset.path);
}

fs::path model_path(const RunConfig& cfg, const Flags& f) {
  return f.checkpoint ? fs::path(*f.checkpoint) : fs::path(cfg.run.out) / "model.ofm";
}

void save_dataset(const fs::path& path, const Dataset& ds, const RunConfig& cfg) {
  Checkpoint ck;
  ck.config_echo = serialize_config(cfg);
  ck.tensors.push_back({"values", Eigen::MatrixXd(ds.samples.values)});
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  save_checkpoint(path.string(), ck);

  nlohmann::json side = {{"kind", ds.truncated ? "tgp" : "gp"},
                         {"count", ds.size()},
                         {"seed", ds.seed},
                         {"draws", ds.draws},
                         {"acceptance_rate", ds.acceptance_rate()},
                         {"family", to_string(ds.kernel.family)},
                         {"sigma2", ds.kernel.sigma2},
                         {"l", ds.kernel.l},
                         {"zeta", ds.kernel.zeta},
                         {"resolution", ds.grid().shape[0]},
                         {"resolution_y", ds.grid().dim == 2 ? ds.grid().shape[1] : 0}};
  std::ofstream out(path.string() + ".json", std::ios::trunc);
  out << side.dump(2) << '\n';
}

FunctionBatch load_dataset(const fs::path& path, RunConfig* echoed = nullptr) {
  if (!fs::exists(path))
    throw std::runtime_error("dataset not found at " + path.string() +
                             "; run gen-data first or set dataset.path");
  Checkpoint ck = load_checkpoint(path.string());
  RunConfig dcfg = parse_config_text(ck.config_echo, path.string() + " (echo)");
  FunctionBatch batch;
  batch.grid = dcfg.make_grid();
  batch.channels = 1;
  batch.values = ck.tensor("values");
  if (batch.values.cols() != batch.grid.points())
    throw std::runtime_error("dataset tensor does not match its grid echo");
  if (echoed) *echoed = dcfg;
  return batch;
}

void save_model(const fs::path& path, const OperatorParams& params, const RunConfig& cfg,
                const std::vector<double>& losses) {
  Checkpoint ck;
  ck.config_echo = serialize_config(cfg);
  size_t keep = std::min<size_t>(losses.size(), 100);
  ck.loss_tail.assign(losses.end() - long(keep), losses.end());
  ck.tensors.push_back({"params", flatten_params(params)});
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  save_checkpoint(path.string(), ck);
}

struct Model {
  OperatorParams params;
  RunConfig train_cfg;
  std::vector<double> loss_tail;
};

Model load_model(const fs::path& path) {
  if (!fs::exists(path))
    throw std::runtime_error("model checkpoint not found at " + path.string() +
                             "; run train-prior first or pass --checkpoint");
  Checkpoint ck = load_checkpoint(path.string());
  Model m;
  m.train_cfg = parse_config_text(ck.config_echo, path.string() + " (echo)");
  FnoConfig arch = m.train_cfg.fno;
  arch.dim = m.train_cfg.grid.resolution_y > 0 ? 2 : 1;
  m.params = zero_params(arch);
  const Eigen::MatrixXd& flat = ck.tensor("params");
  if (flat.cols() != 1 || flat.rows() != m.params.param_count())
    throw std::runtime_error("model tensor has " + std::to_string(flat.size()) +
                             " entries, architecture expects " +
                             std::to_string(m.params.param_count()));
  unflatten_params(flat.col(0), m.params);
  m.loss_tail = ck.loss_tail;
  return m;
}

Dataset generate(const RunConfig& cfg, const GridSpec& grid, int count, std::uint64_t seed) {
  if (cfg.dataset.kind == "tgp") {
    Bounds b;
    b.lower = cfg.dataset.bound_lower;
    b.upper = cfg.dataset.bound_upper;
    return gen_tgp_functions(cfg.data_kernel, grid, b, count, seed, cfg.run.threads);
  }
  return gen_gp_functions(cfg.data_kernel, grid, count, seed, cfg.run.threads);
}

int cmd_gen_data(const RunConfig& cfg) {
  RunLog log(cfg.run.out, "gen-data", cfg);
  GridSpec grid = cfg.make_grid();
  Dataset ds = generate(cfg, grid, cfg.dataset.count, sub_seed(cfg.run.seed, kStreamData));
  fs::path path = dataset_path(cfg);
  save_dataset(path, ds, cfg);
  log.line("dataset = " + path.string());
  log.line("samples = " + std::to_string(ds.size()));
  log.line("grid_points = " + std::to_string(grid.points()));
  log.line("proposals = " + std::to_string(ds.draws));
  log.line("acceptance_rate = " + format_double(ds.acceptance_rate()));
  return 0;
}

int cmd_train_prior(const RunConfig& cfg, const Flags& f) {
  RunLog log(cfg.run.out, "train-prior", cfg);
  FunctionBatch data = load_dataset(dataset_path(cfg));
  GridSpec grid = data.grid;
  if (cfg.grid.resolution != grid.shape[0] ||
      (grid.dim == 2) != (cfg.grid.resolution_y > 0))
    throw std::runtime_error("config grid " + std::to_string(cfg.grid.resolution) +
                             " does not match dataset grid " + std::to_string(grid.shape[0]));

  GpPrior ref = make_prior(cfg.reference_kernel, grid);
  FnoConfig arch = cfg.fno;
  arch.dim = grid.dim;

  TrainConfig tcfg = cfg.cfm;
  tcfg.seed = cfg.run.seed;
  tcfg.threads = cfg.run.threads;

  fs::path out_model = model_path(cfg, f);
  auto on_checkpoint = [&](int epoch, const OperatorParams& p, double loss) {
    fs::path snap = fs::path(cfg.run.out) / ("model_ep" + std::to_string(epoch) + ".ofm");
    save_model(snap, p, cfg, {loss});
    log.note("checkpoint " + snap.string() + " loss " + format_double(loss));
  };

  TrainResult tr;
  if (f.zero_init && tcfg.epochs == 0) {
    tr.params = zero_params(arch);  // diagnostic identity-flow model
  } else {
    std::function<void(int, const OperatorParams&, double)> cb;
    if (tcfg.checkpoint_every > 0) cb = on_checkpoint;
    tr = train_prior(data, ref, arch, tcfg, cb);
    if (f.zero_init) throw std::runtime_error("--zero-init requires --epochs 0");
  }

  save_model(out_model, tr.params, cfg, tr.loss_history);
  log.line("model = " + out_model.string());
  log.line("params = " + std::to_string(tr.params.param_count()));
  log.line("epochs = " + std::to_string(tcfg.epochs));
  if (!tr.loss_history.empty())
    log.line("final_loss = " + format_double(tr.loss_history.back()));
  if (tr.aborted) {
    log.line("aborted_epoch = " + std::to_string(tr.aborted_epoch));
    std::cerr << "ofm: error [E_DIVERGED] training loss diverged at epoch "
              << tr.aborted_epoch << "; checkpoint holds the last stable parameters (log: "
              << log.path() << ")\n";
    return 3;
  }
  return 0;
}

int cmd_sample_prior(const RunConfig& cfg, const Flags& f) {
  RunLog log(cfg.run.out, "sample-prior", cfg);
  Model model = load_model(model_path(cfg, f));
  GridSpec grid = cfg.make_grid();
  if (model.params.cfg.dim != grid.dim)
    throw std::runtime_error("model dimensionality does not match the requested grid");
  GpPrior ref = make_prior(cfg.reference_kernel, grid);

  FnoField field(&model.params);
  Rng rng(sub_seed(cfg.run.seed, kStreamSample), 0);
  SampleStats st = sample_prior(field, ref, f.count, 1, cfg.solver, rng, cfg.run.threads);

  fs::path csv = fs::path(cfg.run.out) / "samples.csv";
  fs::path container = fs::path(cfg.run.out) / "samples.ofm";
  write_samples_csv(csv.string(), st.batch);
  Checkpoint ck;
  ck.config_echo = serialize_config(cfg);
  ck.tensors.push_back({"values", Eigen::MatrixXd(st.batch.values)});
  save_checkpoint(container.string(), ck);

  log.line("samples_csv = " + csv.string());
  log.line("samples_container = " + container.string());
  log.line("count = " + std::to_string(f.count));
  log.line("resolution = " + std::to_string(grid.shape[0]));
  log.line("mean_nfe = " + format_double(st.mean_nfe));
  return 0;
}

int cmd_eval_prior(const RunConfig& cfg, const Flags& f) {
  RunLog log(cfg.run.out, "eval-prior", cfg);
  Model model = load_model(model_path(cfg, f));
  GridSpec grid = cfg.make_grid();
  if (model.params.cfg.dim != grid.dim)
    throw std::runtime_error("model dimensionality does not match the requested grid");
  GpPrior ref = make_prior(cfg.reference_kernel, grid);

  FnoField field(&model.params);
  Rng rng(sub_seed(cfg.run.seed, kStreamSample), 0);
  int n = cfg.metrics.eval_samples;
  SampleStats st = sample_prior(field, ref, n, 1, cfg.solver, rng, cfg.run.threads);
  Dataset held_out = generate(cfg, grid, n, sub_seed(cfg.run.seed, kStreamEval));

  DistributionDiagnostics d = distribution_diagnostics(st.batch, held_out.samples);
  MetricsReport report;
  report.density_mse = d.density_mse;
  report.autocov_mse = d.autocov_mse;
  report.spectra_mse = d.spectra_mse;
  report.n_pred = n;
  report.n_truth = n;
  report.config_echo = serialize_config(cfg);
  fs::path mpath = fs::path(cfg.run.out) / "metrics.json";
  write_metrics_json(mpath.string(), report);

  log.line("metrics = " + mpath.string());
  log.line("density_mse = " + format_double(d.density_mse));
  log.line("autocov_mse = " + format_double(d.autocov_mse));
  log.line("spectra_mse = " + format_double(d.spectra_mse));
  log.line("mean_nfe = " + format_double(st.mean_nfe));
  return 0;
}

int cmd_loglik(const RunConfig& cfg, const Flags& f) {
  RunLog log(cfg.run.out, "loglik", cfg);
  Model model = load_model(model_path(cfg, f));
  fs::path data = f.data_path.empty() ? dataset_path(cfg) : fs::path(f.data_path);
  FunctionBatch batch = load_dataset(data);
  if (model.params.cfg.dim != batch.grid.dim)
    throw std::runtime_error("model dimensionality does not match the input data");
  GpPrior ref = make_prior(cfg.reference_kernel, batch.grid);
  FnoField field(&model.params);

  int n = batch.size();
  if (f.limit > 0) n = std::min(n, f.limit);

  std::string header = "sample,logp,log_prior_u0,div_integral,std_error,nfe";
  if (f.print_ref_logpdf) header += ",ref_logpdf";
  log.line(header);

  fs::path csv = fs::path(cfg.run.out) / "loglik.csv";
  std::ofstream out(csv, std::ios::trunc);
  out << header << '\n';
  for (int i = 0; i < n; ++i) {
    Rng rng(sub_seed(cfg.run.seed, kStreamLoglik), std::uint64_t(i));
    Eigen::MatrixXd u = batch.sample(i);
    LikelihoodResult lr = log_likelihood(field, u, ref, cfg.solver, cfg.divergence, rng);
    std::string row = std::to_string(i) + "," + format_double(lr.logp) + "," +
                      format_double(lr.log_prior_u0) + "," + format_double(lr.div_integral) +
                      "," + format_double(lr.std_error) + "," + std::to_string(lr.nfe);
    if (f.print_ref_logpdf) {
      double ref_lp = 0.0;
      for (int c = 0; c < u.cols(); ++c) ref_lp += gaussian_logpdf(ref, u.col(c));
      row += "," + format_double(ref_lp);
    }
    log.line(row);
    out << row << '\n';
  }
  log.note("loglik_csv = " + csv.string());
  return 0;
}

struct RegressionArtifacts {
  Eigen::VectorXd truth;
  ObservationSet obs;
  PosteriorChain chain;
  PosteriorSummary summary;
};

RegressionArtifacts run_regression(const RunConfig& cfg, const Model& model,
                                   const GridSpec& grid, RunLog& log) {
  GpPrior data_prior = make_prior(cfg.data_kernel, grid);
  GpPrior ref = make_prior(cfg.reference_kernel, grid);

  RegressionArtifacts art;
  Rng truth_rng(sub_seed(cfg.run.seed, kStreamTruth), 0);
  art.truth = data_prior.chol * truth_rng.normal_vec(grid.points());
  Rng obs_rng(sub_seed(cfg.run.seed, kStreamObs), 0);
  art.obs = subsample_observations(art.truth, cfg.regression.n_obs, cfg.regression.noise_std,
                                   obs_rng);

  SgldConfig sgld = cfg.sgld;
  sgld.seed = sub_seed(cfg.run.seed, kStreamSgld);
  long planned = (sgld.iterations - sgld.burn_in) / sgld.thinning;
  if (planned < 2)
    throw std::invalid_argument("sgld settings keep only " + std::to_string(planned) +
                                " samples; need at least 2 (check iterations/burn_in/thinning)");

  FnoField field(&model.params);
  log.note("sgld start: " + std::to_string(sgld.iterations) + " iterations, mode " +
           sgld.posterior_mode);
  art.chain = sgld_chain(field, art.obs, ref, sgld, cfg.solver, cfg.divergence);
  art.summary = summarize_posterior(art.chain);
  return art;
}

void export_regression(const RunConfig& cfg, const RegressionArtifacts& art,
                       const GridSpec& grid, RunLog& log) {
  fs::path pcsv = fs::path(cfg.run.out) / "posterior.csv";
  write_posterior_csv(pcsv.string(), grid, art.summary);

  fs::path ocsv = fs::path(cfg.run.out) / "observations.csv";
  std::ofstream obs_out(ocsv, std::ios::trunc);
  Eigen::MatrixXd pts = grid.coordinates();
  obs_out << "index,x,value\n";
  for (int i = 0; i < art.obs.count(); ++i)
    obs_out << art.obs.indices[size_t(i)] << ',' << format_double(pts(art.obs.indices[size_t(i)], 0))
            << ',' << format_double(art.obs.values[i]) << '\n';

  double worst_misfit = 0.0;
  for (int i = 0; i < art.obs.count(); ++i)
    worst_misfit = std::max(worst_misfit, std::abs(art.summary.mean[art.obs.indices[size_t(i)]] -
                                                   art.obs.values[i]));

  nlohmann::json summary = {
      {"chain_samples", art.chain.size()},
      {"log_posterior_first", art.chain.log_posteriors.front()},
      {"log_posterior_last", art.chain.log_posteriors.back()},
      {"n_obs", art.obs.count()},
      {"noise_std", art.obs.noise_std},
      {"worst_mean_misfit_at_obs", worst_misfit},
      {"posterior_mode", cfg.sgld.posterior_mode},
      {"config_echo", serialize_config(cfg)}};
  fs::path spath = fs::path(cfg.run.out) / "summary.json";
  std::ofstream sout(spath, std::ios::trunc);
  sout << summary.dump(2) << '\n';

  log.line("posterior_csv = " + pcsv.string());
  log.line("observations_csv = " + ocsv.string());
  log.line("summary_json = " + spath.string());
  log.line("chain_samples = " + std::to_string(art.chain.size()));
  log.line("worst_mean_misfit_at_obs = " + format_double(worst_misfit));
}

int cmd_regress(const RunConfig& cfg, const Flags& f) {
  RunLog log(cfg.run.out, "regress", cfg);
  Model model = load_model(model_path(cfg, f));
  GridSpec grid = cfg.make_grid();
  if (model.params.cfg.dim != grid.dim)
    throw std::runtime_error("model dimensionality does not match the requested grid");
  RegressionArtifacts art = run_regression(cfg, model, grid, log);
  export_regression(cfg, art, grid, log);
  return 0;
}

int cmd_eval_regression(const RunConfig& cfg, const Flags& f) {
  RunLog log(cfg.run.out, "eval-regression", cfg);
  Model model = load_model(model_path(cfg, f));
  GridSpec grid = cfg.make_grid();
  if (model.params.cfg.dim != grid.dim)
    throw std::runtime_error("model dimensionality does not match the requested grid");
  RegressionArtifacts art = run_regression(cfg, model, grid, log);
  export_regression(cfg, art, grid, log);

  // score against draws from the closed-form posterior of the data kernel
  GpPrior data_prior = make_prior(cfg.data_kernel, grid);
  GpPosterior oracle =
      gp_regression(data_prior, art.obs.indices, art.obs.values, art.obs.noise_std);
  Rng orng(sub_seed(cfg.run.seed, kStreamOracle), 0);
  FunctionBatch truth = FunctionBatch::zeros(grid, cfg.regression.truth_samples, 1);
  for (int i = 0; i < truth.size(); ++i) truth.set_sample(i, oracle.sample(orng));

  // predictive variance adds the observation noise floor to the chain spread
  Eigen::VectorXd pred_var =
      art.summary.stddev.array().square() + cfg.regression.noise_std * cfg.regression.noise_std;
  MetricsReport report;
  report.smse = smse(art.summary.mean, truth);
  report.msll = msll(art.summary.mean, pred_var, truth);
  report.n_pred = art.chain.size();
  report.n_truth = truth.size();
  report.config_echo = serialize_config(cfg);
  fs::path mpath = fs::path(cfg.run.out) / "metrics.json";
  write_metrics_json(mpath.string(), report);

  log.line("metrics = " + mpath.string());
  log.line("smse = " + format_double(report.smse));
  log.line("msll = " + format_double(report.msll));
  return 0;
}

int dispatch(const std::string& cmd, const Flags& f) {
  RunConfig cfg = effective_config(f);
  if (cmd == "gen-data") return cmd_gen_data(cfg);
  if (cmd == "train-prior") return cmd_train_prior(cfg, f);
  if (cmd == "sample-prior") return cmd_sample_prior(cfg, f);
  if (cmd == "eval-prior") return cmd_eval_prior(cfg, f);
  if (cmd == "loglik") return cmd_loglik(cfg, f);
  if (cmd == "regress") return cmd_regress(cfg, f);
  if (cmd == "eval-regression") return cmd_eval_regression(cfg, f);
  throw std::logic_error("unreachable subcommand " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"operator flow matching: function-space priors and regression"};
  app.require_subcommand(1);

  Flags f;
  std::vector<CLI::App*> subs;
  for (const char* name : {"gen-data", "train-prior", "sample-prior", "eval-prior", "loglik",
                           "regress", "eval-regression"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", f.config_path, "config file (sectioned text or json)")
        ->required();
    sub->add_option("--seed", f.seed, "override run.seed");
    sub->add_option("--threads", f.threads, "override run.threads");
    sub->add_option("--out", f.out, "override run.out directory");
    sub->add_option("--checkpoint", f.checkpoint, "model checkpoint path");
    sub->add_option("--resolution", f.resolution, "override grid.resolution");
    sub->add_option("--div-mode", f.div_mode, "divergence mode")
        ->check(CLI::IsMember({"exact", "hutchinson"}));
    sub->add_option("--posterior-mode", f.posterior_mode, "posterior form for sgld")
        ->check(CLI::IsMember({"exact-reparam", "paper-eq17"}));
    subs.push_back(sub);
  }
  app.get_subcommand("train-prior")->add_option("--epochs", f.epochs, "override cfm.epochs");
  app.get_subcommand("train-prior")
      ->add_flag("--zero-init", f.zero_init,
                 "with --epochs 0: write an all-zero (identity-flow) model");
  app.get_subcommand("sample-prior")->add_option("--count", f.count, "number of draws");
  app.get_subcommand("loglik")->add_option("--limit", f.limit, "max samples scored (0 = all)");
  app.get_subcommand("loglik")->add_option("--data", f.data_path, "input sample container");
  app.get_subcommand("loglik")
      ->add_flag("--print-ref-logpdf", f.print_ref_logpdf,
                 "append the reference-GP log density column");

  CLI11_PARSE(app, argc, argv);
  std::string cmd;
  for (auto* sub : subs)
    if (sub->parsed()) cmd = sub->get_name();

  try {
    return dispatch(cmd, f);
  } catch (const ConfigError& e) {
    std::cerr << "ofm: error [E_CONFIG] " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    std::cerr << "ofm: error [E_INVALID] " << e.what() << "\n";
  } catch (const std::out_of_range& e) {
    std::cerr << "ofm: error [E_INVALID] " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "ofm: error [E_RUNTIME] " << e.what() << "\n";
  }
  return 1;
}
