#include "fcls/initializers.hpp"
#include "fcls/io.hpp"
#include "fcls/lla.hpp"
#include "fcls/loss.hpp"
#include "fcls/multiarray.hpp"
#include "fcls/penalty.hpp"
#include "fcls/rng.hpp"
#include "fcls/scenario_json.hpp"
#include "fcls/simbench.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace fcls;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitSolver = 2;
constexpr int kExitCheck = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitConfig {
  std::string model = "shrinkage";
  std::string bok_path, samples_path, x_path, y_path;
  Index d = 0;
  std::string penalty = "scad";
  double a = 2.1;
  std::string tau = "auto";
  std::string init = "raw";
  double gamma = -1;
  int cv_folds = 10;
  std::uint64_t seed = 0;
  int steps = 2;
  double ridge = 0.0;
  std::string out = ".";
};

PenaltyKind parse_penalty_flag(const std::string& s) {
  if (s == "scad") return PenaltyKind::SCAD;
  if (s == "mcp") return PenaltyKind::MCP;
  if (s == "lasso") return PenaltyKind::LASSO;
  throw InputError("unknown penalty: " + s);
}

struct LoadedModel {
  std::shared_ptr<LossModel> model;
  Eigen::MatrixXd samples;  // shrinkage families only, may be empty
  bool regression = false;
  bool logistic = false;
};

LoadedModel load_model(const FitConfig& cfg) {
  LoadedModel lm;
  if (cfg.model == "shrinkage") {
    if (!cfg.samples_path.empty()) {
      lm.samples = read_matrix_csv(cfg.samples_path);
      Index D = lm.samples.cols();
      Index d = Index((1 + std::sqrt(1.0 + 8.0 * double(D))) / 2 + 0.5);
      if (num_edges(d) != D)
        throw InputError("--samples column count is not of the form d(d-1)/2");
      Eigen::VectorXd b_ok = lm.samples.colwise().mean();
      lm.model = std::make_shared<ShrinkageModel>(EdgeVectord(d, b_ok));
    } else if (!cfg.bok_path.empty()) {
      lm.model = std::make_shared<ShrinkageModel>(read_edge_vector(cfg.bok_path));
    } else {
      throw InputError("shrinkage model needs --bok or --samples");
    }
  } else if (cfg.model == "linear" || cfg.model == "logistic") {
    if (cfg.x_path.empty()) throw InputError(cfg.model + " model needs --x");
    if (cfg.y_path.empty()) throw InputError(cfg.model + " model needs --y");
    if (cfg.d < 2) throw InputError(cfg.model + " model needs --d >= 2");
    Eigen::MatrixXd X = read_matrix_csv(cfg.x_path);
    Eigen::VectorXd y = read_vector_csv(cfg.y_path);
    lm.regression = true;
    if (cfg.model == "linear") {
      lm.model = std::make_shared<LinearModel>(X, y, cfg.d);
    } else {
      lm.logistic = true;
      lm.model = std::make_shared<LogisticModel>(X, y, cfg.d, cfg.ridge);
    }
  } else {
    throw InputError("unknown model: " + cfg.model);
  }
  return lm;
}

Eigen::VectorXd resolve_cli_init(const FitConfig& cfg, const LoadedModel& lm,
                                 double* gamma_out) {
  const Index D = lm.model->dim();
  *gamma_out = 0;
  if (cfg.init == "zero") return Eigen::VectorXd::Zero(D);
  if (cfg.init == "raw") {
    if (lm.regression) throw InputError("--init raw needs a shrinkage model");
    return static_cast<const ShrinkageModel&>(*lm.model).b_ok().values;
  }
  if (cfg.init == "hard" || cfg.init == "soft") {
    if (lm.regression) throw InputError("--init hard/soft needs a shrinkage model");
    if (cfg.gamma < 0) throw InputError("--init hard/soft needs --gamma >= 0");
    ThresholdKind tk = cfg.init == "hard" ? ThresholdKind::Hard : ThresholdKind::Soft;
    *gamma_out = cfg.gamma;
    return generalized_threshold(static_cast<const ShrinkageModel&>(*lm.model).b_ok().values,
                                 cfg.gamma, tk);
  }
  if (cfg.init == "hard-cv" || cfg.init == "soft-cv") {
    if (lm.samples.rows() == 0)
      throw InputError("--init hard-cv/soft-cv needs per-sample data (--samples)");
    ThresholdKind tk = cfg.init == "hard-cv" ? ThresholdKind::Hard : ThresholdKind::Soft;
    double max_abs = lm.samples.colwise().mean().cwiseAbs().maxCoeff();
    CvSelection sel = cv_select_threshold(lm.samples, tk, cfg.cv_folds,
                                          default_threshold_grid(max_abs), cfg.seed);
    *gamma_out = sel.gamma_star;
    return sel.init;
  }
  if (cfg.init == "lasso-cv") {
    if (!lm.regression) throw InputError("--init lasso-cv needs a linear or logistic model");
    const Eigen::MatrixXd& X = lm.logistic
                                   ? static_cast<const LogisticModel&>(*lm.model).X()
                                   : static_cast<const LinearModel&>(*lm.model).X();
    const Eigen::VectorXd& y = lm.logistic
                                   ? static_cast<const LogisticModel&>(*lm.model).y()
                                   : static_cast<const LinearModel&>(*lm.model).y();
    double kill = lm.model->killer_lasso_bound();
    CvSelection sel = cv_select_lasso(X, y, lm.model->nodes(), lm.logistic, cfg.ridge,
                                      cfg.cv_folds, tau_grid(std::max(kill, 1e-12), 20, 3.0),
                                      cfg.seed);
    *gamma_out = sel.gamma_star;
    return sel.init;
  }
  throw InputError("unknown init: " + cfg.init);
}

double resolve_tau(const FitConfig& cfg, const LoadedModel& lm, const PenaltySpec& probe,
                   const Eigen::VectorXd& init) {
  if (cfg.tau == "auto") return tau_max(*lm.model, probe, init);
  try {
    size_t pos = 0;
    double v = std::stod(cfg.tau, &pos);
    if (pos != cfg.tau.size() || v <= 0) throw std::invalid_argument("bad tau");
    return v;
  } catch (const std::exception&) {
    throw InputError("--tau must be a positive number or 'auto'");
  }
}

int cmd_fit(const FitConfig& cfg) {
  LoadedModel lm = load_model(cfg);
  double gamma = 0;
  Eigen::VectorXd init = resolve_cli_init(cfg, lm, &gamma);
  PenaltyKind pk = parse_penalty_flag(cfg.penalty);
  PenaltySpec probe = make_penalty(pk, 1.0, cfg.a);
  double tau = pk == PenaltyKind::LASSO && cfg.tau != "auto"
                   ? std::stod(cfg.tau)
                   : resolve_tau(cfg, lm, probe, init);
  PenaltySpec spec = make_penalty(pk, tau, cfg.a);

  LlaMode mode = cfg.steps == 2 ? LlaMode::TwoStep : LlaMode::ToConvergence;
  int max_steps = cfg.steps == 2 ? 100 : std::max(cfg.steps, 1);
  LlaTrace trace = lla_run(*lm.model, spec, init, max_steps, 1e-8, mode);

  fs::create_directories(cfg.out);
  write_edge_vector((fs::path(cfg.out) / "beta.csv").string(),
                    lm.model->as_edge_vector(trace.final_iterate()));

  json j;
  j["penalty"] = cfg.penalty;
  j["a"] = cfg.a;
  j["tau"] = tau;
  j["tau_source"] = cfg.tau == "auto" ? "auto" : "fixed";
  j["init"] = cfg.init;
  j["init_gamma"] = gamma;
  j["steps_taken"] = trace.steps_taken;
  j["converged"] = trace.converged;
  j["loss_final"] = lm.model->value(trace.final_iterate());
  j["penalty_final"] = fcls_value(spec, lm.model->as_edge_vector(trace.final_iterate()));
  ComponentLabeling cc = connected_components(lm.model->as_edge_vector(trace.final_iterate()));
  j["components"] = cc.K;
  std::ofstream out(fs::path(cfg.out) / "trace.json");
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_path(const FitConfig& cfg, int points, double decades) {
  if (points < 2) throw InputError("--points must be >= 2");
  LoadedModel lm = load_model(cfg);
  double gamma = 0;
  Eigen::VectorXd init = resolve_cli_init(cfg, lm, &gamma);
  PenaltyKind pk = parse_penalty_flag(cfg.penalty);
  PenaltySpec probe = make_penalty(pk, 1.0, cfg.a);
  double top = cfg.tau == "auto" ? tau_max(*lm.model, probe, init)
                                 : resolve_tau(cfg, lm, probe, init);
  std::vector<double> grid = tau_grid(std::max(top, 1e-12), points, decades);

  fs::create_directories(cfg.out);
  std::ofstream out(fs::path(cfg.out) / "path.csv");
  if (!out) throw InputError("cannot open path.csv for writing");
  out << "tau,steps,converged,components";
  for (Index l = 0; l < lm.model->dim(); ++l) out << ",b" << l;
  out << "\n";
  for (double tau : grid) {
    PenaltySpec spec = make_penalty(pk, tau, cfg.a);
    LlaMode mode = cfg.steps == 2 ? LlaMode::TwoStep : LlaMode::ToConvergence;
    int max_steps = cfg.steps == 2 ? 100 : std::max(cfg.steps, 1);
    LlaTrace trace = lla_run(*lm.model, spec, init, max_steps, 1e-8, mode);
    const Eigen::VectorXd& beta = trace.final_iterate();
    ComponentLabeling cc = connected_components(lm.model->as_edge_vector(beta));
    out << format_double(tau) << "," << trace.steps_taken << "," << (trace.converged ? 1 : 0)
        << "," << cc.K;
    for (Index l = 0; l < beta.size(); ++l) out << "," << format_double(beta(l));
    out << "\n";
  }
  return kExitOk;
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("FCLS_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  int hw = int(std::thread::hardware_concurrency());
  return hw > 0 ? hw : 1;
}

int cmd_simulate(const std::string& preset, const std::string& scenario_path, int reps,
                 const std::string& out_dir, int threads) {
  SimScenario sc;
  if (!preset.empty()) {
    sc = make_preset(preset);
  } else if (!scenario_path.empty()) {
    std::ifstream in(scenario_path);
    if (!in) throw InputError("cannot open scenario file: " + scenario_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw InputError("scenario JSON parse error: " + std::string(e.what()));
    }
    sc = scenario_from_json(j);
  } else {
    throw InputError("simulate needs --preset or --scenario");
  }
  if (reps != -1) sc.reps = reps;
  if (sc.reps < 1) throw InputError("--reps must be >= 1");

  MonteCarloOptions opts;
  opts.threads = resolve_threads(threads);
  std::vector<ResultRow> rows = monte_carlo(sc, opts);
  std::vector<SummaryRow> sum = summarize(sc, rows);

  fs::create_directories(out_dir);
  write_results_csv((fs::path(out_dir) / "results.csv").string(), rows);
  write_summary_csv((fs::path(out_dir) / "summary.csv").string(), sum);
  write_summary_svg((fs::path(out_dir) / "summary.svg").string(), sc, sum);

  int failures = 0;
  for (const ResultRow& r : rows)
    if (r.failed) ++failures;
  std::cout << "scenario " << sc.id << ": " << rows.size() << " cells, " << failures
            << " failed\n";
  return failures == 0 ? kExitOk : kExitSolver;
}

struct CheckResult {
  std::string name;
  double observed;
  double tolerance;
  bool pass;
};

std::vector<CheckResult> run_checks(const std::vector<std::string>& only, bool inject_failure) {
  std::vector<CheckResult> results;
  auto wanted = [&](const std::string& name) {
    if (only.empty()) return true;
    for (const std::string& o : only)
      if (o == name) return true;
    return false;
  };
  auto record = [&](const std::string& name, double observed, double tol) {
    results.push_back({name, observed, tol, observed <= tol});
  };

  if (wanted("majorization")) {
    Rng rng(1001);
    double worst = -1e300;
    for (int t = 0; t < 200; ++t) {
      Index d = 2 + Index(rng.uniform_int(7));
      EdgeVectord x = EdgeVectord::Zero(d), b = EdgeVectord::Zero(d);
      for (Index l = 0; l < x.size(); ++l) {
        x.values(l) = rng.normal();
        b.values(l) = rng.normal();
      }
      PenaltySpec spec = make_penalty(PenaltyKind::SCAD, 0.8, t % 2 ? 2.1 : 3.7);
      Eigen::VectorXd m = surrogate_weights(b, spec);
      double surrogate = 0.5 * m.dot((x.values.cwiseAbs() - b.values.cwiseAbs())) +
                         fcls_value(spec, b);
      double gap = fcls_value(spec, x) - surrogate;
      if (inject_failure) gap = -gap;  // test-only hook for the exit-code contract
      worst = std::max(worst, gap);
    }
    record("majorization", worst, 1e-8);
  }

  if (wanted("spectral-cc")) {
    Rng rng(1002);
    int mismatches = 0;
    for (int t = 0; t < 200; ++t) {
      Index d = 2 + Index(rng.uniform_int(29));
      EdgeVectord b = EdgeVectord::Zero(d);
      for (Index l = 0; l < b.size(); ++l)
        if (rng.uniform() < 0.1) b.values(l) = std::abs(rng.normal());
      SpectralSummary sp = spectral_summary(b);
      double scale = std::max(1.0, sp.eigenvalues(d - 1));
      int zeros = 0;
      for (Index i = 0; i < d; ++i)
        if (sp.eigenvalues(i) < 1e-8 * scale) ++zeros;
      if (zeros != connected_components(b, 0.0).K) ++mismatches;
    }
    record("spectral-cc", mismatches, 0);
  }

  if (wanted("kkt")) {
    Rng rng(1003);
    double worst = 0;
    for (int t = 0; t < 25; ++t) {
      Index d = 4, D = num_edges(d), n = 50;
      Eigen::MatrixXd X(n, D);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < D; ++j) X(i, j) = rng.normal();
      Eigen::VectorXd y(n);
      for (Index i = 0; i < n; ++i) y(i) = rng.normal();
      LinearModel m(X, y, d);
      Eigen::VectorXd w = Eigen::VectorXd::Constant(D, 0.2);
      worst = std::max(worst, kkt_residual(m, w, m.weighted_lasso(w)));
    }
    record("kkt", worst, 1e-8);
  }

  if (wanted("laplacian-bounds")) {
    Rng rng(1004);
    double worst = -1e300;
    for (int t = 0; t < 500; ++t) {
      Index d = 2 + Index(rng.uniform_int(11));
      EdgeVectord r = EdgeVectord::Zero(d);
      for (Index l = 0; l < r.size(); ++l)
        if (rng.uniform() < 0.8) r.values(l) = rng.normal();
      LaplacianNorms nm = laplacian_norms(r);
      double l1 = r.values.cwiseAbs().sum();
      double l2 = r.values.norm();
      double lmax = r.values.cwiseAbs().maxCoeff();
      worst = std::max(worst, nm.lap_entry_l1 - 4 * l1);
      worst = std::max(worst, nm.lap_frob - std::sqrt(2.0 * d) * l2);
      worst = std::max(worst, nm.lap_frob - std::sqrt(double(d * d * d + d * d - d)) * lmax);
      worst = std::max(worst, nm.lap_op - 2 * nm.adj_op_one);
      worst = std::max(worst, nm.lap_op - (nm.max_row_sum + nm.adj_op));
      worst = std::max(worst, nm.max_row_sum - nm.lap_op);
    }
    record("laplacian-bounds", worst, 1e-10);
  }

  if (wanted("hypergraph")) {
    Rng rng(1005);
    int mismatches = 0;
    for (int t = 0; t < 100; ++t) {
      std::vector<Index> dims = {1 + Index(rng.uniform_int(3)), 1 + Index(rng.uniform_int(3)),
                                 1 + Index(rng.uniform_int(3))};
      Index p = dims[0] * dims[1] * dims[2];
      Eigen::VectorXd vals(p);
      for (Index f = 0; f < p; ++f) vals(f) = rng.uniform() < 0.6 ? 0.0 : rng.normal();
      MultiArrayParam a(dims, vals);
      // reference count: components of the pairwise graph must match a direct
      // union-find over hyperedges
      ComponentLabeling fast = multiarray_blocks(a, 0.0);
      std::vector<Index> parent(size_t(a.vertex_count()));
      std::iota(parent.begin(), parent.end(), Index{0});
      std::function<Index(Index)> find = [&](Index v) {
        while (parent[size_t(v)] != v) v = parent[size_t(v)] = parent[size_t(parent[size_t(v)])];
        return v;
      };
      for (Index f = 0; f < p; ++f) {
        if (vals(f) == 0.0) continue;
        std::vector<Index> idx = a.multi_index(f);
        Index r0 = find(a.vertex(0, idx[0]));
        for (Index v = 1; v < 3; ++v) parent[size_t(find(a.vertex(v, idx[v])))] = r0;
      }
      std::set<Index> roots;
      for (Index v = 0; v < a.vertex_count(); ++v) roots.insert(find(v));
      if (fast.K != int(roots.size())) ++mismatches;
    }
    record("hypergraph", mismatches, 0);
  }

  return results;
}

int cmd_check(const std::vector<std::string>& only, const std::string& out_dir,
              bool inject_failure) {
  std::vector<CheckResult> results = run_checks(only, inject_failure);
  if (results.empty()) throw InputError("--only matched no known check");
  bool all_pass = true;
  json report = json::array();
  for (const CheckResult& r : results) {
    std::cout << (r.pass ? "pass" : "FAIL") << "  " << r.name << "  observed="
              << format_double(r.observed) << "  tolerance=" << format_double(r.tolerance)
              << "\n";
    report.push_back({{"name", r.name},
                      {"observed", r.observed},
                      {"tolerance", r.tolerance},
                      {"pass", r.pass}});
    all_pass = all_pass && r.pass;
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "check.json");
    out << report.dump(2) << "\n";
  }
  return all_pass ? kExitOk : kExitCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"folded concave Laplacian spectral estimation toolkit"};
  app.require_subcommand(1);

  FitConfig cfg;
  int path_points = 20;
  double path_decades = 3.0;

  auto add_model_flags = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model, "shrinkage | linear | logistic");
    sub->add_option("--bok", cfg.bok_path, "edge-vector file with the raw estimate");
    sub->add_option("--samples", cfg.samples_path, "CSV of per-sample edge observations");
    sub->add_option("--x", cfg.x_path, "design matrix CSV");
    sub->add_option("--y", cfg.y_path, "response CSV");
    sub->add_option("--d", cfg.d, "node count for regression models");
    sub->add_option("--penalty", cfg.penalty, "scad | mcp | lasso");
    sub->add_option("--a", cfg.a, "penalty shape parameter");
    sub->add_option("--tau", cfg.tau, "tuning parameter or 'auto'");
    sub->add_option("--init", cfg.init, "zero | raw | hard | soft | hard-cv | soft-cv | lasso-cv");
    sub->add_option("--gamma", cfg.gamma, "fixed threshold for --init hard/soft");
    sub->add_option("--cv-folds", cfg.cv_folds, "folds for CV initializers");
    sub->add_option("--seed", cfg.seed, "seed for CV fold splits");
    sub->add_option("--steps", cfg.steps, "2 = two-step; otherwise iterate to convergence");
    sub->add_option("--ridge", cfg.ridge, "ridge term for logistic models");
    sub->add_option("--out", cfg.out, "output directory");
  };

  CLI::App* fit = app.add_subcommand("fit", "fit one model at one tuning value");
  add_model_flags(fit);

  CLI::App* path = app.add_subcommand("path", "fit along a descending tuning grid");
  add_model_flags(path);
  path->add_option("--points", path_points, "grid points");
  path->add_option("--decades", path_decades, "decades below the largest tuning value");

  std::string preset, scenario_path, sim_out = ".";
  int reps = -1, threads = 0;
  CLI::App* sim = app.add_subcommand("simulate", "run a Monte-Carlo benchmark scenario");
  sim->add_option("--preset", preset, "built-in scenario, e.g. gaussian_seq_5, linear_25");
  sim->add_option("--scenario", scenario_path, "scenario JSON file");
  sim->add_option("--reps", reps, "override repetition count");
  sim->add_option("--out", sim_out, "output directory");
  sim->add_option("--threads", threads, "worker threads (default: FCLS_THREADS or hardware)");

  std::vector<std::string> only;
  std::string check_out;
  bool inject_failure = false;
  CLI::App* check = app.add_subcommand("check", "run the built-in diagnostic suite");
  check->add_option("--only", only, "run only the named checks");
  check->add_option("--out", check_out, "also write check.json here");
  check->add_flag("--inject-failure", inject_failure)->group("");  // test-only hook

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return cmd_fit(cfg);
    if (path->parsed()) return cmd_path(cfg, path_points, path_decades);
    if (sim->parsed()) return cmd_simulate(preset, scenario_path, reps, sim_out, threads);
    if (check->parsed()) return cmd_check(only, check_out, inject_failure);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
