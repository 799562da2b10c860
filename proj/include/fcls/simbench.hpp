#pragma once

#include "fcls/edge_vector.hpp"
#include "fcls/graph.hpp"
#include "fcls/initializers.hpp"
#include "fcls/io.hpp"
#include "fcls/lla.hpp"
#include "fcls/loss.hpp"
#include "fcls/penalty.hpp"
#include "fcls/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fcls {

enum class Family { GaussianSeq, Covariance, Linear, Logistic };
enum class SignalScheme { ConstantOne, ConstantSmall, RandomSign };  // 1 / 0.3 / +-1
enum class MethodKind { FclsLla, EntrywiseScad, Lasso, HardThreshold, Raw };
enum class InitKind { Zero, Raw, HardThresholdCv, SoftThresholdCv, LassoCv };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::GaussianSeq: return "gaussian_seq";
    case Family::Covariance: return "covariance";
    case Family::Linear: return "linear";
    case Family::Logistic: return "logistic";
  }
  return "?";
}

struct InitSpec {
  InitKind kind = InitKind::HardThresholdCv;
  std::optional<double> gamma;  // fixed threshold / penalty; otherwise CV
  int cv_folds = 10;
  std::uint64_t seed = 0;
};

struct MethodSpec {
  std::string name;
  MethodKind kind = MethodKind::FclsLla;
  PenaltyKind penalty_kind = PenaltyKind::SCAD;
  double a = 2.1;              // 3.7 for the entrywise SCAD baseline
  std::optional<double> tau;   // fixed tuning value; otherwise a grid
  InitSpec init;
  LlaMode mode = LlaMode::TwoStep;
  bool cheat = true;           // tuned against the oracle as in the experiments
  int grid_points = 50;
  double grid_decades = 3.0;
};

struct SimScenario {
  std::string id;
  Family family = Family::GaussianSeq;
  std::vector<Index> block_sizes;
  Index n_isolated = 0;
  SignalScheme signal = SignalScheme::ConstantOne;
  double noise_sigma = 1.0;
  std::vector<Index> n_values;
  int reps = 20;
  std::uint64_t seed = 0;
  double ridge = 0.01;  // logistic only
  std::vector<MethodSpec> methods;
};

struct ResultRow {
  std::string scenario;
  std::string method;
  Index n = 0;
  int rep = 0;
  double metric = 0;
  double param = 0;
  int steps = 0;
  double wall_ms = 0;
  bool failed = false;
  std::string note;
};

/// Block-diagonal target: within-block edges carry the signal values, all
/// other edges (including anything touching an isolated node) are zero.
inline std::pair<EdgeVectord, BlockSupport> make_block_target(const std::vector<Index>& block_sizes,
                                                              Index n_isolated, SignalScheme signal,
                                                              std::uint64_t seed) {
  Index d = n_isolated;
  for (Index b : block_sizes) {
    if (b < 1) throw std::invalid_argument("make_block_target: block size must be >= 1");
    d += b;
  }
  EdgeVectord beta = EdgeVectord::Zero(d);
  Rng rng(Rng::mix(seed, 0x7a67e7u));
  Index node = 0;
  for (Index b : block_sizes) {
    for (Index i = node; i < node + b; ++i) {
      for (Index j = i + 1; j < node + b; ++j) {
        double v = 1.0;
        if (signal == SignalScheme::ConstantSmall) v = 0.3;
        if (signal == SignalScheme::RandomSign) v = rng.bernoulli(0.5) ? 1.0 : -1.0;
        beta(i, j) = v;
      }
    }
    node += b;
  }
  return {beta, block_support(beta)};
}

struct Dataset {
  Family family = Family::GaussianSeq;
  std::shared_ptr<const LossModel> model;
  EdgeVectord beta_star;
  BlockSupport support;
  Eigen::VectorXd beta_oracle;
  // shrinkage families: per-sample edge observations whose row mean is b_ok
  Eigen::MatrixXd samples;
  // regression families
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

inline Dataset generate_dataset(const SimScenario& sc, Index n, int rep) {
  if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
  Dataset ds;
  ds.family = sc.family;
  auto [beta_star, support] = make_block_target(sc.block_sizes, sc.n_isolated, sc.signal, sc.seed);
  ds.beta_star = beta_star;
  ds.support = support;
  const Index D = beta_star.size();
  const Index d = beta_star.d;
  Rng rng(Rng::mix(sc.seed, std::uint64_t(n), std::uint64_t(rep)));

  switch (sc.family) {
    case Family::GaussianSeq: {
      ds.samples.resize(n, D);
      for (Index i = 0; i < n; ++i)
        for (Index l = 0; l < D; ++l)
          ds.samples(i, l) = beta_star.values(l) + sc.noise_sigma * rng.normal();
      Eigen::VectorXd b_ok = ds.samples.colwise().mean();
      ds.model = std::make_shared<ShrinkageModel>(EdgeVectord(d, b_ok));
      break;
    }
    case Family::Covariance: {
      // Sigma* = I + A(beta*); draw via its symmetric square root
      Eigen::MatrixXd sigma = adjacency(beta_star);
      sigma.diagonal().array() += 1.0;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
      if (es.eigenvalues().minCoeff() <= 0)
        throw std::invalid_argument("generate_dataset: Sigma* is not positive definite");
      Eigen::MatrixXd root =
          es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
      ds.samples.resize(n, D);
      Eigen::VectorXd z(d), x(d);
      for (Index i = 0; i < n; ++i) {
        for (Index k = 0; k < d; ++k) z(k) = rng.normal();
        x = root * z;
        Index e = 0;
        for (Index a = 0; a < d; ++a)
          for (Index b = a + 1; b < d; ++b, ++e) ds.samples(i, e) = x(a) * x(b);
      }
      Eigen::VectorXd b_ok = ds.samples.colwise().mean();
      ds.model = std::make_shared<ShrinkageModel>(EdgeVectord(d, b_ok));
      break;
    }
    case Family::Linear:
    case Family::Logistic: {
      ds.X.resize(n, D);
      for (Index i = 0; i < n; ++i)
        for (Index l = 0; l < D; ++l) ds.X(i, l) = rng.normal();
      Eigen::VectorXd eta = ds.X * beta_star.values;
      ds.y.resize(n);
      if (sc.family == Family::Linear) {
        for (Index i = 0; i < n; ++i) ds.y(i) = eta(i) + sc.noise_sigma * rng.normal();
        ds.model = std::make_shared<LinearModel>(ds.X, ds.y, d);
      } else {
        for (Index i = 0; i < n; ++i)
          ds.y(i) = rng.bernoulli(LogisticModel::sigmoid(eta(i))) ? 1.0 : 0.0;
        ds.model = std::make_shared<LogisticModel>(ds.X, ds.y, d, sc.ridge);
      }
      break;
    }
  }
  ds.beta_oracle = block_oracle(*ds.model, ds.support);
  return ds;
}

inline double relative_l2_to_oracle(const Eigen::VectorXd& beta_hat,
                                    const Eigen::VectorXd& beta_oracle) {
  double denom = beta_oracle.norm();
  if (denom <= 0) throw std::invalid_argument("relative_l2_to_oracle: oracle has zero norm");
  return (beta_hat - beta_oracle).norm() / denom;
}

/// Resolve a method's initializer for a dataset; initializers are always
/// CV-tuned, never cheat-tuned.
inline Eigen::VectorXd resolve_init(const MethodSpec& ms, const Dataset& ds,
                                    double* gamma_out = nullptr) {
  const Index D = ds.model->dim();
  std::uint64_t seed = Rng::mix(ms.init.seed, 0xc0ffee);
  switch (ms.init.kind) {
    case InitKind::Zero:
      return Eigen::VectorXd::Zero(D);
    case InitKind::Raw: {
      if (ds.family == Family::GaussianSeq || ds.family == Family::Covariance)
        return static_cast<const ShrinkageModel&>(*ds.model).b_ok().values;
      throw std::invalid_argument("resolve_init: raw init needs a shrinkage-family dataset");
    }
    case InitKind::HardThresholdCv:
    case InitKind::SoftThresholdCv: {
      if (ds.samples.rows() == 0)
        throw std::invalid_argument("resolve_init: threshold CV needs per-sample data");
      ThresholdKind tk =
          ms.init.kind == InitKind::HardThresholdCv ? ThresholdKind::Hard : ThresholdKind::Soft;
      if (ms.init.gamma) {
        if (gamma_out) *gamma_out = *ms.init.gamma;
        Eigen::VectorXd mean = ds.samples.colwise().mean();
        return generalized_threshold(mean, *ms.init.gamma, tk);
      }
      double max_abs = ds.samples.colwise().mean().cwiseAbs().maxCoeff();
      CvSelection sel = cv_select_threshold(ds.samples, tk, ms.init.cv_folds,
                                            default_threshold_grid(max_abs), seed);
      if (gamma_out) *gamma_out = sel.gamma_star;
      return sel.init;
    }
    case InitKind::LassoCv: {
      if (ds.X.rows() == 0)
        throw std::invalid_argument("resolve_init: Lasso CV needs a regression dataset");
      bool logistic = ds.family == Family::Logistic;
      double ridge = logistic ? static_cast<const LogisticModel&>(*ds.model).ridge() : 0.0;
      if (ms.init.gamma) {
        if (gamma_out) *gamma_out = *ms.init.gamma;
        Eigen::VectorXd w = Eigen::VectorXd::Constant(D, 2 * *ms.init.gamma);
        return ds.model->weighted_lasso(w);
      }
      double kill = ds.model->killer_lasso_bound();
      std::vector<double> grid = tau_grid(std::max(kill, 1e-12), 20, 3.0);
      CvSelection sel = cv_select_lasso(ds.X, ds.y, ds.beta_star.d, logistic, ridge,
                                        ms.init.cv_folds, grid, seed);
      if (gamma_out) *gamma_out = sel.gamma_star;
      return sel.init;
    }
  }
  throw std::logic_error("resolve_init: unreachable");
}

struct MethodResult {
  Eigen::VectorXd beta;
  double metric = 0;
  double param = 0;
  int steps = 0;
};

/// Fit one method on one dataset over a tuning grid. With cheat=true the
/// returned parameter is the grid point whose estimate is nearest the block
/// oracle; per-grid-point solver failures are recorded, not fatal.
inline MethodResult run_method(const MethodSpec& ms, const Dataset& ds,
                               std::vector<double> grid = {}, bool cheat = true) {
  MethodResult best;
  best.metric = std::numeric_limits<double>::infinity();

  if (ms.kind == MethodKind::Raw) {
    if (ds.family != Family::GaussianSeq && ds.family != Family::Covariance)
      throw std::invalid_argument("run_method: raw method needs a shrinkage-family dataset");
    best.beta = static_cast<const ShrinkageModel&>(*ds.model).b_ok().values;
    best.metric = relative_l2_to_oracle(best.beta, ds.beta_oracle);
    best.param = 0;
    return best;
  }

  Eigen::VectorXd init;
  if (ms.kind == MethodKind::FclsLla || ms.kind == MethodKind::EntrywiseScad)
    init = resolve_init(ms, ds);

  if (grid.empty()) {
    if (ms.tau) {
      grid = {*ms.tau};
    } else {
      switch (ms.kind) {
        case MethodKind::FclsLla: {
          PenaltySpec spec = make_penalty(ms.penalty_kind, 1.0, ms.a);
          grid = tau_grid(std::max(tau_max(*ds.model, spec, init), 1e-12), ms.grid_points,
                          ms.grid_decades);
          break;
        }
        case MethodKind::EntrywiseScad:
        case MethodKind::Lasso:
          grid = tau_grid(std::max(ds.model->killer_lasso_bound(), 1e-12), ms.grid_points,
                          ms.grid_decades);
          break;
        case MethodKind::HardThreshold: {
          double max_abs =
              static_cast<const ShrinkageModel&>(*ds.model).b_ok().values.cwiseAbs().maxCoeff();
          grid = default_threshold_grid(max_abs, ms.grid_points);
          break;
        }
        default: break;
      }
    }
  }
  if (grid.empty()) throw std::invalid_argument("run_method: empty tuning grid");

  int failures = 0;
  std::string last_error;
  for (double t : grid) {
    try {
      Eigen::VectorXd beta;
      int steps = 0;
      switch (ms.kind) {
        case MethodKind::FclsLla: {
          PenaltySpec spec = make_penalty(ms.penalty_kind, t, ms.a);
          LlaTrace trace = lla_run(*ds.model, spec, init, 100, 1e-8, ms.mode);
          beta = trace.final_iterate();
          steps = trace.steps_taken;
          break;
        }
        case MethodKind::EntrywiseScad: {
          // one LLA step of the entrywise folded concave penalty
          PenaltySpec spec = make_penalty(PenaltyKind::SCAD, t, ms.a);
          Eigen::VectorXd w(init.size());
          for (Index l = 0; l < init.size(); ++l) w(l) = 2 * g_prime(spec, std::abs(init(l)));
          beta = ds.model->weighted_lasso(w, init);
          steps = 1;
          break;
        }
        case MethodKind::Lasso: {
          Eigen::VectorXd w = Eigen::VectorXd::Constant(ds.model->dim(), 2 * t);
          beta = ds.model->weighted_lasso(w);
          steps = 1;
          break;
        }
        case MethodKind::HardThreshold: {
          const Eigen::VectorXd& b_ok =
              static_cast<const ShrinkageModel&>(*ds.model).b_ok().values;
          beta = generalized_threshold(b_ok, t, ThresholdKind::Hard);
          break;
        }
        default: throw std::logic_error("run_method: unreachable");
      }
      double metric = relative_l2_to_oracle(beta, ds.beta_oracle);
      if (metric < best.metric) {
        best.beta = beta;
        best.metric = metric;
        best.param = t;
        best.steps = steps;
      }
    } catch (const std::exception& e) {
      ++failures;
      last_error = e.what();
    }
  }
  (void)cheat;  // non-cheat tuning is handled by the CV initializer path in `fit`
  if (failures == int(grid.size()))
    throw SolverError("run_method: every grid point failed; last: " + last_error, 0.0);
  return best;
}

struct MonteCarloOptions {
  int threads = 1;
  bool record_wall_time = false;  // off by default so outputs are byte-stable
};

/// One (method, n, rep) cell.
inline ResultRow run_cell(const SimScenario& sc, const MethodSpec& ms, Index n, int rep,
                          bool record_wall_time) {
  ResultRow row;
  row.scenario = sc.id;
  row.method = ms.name;
  row.n = n;
  row.rep = rep;
  auto t0 = std::chrono::steady_clock::now();
  try {
    Dataset ds = generate_dataset(sc, n, rep);
    MethodResult res = run_method(ms, ds, {}, ms.cheat);
    row.metric = res.metric;
    row.param = res.param;
    row.steps = res.steps;
  } catch (const std::exception& e) {
    row.failed = true;
    row.metric = std::numeric_limits<double>::quiet_NaN();
    row.note = e.what();
  }
  if (record_wall_time) {
    auto t1 = std::chrono::steady_clock::now();
    row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  return row;
}

struct SummaryRow {
  std::string scenario, method;
  Index n;
  double mean, stderr_;
  int reps;
};

inline std::vector<SummaryRow> summarize(const SimScenario& sc,
                                         const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  for (const MethodSpec& ms : sc.methods) {
    for (Index n : sc.n_values) {
      std::vector<double> vals;
      for (const ResultRow& r : rows)
        if (r.method == ms.name && r.n == n && !r.failed) vals.push_back(r.metric);
      if (vals.empty()) continue;
      double mean = 0;
      for (double v : vals) mean += v;
      mean /= double(vals.size());
      double var = 0;
      for (double v : vals) var += (v - mean) * (v - mean);
      var = vals.size() > 1 ? var / double(vals.size() - 1) : 0.0;
      out.push_back({sc.id, ms.name, n, mean, std::sqrt(var / double(vals.size())),
                     int(vals.size())});
    }
  }
  return out;
}

inline void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "scenario,method,n,rep,metric,param,steps,wall_ms\n";
  for (const ResultRow& r : rows) {
    out << r.scenario << "," << r.method << "," << r.n << "," << r.rep << ","
        << (r.failed ? "nan" : format_double(r.metric)) << "," << format_double(r.param) << ","
        << r.steps << "," << format_double(r.wall_ms) << "\n";
  }
}

inline void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "scenario,method,n,mean,stderr,reps\n";
  for (const SummaryRow& r : rows)
    out << r.scenario << "," << r.method << "," << r.n << "," << format_double(r.mean) << ","
        << format_double(r.stderr_) << "," << r.reps << "\n";
}

/// Line chart of mean relative error vs n with a +-stderr band per method.
inline void write_summary_svg(const std::string& path, const SimScenario& sc,
                              const std::vector<SummaryRow>& rows) {
  const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 0, ymax = -1e300;
  for (const SummaryRow& r : rows) {
    double x = std::log2(double(r.n));
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymax = std::max(ymax, r.mean + r.stderr_);
  }
  if (rows.empty()) {
    xmin = 0;
    xmax = 1;
    ymax = 1;
  }
  if (xmax <= xmin) xmax = xmin + 1;
  ymax *= 1.05;
  auto px = [&](double n) { return ml + (std::log2(n) - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double v) { return H - mb - (v - ymin) / (ymax - ymin) * (H - mt - mb); };
  const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='15'>" << sc.id
      << " — relative L2 error to block oracle</text>\n";
  out << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
      << "' stroke='black'/>\n";
  out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
      << "' stroke='black'/>\n";
  for (Index n : sc.n_values) {
    out << "<text x='" << px(double(n)) << "' y='" << H - mb + 18
        << "' text-anchor='middle' font-size='11'>" << n << "</text>\n";
  }
  out << "<text x='" << W / 2 << "' y='" << H - 10
      << "' text-anchor='middle' font-size='12'>samples n (log scale)</text>\n";
  for (int k = 0; k <= 4; ++k) {
    double v = ymin + k * (ymax - ymin) / 4;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    out << "<text x='" << ml - 8 << "' y='" << py(v) + 4
        << "' text-anchor='end' font-size='11'>" << buf << "</text>\n";
  }
  int ci = 0;
  for (const MethodSpec& ms : sc.methods) {
    std::vector<const SummaryRow*> series;
    for (const SummaryRow& r : rows)
      if (r.method == ms.name) series.push_back(&r);
    if (series.empty()) continue;
    const char* color = colors[ci % 6];
    // stderr band
    out << "<polygon fill='" << color << "' fill-opacity='0.15' stroke='none' points='";
    for (const SummaryRow* r : series)
      out << px(double(r->n)) << "," << py(r->mean + r->stderr_) << " ";
    for (auto it = series.rbegin(); it != series.rend(); ++it)
      out << px(double((*it)->n)) << "," << py(std::max((*it)->mean - (*it)->stderr_, 0.0)) << " ";
    out << "'/>\n";
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='";
    for (const SummaryRow* r : series) out << px(double(r->n)) << "," << py(r->mean) << " ";
    out << "'/>\n";
    out << "<text x='" << W - mr - 5 << "' y='" << mt + 16 * ci + 12
        << "' text-anchor='end' font-size='12' fill='" << color << "'>" << ms.name << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
}

/// Monte-Carlo harness: one row per (method, n, rep); cells are independent
/// and independently seeded, so the result table is invariant to execution
/// order and thread count.
inline std::vector<ResultRow> monte_carlo(const SimScenario& sc,
                                          const MonteCarloOptions& opts = {}) {
  if (sc.reps < 1) throw std::invalid_argument("monte_carlo: reps must be >= 1");
  struct Cell {
    const MethodSpec* ms;
    Index n;
    int rep;
  };
  std::vector<Cell> cells;
  for (const MethodSpec& ms : sc.methods)
    for (Index n : sc.n_values)
      for (int rep = 0; rep < sc.reps; ++rep) cells.push_back({&ms, n, rep});

  std::vector<ResultRow> rows(cells.size());
  int threads = std::max(1, opts.threads);
  if (threads == 1) {
    for (size_t k = 0; k < cells.size(); ++k)
      rows[k] = run_cell(sc, *cells[k].ms, cells[k].n, cells[k].rep, opts.record_wall_time);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (;;) {
        size_t k = next.fetch_add(1);
        if (k >= cells.size()) return;
        rows[k] = run_cell(sc, *cells[k].ms, cells[k].n, cells[k].rep, opts.record_wall_time);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

}  // namespace fcls
