#include "fcls/scenario_json.hpp"
#include "fcls/simbench.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>

using namespace fcls;

namespace {

SimScenario small_gaussian_scenario() {
  SimScenario sc;
  sc.id = "unit";
  sc.family = Family::GaussianSeq;
  sc.block_sizes = {3, 3};
  sc.signal = SignalScheme::ConstantOne;
  sc.noise_sigma = 0.5;
  sc.n_values = {8, 32};
  sc.reps = 3;
  sc.seed = 777;

  MethodSpec fcls;
  fcls.name = "fcls";
  fcls.kind = MethodKind::FclsLla;
  fcls.init.kind = InitKind::Raw;
  fcls.grid_points = 10;
  sc.methods.push_back(fcls);

  MethodSpec raw;
  raw.name = "raw";
  raw.kind = MethodKind::Raw;
  sc.methods.push_back(raw);
  return sc;
}

}  // namespace

TEST_CASE("block target layout and edge counts") {
  // two 5-blocks on 10 nodes: 45 edges, 20 in-block signal edges
  auto [b5, s5] = make_block_target({5, 5}, 0, SignalScheme::ConstantOne, 1);
  CHECK(b5.size() == 45);
  CHECK((b5.values.array() != 0.0).count() == 20);
  CHECK(s5.count() == 20);

  auto [b10, s10] = make_block_target({10, 10}, 0, SignalScheme::ConstantSmall, 1);
  CHECK(b10.size() == 190);
  CHECK(s10.count() == 90);
  for (Index l = 0; l < b10.size(); ++l)
    if (b10.values(l) != 0.0) CHECK(b10.values(l) == 0.3);

  auto [b25, s25] = make_block_target({25, 25}, 0, SignalScheme::RandomSign, 1);
  CHECK(b25.size() == 1225);
  CHECK(s25.count() == 600);
  for (Index l = 0; l < b25.size(); ++l)
    if (b25.values(l) != 0.0) CHECK(std::abs(b25.values(l)) == 1.0);

  // isolated nodes enlarge the graph but carry no edges
  auto [biso, siso] = make_block_target({3}, 2, SignalScheme::ConstantOne, 1);
  CHECK(biso.d == 5);
  CHECK(siso.count() == 3);
  CHECK_THROWS_AS(make_block_target({0}, 0, SignalScheme::ConstantOne, 1),
                  std::invalid_argument);
}

TEST_CASE("random-sign targets are deterministic in the seed") {
  auto a = make_block_target({4, 4}, 0, SignalScheme::RandomSign, 9).first;
  auto b = make_block_target({4, 4}, 0, SignalScheme::RandomSign, 9).first;
  auto c = make_block_target({4, 4}, 0, SignalScheme::RandomSign, 10).first;
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
}

TEST_CASE("dataset generation is deterministic and per-rep independent") {
  SimScenario sc = small_gaussian_scenario();
  Dataset d1 = generate_dataset(sc, 8, 0);
  Dataset d2 = generate_dataset(sc, 8, 0);
  Dataset d3 = generate_dataset(sc, 8, 1);
  CHECK(d1.samples == d2.samples);
  CHECK(d1.samples != d3.samples);
  CHECK(d1.beta_oracle == d2.beta_oracle);
  // shrinkage oracle restricts the sample mean to the block support
  const Eigen::VectorXd& b_ok = static_cast<const ShrinkageModel&>(*d1.model).b_ok().values;
  for (Index l = 0; l < d1.beta_oracle.size(); ++l)
    CHECK(d1.beta_oracle(l) == (d1.support.membership[size_t(l)] ? b_ok(l) : 0.0));
}

TEST_CASE("covariance samples average to the empirical covariance structure") {
  SimScenario sc;
  sc.family = Family::Covariance;
  sc.block_sizes = {25, 25};
  sc.signal = SignalScheme::ConstantSmall;
  sc.seed = 5;
  // at block size 25 Sigma* = I + A must still be positive definite
  Dataset ds = generate_dataset(sc, 4, 0);
  CHECK(ds.samples.rows() == 4);
  CHECK(ds.samples.cols() == 1225);
  CHECK(ds.model->dim() == 1225);
}

TEST_CASE("linear and logistic datasets expose design and response") {
  for (Family fam : {Family::Linear, Family::Logistic}) {
    SimScenario sc;
    sc.family = fam;
    sc.block_sizes = {3, 3};
    sc.signal = SignalScheme::RandomSign;
    sc.seed = 31;
    Dataset ds = generate_dataset(sc, 40, 2);
    CHECK(ds.X.rows() == 40);
    CHECK(ds.X.cols() == 15);
    CHECK(ds.y.size() == 40);
    if (fam == Family::Logistic)
      for (Index i = 0; i < 40; ++i) CHECK((ds.y(i) == 0.0 || ds.y(i) == 1.0));
  }
}

TEST_CASE("relative error metric") {
  Eigen::VectorXd orc(2);
  orc << 3.0, 4.0;
  CHECK(relative_l2_to_oracle(orc, orc) == 0.0);
  CHECK(relative_l2_to_oracle(Eigen::VectorXd::Zero(2), orc) == doctest::Approx(1.0));
  CHECK(relative_l2_to_oracle(2 * orc, orc) == doctest::Approx(1.0));
  CHECK_THROWS_AS(relative_l2_to_oracle(orc, Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
}

TEST_CASE("cheat-tuned fcls never loses to the raw estimate") {
  SimScenario sc = small_gaussian_scenario();
  for (int rep = 0; rep < 3; ++rep) {
    Dataset ds = generate_dataset(sc, 32, rep);
    MethodResult fcls = run_method(sc.methods[0], ds);
    MethodResult raw = run_method(sc.methods[1], ds);
    // tau -> 0 recovers the raw estimate, so the tuned fit can only improve;
    // the grid only spans 3 decades, so allow a little slack
    CHECK(fcls.metric <= raw.metric + 1e-6);
    CHECK(fcls.param > 0.0);
    CHECK(fcls.steps == 2);
  }
}

TEST_CASE("entrywise baseline with a zero init reduces to a uniform-weight fit") {
  SimScenario sc = small_gaussian_scenario();
  Dataset ds = generate_dataset(sc, 32, 0);
  MethodSpec ms;
  ms.name = "scad";
  ms.kind = MethodKind::EntrywiseScad;
  ms.a = 3.7;
  ms.init.kind = InitKind::Zero;
  ms.tau = 0.4;
  MethodResult res = run_method(ms, ds);
  PenaltySpec spec = make_penalty(PenaltyKind::SCAD, 0.4, 3.7);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(ds.model->dim(), 2 * g_prime(spec, 0.0));
  Eigen::VectorXd expect = ds.model->weighted_lasso(w);
  CHECK((res.beta - expect).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("monte carlo emits one row per cell and is thread-count invariant") {
  SimScenario sc = small_gaussian_scenario();
  MonteCarloOptions serial;
  std::vector<ResultRow> rows = monte_carlo(sc, serial);
  REQUIRE(rows.size() == sc.methods.size() * sc.n_values.size() * size_t(sc.reps));
  for (const ResultRow& r : rows) {
    CHECK_FALSE(r.failed);
    CHECK(std::isfinite(r.metric));
    CHECK(r.wall_ms == 0.0);
  }

  MonteCarloOptions threaded;
  threaded.threads = 3;
  std::vector<ResultRow> rows3 = monte_carlo(sc, threaded);
  REQUIRE(rows3.size() == rows.size());
  for (size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows3[k].method == rows[k].method);
    CHECK(rows3[k].n == rows[k].n);
    CHECK(rows3[k].rep == rows[k].rep);
    CHECK(rows3[k].metric == rows[k].metric);
    CHECK(rows3[k].param == rows[k].param);
  }
}

TEST_CASE("summaries average per method and sample size") {
  SimScenario sc = small_gaussian_scenario();
  std::vector<ResultRow> rows = monte_carlo(sc);
  std::vector<SummaryRow> sum = summarize(sc, rows);
  REQUIRE(sum.size() == sc.methods.size() * sc.n_values.size());
  for (const SummaryRow& s : sum) {
    double mean = 0;
    int count = 0;
    for (const ResultRow& r : rows)
      if (r.method == s.method && r.n == s.n) {
        mean += r.metric;
        ++count;
      }
    mean /= count;
    CHECK(s.reps == count);
    CHECK(s.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(s.stderr_ >= 0.0);
  }
}

TEST_CASE("results csv schema and byte stability") {
  SimScenario sc = small_gaussian_scenario();
  sc.reps = 2;
  std::vector<ResultRow> rows = monte_carlo(sc);
  std::string p1 = "simbench_res1.csv", p2 = "simbench_res2.csv";
  write_results_csv(p1, rows);
  write_results_csv(p2, monte_carlo(sc));
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  std::string a = slurp(p1), b = slurp(p2);
  CHECK(a == b);
  CHECK(a.rfind("scenario,method,n,rep,metric,param,steps,wall_ms\n", 0) == 0);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("summary csv and svg writers produce well-formed output") {
  SimScenario sc = small_gaussian_scenario();
  sc.reps = 2;
  std::vector<SummaryRow> sum = summarize(sc, monte_carlo(sc));
  std::string pc = "simbench_sum.csv", ps = "simbench_sum.svg";
  write_summary_csv(pc, sum);
  write_summary_svg(ps, sc, sum);
  std::ifstream in(pc);
  std::string header;
  std::getline(in, header);
  CHECK(header == "scenario,method,n,mean,stderr,reps");
  std::ifstream svg(ps);
  std::string body((std::istreambuf_iterator<char>(svg)), std::istreambuf_iterator<char>());
  CHECK(body.rfind("<svg", 0) == 0);
  CHECK(body.find("</svg>") != std::string::npos);
  CHECK(body.find("polyline") != std::string::npos);
  std::remove(pc.c_str());
  std::remove(ps.c_str());
}

TEST_CASE("scenario json parsing") {
  nlohmann::json j = {
      {"id", "demo"},
      {"family", "gaussian_seq"},
      {"block_sizes", {3, 3}},
      {"signal", "one"},
      {"noise_sigma", 0.5},
      {"n_values", {8, 16}},
      {"reps", 2},
      {"seed", 4},
      {"methods",
       {{{"name", "fcls"},
         {"kind", "fcls_lla"},
         {"penalty", {{"kind", "scad"}, {"a", 2.1}, {"tau", "auto"}}},
         {"init", {{"kind", "raw"}}},
         {"grid_points", 6}},
        {{"name", "raw"}, {"kind", "raw"}}}}};
  SimScenario sc = scenario_from_json(j);
  CHECK(sc.id == "demo");
  CHECK(sc.family == Family::GaussianSeq);
  CHECK(sc.reps == 2);
  REQUIRE(sc.methods.size() == 2);
  CHECK(sc.methods[0].kind == MethodKind::FclsLla);
  CHECK_FALSE(sc.methods[0].tau.has_value());
  CHECK(sc.methods[0].init.kind == InitKind::Raw);
  std::vector<ResultRow> rows = monte_carlo(sc);
  CHECK(rows.size() == 2 * 2 * 2);

  nlohmann::json bad = {{"family", "gaussian_seq"}};
  try {
    scenario_from_json(bad);
    CHECK(false);
  } catch (const SchemaError& e) {
    std::string msg = e.what();
    CHECK(msg.find("block_sizes") != std::string::npos);
    CHECK(msg.find("n_values") != std::string::npos);
    CHECK(msg.find("seed") != std::string::npos);
  }
  CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"family", "bogus"},
                                                    {"block_sizes", {2}},
                                                    {"n_values", {4}},
                                                    {"seed", 1}}),
                  SchemaError);
}

TEST_CASE("presets") {
  SimScenario g5 = make_preset("gaussian_seq_5");
  CHECK(g5.family == Family::GaussianSeq);
  CHECK(g5.block_sizes == std::vector<Index>{5, 5});
  CHECK(g5.noise_sigma == 3.25);
  CHECK(g5.methods.size() == 3);
  CHECK(g5.methods[0].kind == MethodKind::FclsLla);
  CHECK(g5.methods[1].kind == MethodKind::HardThreshold);
  CHECK(g5.methods[2].kind == MethodKind::Raw);

  SimScenario lin = make_preset("linear_5");
  CHECK(lin.methods.size() == 3);
  CHECK(lin.methods[1].kind == MethodKind::EntrywiseScad);
  CHECK(lin.methods[1].a == 3.7);
  CHECK(lin.methods[2].kind == MethodKind::Lasso);
  CHECK(lin.methods[0].init.kind == InitKind::LassoCv);

  CHECK_THROWS_AS(make_preset("nope"), SchemaError);
  CHECK_THROWS_AS(make_preset("gaussian_seq_1"), SchemaError);
}
