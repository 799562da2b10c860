#pragma once

#include "fcls/simbench.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace fcls {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline Family parse_family(const std::string& s) {
  if (s == "gaussian_seq") return Family::GaussianSeq;
  if (s == "covariance") return Family::Covariance;
  if (s == "linear") return Family::Linear;
  if (s == "logistic") return Family::Logistic;
  throw SchemaError("unknown family: " + s);
}

inline SignalScheme parse_signal(const nlohmann::json& j) {
  if (j.is_number()) {
    double v = j.get<double>();
    if (v == 1.0) return SignalScheme::ConstantOne;
    if (v == 0.3) return SignalScheme::ConstantSmall;
    throw SchemaError("numeric signal must be 1 or 0.3");
  }
  std::string s = j.get<std::string>();
  if (s == "1" || s == "one") return SignalScheme::ConstantOne;
  if (s == "0.3") return SignalScheme::ConstantSmall;
  if (s == "pm1" || s == "random_sign") return SignalScheme::RandomSign;
  throw SchemaError("unknown signal scheme: " + s);
}

inline MethodKind parse_method_kind(const std::string& s) {
  if (s == "fcls_lla") return MethodKind::FclsLla;
  if (s == "entrywise_scad") return MethodKind::EntrywiseScad;
  if (s == "lasso") return MethodKind::Lasso;
  if (s == "hard_threshold") return MethodKind::HardThreshold;
  if (s == "raw") return MethodKind::Raw;
  throw SchemaError("unknown method kind: " + s);
}

inline InitKind parse_init_kind(const std::string& s) {
  if (s == "zero") return InitKind::Zero;
  if (s == "raw") return InitKind::Raw;
  if (s == "hard_threshold") return InitKind::HardThresholdCv;
  if (s == "soft_threshold") return InitKind::SoftThresholdCv;
  if (s == "lasso_cv") return InitKind::LassoCv;
  throw SchemaError("unknown init kind: " + s);
}

inline PenaltyKind parse_penalty_kind(const std::string& s) {
  if (s == "scad") return PenaltyKind::SCAD;
  if (s == "mcp") return PenaltyKind::MCP;
  if (s == "lasso") return PenaltyKind::LASSO;
  throw SchemaError("unknown penalty kind: " + s);
}

}  // namespace detail

inline InitSpec init_spec_from_json(const nlohmann::json& j) {
  InitSpec s;
  if (j.contains("kind")) s.kind = detail::parse_init_kind(j.at("kind").get<std::string>());
  if (j.contains("gamma") && !j.at("gamma").is_null()) s.gamma = j.at("gamma").get<double>();
  if (j.contains("cv_folds")) s.cv_folds = j.at("cv_folds").get<int>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

inline MethodSpec method_spec_from_json(const nlohmann::json& j) {
  MethodSpec ms;
  ms.name = j.at("name").get<std::string>();
  ms.kind = detail::parse_method_kind(j.at("kind").get<std::string>());
  if (j.contains("penalty")) {
    const auto& p = j.at("penalty");
    if (p.contains("kind")) ms.penalty_kind = detail::parse_penalty_kind(p.at("kind"));
    if (p.contains("a")) ms.a = p.at("a").get<double>();
    if (p.contains("tau") && !p.at("tau").is_null() && !(p.at("tau").is_string()))
      ms.tau = p.at("tau").get<double>();  // the string "auto" means grid
  }
  if (j.contains("init")) ms.init = init_spec_from_json(j.at("init"));
  if (j.contains("mode"))
    ms.mode = j.at("mode").get<std::string>() == "to_convergence" ? LlaMode::ToConvergence
                                                                  : LlaMode::TwoStep;
  if (j.contains("cheat")) ms.cheat = j.at("cheat").get<bool>();
  if (j.contains("grid_points")) ms.grid_points = j.at("grid_points").get<int>();
  if (j.contains("grid_decades")) ms.grid_decades = j.at("grid_decades").get<double>();
  return ms;
}

inline SimScenario scenario_from_json(const nlohmann::json& j) {
  std::vector<std::string> missing;
  for (const char* key : {"family", "block_sizes", "n_values", "seed"})
    if (!j.contains(key)) missing.push_back(key);
  if (!missing.empty()) {
    std::string msg = "scenario JSON missing required fields:";
    for (const auto& k : missing) msg += " " + k;
    throw SchemaError(msg);
  }
  SimScenario sc;
  sc.id = j.value("id", std::string("scenario"));
  sc.family = detail::parse_family(j.at("family").get<std::string>());
  for (const auto& b : j.at("block_sizes")) sc.block_sizes.push_back(b.get<Index>());
  sc.n_isolated = j.value("n_isolated", 0);
  if (j.contains("signal")) sc.signal = detail::parse_signal(j.at("signal"));
  sc.noise_sigma = j.value("noise_sigma", 1.0);
  for (const auto& n : j.at("n_values")) sc.n_values.push_back(n.get<Index>());
  sc.reps = j.value("reps", 20);
  if (sc.reps < 1) throw SchemaError("reps must be >= 1");
  sc.seed = j.at("seed").get<std::uint64_t>();
  sc.ridge = j.value("ridge", 0.01);
  if (j.contains("methods"))
    for (const auto& m : j.at("methods")) sc.methods.push_back(method_spec_from_json(m));
  return sc;
}

/// Built-in desk-scale presets named <family>_<block size>: two equal fully
/// connected blocks with the experiment section's signal and noise settings.
inline SimScenario make_preset(const std::string& name) {
  auto make = [&](Family fam, Index bsize) {
    SimScenario sc;
    sc.id = name;
    sc.family = fam;
    sc.block_sizes = {bsize, bsize};
    sc.seed = 12345;
    switch (fam) {
      case Family::GaussianSeq:
        sc.signal = SignalScheme::ConstantOne;
        sc.noise_sigma = 3.25;
        break;
      case Family::Covariance:
        sc.signal = SignalScheme::ConstantSmall;
        break;
      case Family::Linear:
      case Family::Logistic:
        sc.signal = SignalScheme::RandomSign;
        sc.noise_sigma = 1.0;
        break;
    }
    sc.n_values = {16, 32, 64, 128, 256};
    bool shrink = fam == Family::GaussianSeq || fam == Family::Covariance;
    InitSpec init;
    init.kind = shrink ? InitKind::HardThresholdCv : InitKind::LassoCv;

    MethodSpec fcls;
    fcls.name = "fcls";
    fcls.kind = MethodKind::FclsLla;
    fcls.a = 2.1;
    fcls.init = init;
    fcls.grid_points = 20;
    sc.methods.push_back(fcls);

    if (shrink) {
      MethodSpec ht;
      ht.name = "hard_threshold";
      ht.kind = MethodKind::HardThreshold;
      ht.grid_points = 20;
      sc.methods.push_back(ht);
      MethodSpec raw;
      raw.name = "raw";
      raw.kind = MethodKind::Raw;
      sc.methods.push_back(raw);
    } else {
      MethodSpec scad;
      scad.name = "entrywise_scad";
      scad.kind = MethodKind::EntrywiseScad;
      scad.a = 3.7;
      scad.init = init;
      scad.grid_points = 20;
      sc.methods.push_back(scad);
      MethodSpec lasso;
      lasso.name = "lasso";
      lasso.kind = MethodKind::Lasso;
      lasso.grid_points = 20;
      sc.methods.push_back(lasso);
    }
    return sc;
  };
  auto pos = name.rfind('_');
  if (pos == std::string::npos) throw SchemaError("unknown preset: " + name);
  std::string fam = name.substr(0, pos);
  Index bsize = 0;
  try {
    bsize = std::stol(name.substr(pos + 1));
  } catch (const std::exception&) {
    throw SchemaError("unknown preset: " + name);
  }
  if (bsize < 2) throw SchemaError("preset block size must be >= 2");
  return make(detail::parse_family(fam), bsize);
}

}  // namespace fcls
