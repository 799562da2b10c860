#pragma once

#include "fcls/graph.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fcls {

enum class PenaltyKind { SCAD, MCP, LASSO };

inline std::string to_string(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::SCAD: return "scad";
    case PenaltyKind::MCP: return "mcp";
    case PenaltyKind::LASSO: return "lasso";
  }
  return "?";
}

/// A SCAD-like concave penalty g_tau with constants a0 >= a1 > 0 and
/// b2 > b1 > 0: g is increasing concave, g'(0+) = a0*tau, g'(t) >= a1*tau on
/// (0, b1*tau], and g'(t) = 0 beyond b2*tau. The LASSO kind is g(t) = t
/// (not SCAD-like: no flat region).
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::SCAD;
  double tau = 1.0;
  double a = 2.1;  // SCAD/MCP shape parameter; ignored for LASSO
  double a0 = 1.0, a1 = 1.0, b1 = 1.0, b2 = 0.0;

  bool scad_like() const { return kind != PenaltyKind::LASSO; }
};

inline PenaltySpec make_penalty(PenaltyKind kind, double tau, double a = 0.0) {
  if (kind != PenaltyKind::LASSO && tau <= 0)
    throw std::invalid_argument("make_penalty: tau must be > 0");
  PenaltySpec s;
  s.kind = kind;
  s.tau = tau;
  s.a = a;
  switch (kind) {
    case PenaltyKind::SCAD:
      if (a <= 2) throw std::invalid_argument("make_penalty: SCAD requires a > 2");
      s.a0 = s.a1 = 1.0;
      s.b1 = 1.0;
      s.b2 = a;
      break;
    case PenaltyKind::MCP:
      if (a <= 1) throw std::invalid_argument("make_penalty: MCP requires a > 1");
      s.a0 = 1.0;
      s.a1 = 0.5;
      s.b1 = a / 2;
      s.b2 = a;
      break;
    case PenaltyKind::LASSO:
      s.a0 = s.a1 = 1.0;
      s.b1 = s.b2 = std::numeric_limits<double>::infinity();
      break;
  }
  return s;
}

/// Right derivative g'(t); at kinks returns the right limit.
inline double g_prime(const PenaltySpec& s, double t) {
  if (t < 0) throw std::invalid_argument("g_prime: t must be >= 0");
  switch (s.kind) {
    case PenaltyKind::SCAD: {
      if (t < s.tau) return s.tau;  // right limit at t = tau is the next branch
      if (t >= s.tau && t < s.a * s.tau) return (s.a * s.tau - t) / (s.a - 1);
      return 0.0;
    }
    case PenaltyKind::MCP:
      return std::max(s.tau - t / s.a, 0.0);
    case PenaltyKind::LASSO:
      return 1.0;
  }
  return 0.0;
}

/// g(t) = integral of g' from 0 to t, in closed form.
inline double g_value(const PenaltySpec& s, double t) {
  if (t < 0) throw std::invalid_argument("g_value: t must be >= 0");
  switch (s.kind) {
    case PenaltyKind::SCAD: {
      const double tau = s.tau, a = s.a;
      t = std::min(t, a * tau);  // flat (bitwise constant) beyond b2*tau
      if (t <= tau) return tau * t;
      double u = t - tau;
      return tau * tau + (a * tau * u - (t * t - tau * tau) / 2) / (a - 1);
    }
    case PenaltyKind::MCP: {
      const double tau = s.tau, a = s.a;
      t = std::min(t, a * tau);
      return tau * t - t * t / (2 * a);
    }
    case PenaltyKind::LASSO:
      return t;
  }
  return 0.0;
}

/// Folded concave Laplacian spectral penalty:
/// (1/2) * sum_i g(lambda_i(L(|beta|))).
template <typename Scalar>
double fcls_value(const PenaltySpec& s, const EdgeVector<Scalar>& beta) {
  SpectralSummary sp = spectral_summary(beta);
  double total = 0;
  for (Index i = 0; i < sp.eigenvalues.size(); ++i)
    total += g_value(s, std::max(sp.eigenvalues(i), 0.0));
  return total / 2;
}

}  // namespace fcls
