#include "cvquad/rate_theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cvquad {

namespace {

void check_standing(double s, double p, int q, int d) {
  if (!(p > 2.0)) throw std::invalid_argument("rate_theory: requires p > 2");
  if (!(static_cast<double>(q) < p && p < 2.0 * static_cast<double>(q)))
    throw std::invalid_argument("rate_theory: requires q < p < 2q");
  if (!(s >= 0.0)) throw std::invalid_argument("rate_theory: requires s >= 0");
  if (d < 1) throw std::invalid_argument("rate_theory: requires d >= 1");
}

}  // namespace

double moment_exponent(double s, double p, int q, int d) {
  check_standing(s, p, q, d);
  const double sd = s / static_cast<double>(d);
  const double branch_sparse = -static_cast<double>(q) * (sd - 1.0 / p) - 1.0;
  const double branch_dense = -sd - 0.5;
  return std::max(branch_sparse, branch_dense);
}

double integral_exponent(double s, int d, double gamma) {
  if (!(s > 0.0)) throw std::invalid_argument("integral_exponent: requires s > 0");
  if (d < 1) throw std::invalid_argument("integral_exponent: requires d >= 1");
  if (!(gamma >= 0.0)) throw std::invalid_argument("integral_exponent: requires gamma >= 0");
  const double noise_branch = std::isinf(gamma)
                                  ? -std::numeric_limits<double>::infinity()
                                  : -0.5 - gamma;
  const double smooth_branch = -0.5 - s / static_cast<double>(d);
  return std::max(noise_branch, smooth_branch);
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::CaseI: return "CaseI_s_gt_d_over_p";
    case Regime::CaseII: return "CaseII_mid";
    case Regime::CaseIII: return "CaseIII_low";
    case Regime::RareEvent: return "RareEvent";
  }
  return "?";
}

const char* recommend_name(Recommend r) {
  return r == Recommend::ControlVariates ? "CV" : "TruncatedMC";
}

RegimeReport regime(double s, double p, int q, int d) {
  check_standing(s, p, q, d);
  RegimeReport rep;
  const double dd = static_cast<double>(d);
  const double qq = static_cast<double>(q);
  rep.thr_case1 = dd / p;
  rep.thr_rate = dd * (2.0 * qq - p) / (p * (2.0 * qq - 2.0));
  rep.thr_algo = dd * (2.0 * qq - p) / (2.0 * p * qq);

  // boundary values classify into the higher (smoother) regime, flagged
  if (s >= rep.thr_case1) {
    rep.regime = Regime::CaseI;
    rep.on_boundary = (s == rep.thr_case1);
  } else if (s >= rep.thr_rate) {
    rep.regime = Regime::CaseII;
    rep.on_boundary = (s == rep.thr_rate);
  } else if (s >= rep.thr_algo) {
    rep.regime = Regime::CaseIII;
    rep.on_boundary = (s == rep.thr_algo);
  } else {
    rep.regime = Regime::RareEvent;
    rep.on_boundary = false;
  }
  rep.recommended = (s > rep.thr_algo) ? Recommend::ControlVariates : Recommend::TruncatedMC;
  rep.exponent = moment_exponent(s, p, q, d);
  return rep;
}

std::size_t optimal_k(std::size_t n, double s, int d, double gamma) {
  if (n < 2) throw std::invalid_argument("optimal_k: requires n >= 2");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("optimal_k: requires s in (0,1)");
  if (d < 1) throw std::invalid_argument("optimal_k: requires d >= 1");
  const double dd = static_cast<double>(d);
  if (!(gamma < s / dd)) return 1;
  const double expo = 2.0 * (s - gamma * dd) / (dd + 2.0 * s);
  const double raw = std::round(std::pow(static_cast<double>(n), expo));
  const double hi = static_cast<double>(n / 2);
  const double clamped = std::min(std::max(raw, 1.0), std::max(1.0, hi));
  return static_cast<std::size_t>(clamped);
}

double truncation_exponent(double s, double p, int d) {
  return 1.0 / p - s / static_cast<double>(d);
}

}  // namespace cvquad
