#pragma once

#include <cstddef>

namespace cvquad {

// minimax error exponent for the q-th moment over a W^{s,p} ball:
// max{ -q(s/d - 1/p) - 1, -s/d - 1/2 }. Requires p > 2, q < p < 2q, s >= 0.
double moment_exponent(double s, double p, int q, int d);

// minimax exponent for the integral under noise level n^{-gamma}:
// max{ -1/2 - gamma, -1/2 - s/d }; gamma = inf gives the noiseless -1/2 - s/d
double integral_exponent(double s, int d, double gamma);

enum class Regime { CaseI, CaseII, CaseIII, RareEvent };
enum class Recommend { ControlVariates, TruncatedMC };
const char* regime_name(Regime r);
const char* recommend_name(Recommend r);

// The three thresholds in s (all with p > 2, q < p < 2q, so they are strictly
// ordered): d/p > d(2q-p)/(p(2q-2)) > d(2q-p)/(2pq).
struct RegimeReport {
  Regime regime = Regime::CaseI;
  bool on_boundary = false;   // s fell exactly on a threshold (classified up)
  double thr_case1 = 0.0;     // d/p
  double thr_rate = 0.0;      // d(2q-p)/(p(2q-2)), where the active branch flips
  double thr_algo = 0.0;      // d(2q-p)/(2pq), below lives the rare-event family
  Recommend recommended = Recommend::ControlVariates;
  double exponent = 0.0;      // moment_exponent at these parameters
};
RegimeReport regime(double s, double p, int q, int d);

// k = clamp(round(n^{2(s - gamma d)/(d + 2s)}), 1, n/2) when gamma < s/d,
// else 1. Requires s in (0,1), n >= 2.
std::size_t optimal_k(std::size_t n, double s, int d, double gamma);

// exponent of the default truncation schedule, 1/p - s/d (no positivity check)
double truncation_exponent(double s, double p, int d);

}  // namespace cvquad
