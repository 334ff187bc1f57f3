#pragma once

#include <cstddef>
#include <vector>

#include "cvquad/rng.hpp"
#include "cvquad/testfn.hpp"

namespace cvquad {

// Numerical checks on the two lower-bound constructions: the computable pieces
// (KL divergences, tail bounds, separations, norm scalings) are evaluated both
// in closed form and by simulation or quadrature and compared.

// ---- two-point prior (CaseI) ----------------------------------------------
// With m^d = 200 n cubes, the chance any of the n points lands in the bump
// cube is hit = 1 - (1 - 1/m^d)^n <= 1 - (2e)^{-1/200}, and
// KL(P0 || P1) = eps log((1+eps)/(1-eps)) hit, tv_bound = sqrt(KL/2).
struct Case1Kl {
  double hit = 0.0;
  double kl = 0.0;
  double tv_bound = 0.0;
};
Case1Kl kl_bound_case1(std::size_t n, double eps);
double case1_hit_bound();  // 1 - (2e)^{-1/200}

// Monte Carlo on the reduced observation (hit yes/no, which arm): averages the
// log likelihood ratio for KL and half the absolute ratio gap for TV.
struct Case1KlSim {
  double kl_hat = 0.0, kl_se = 0.0;
  double tv_hat = 0.0, tv_se = 0.0;
};
Case1KlSim empirical_kl_case1(std::size_t n, double eps, std::size_t trials,
                              RngStream& rng, int threads = 0);
Case1KlSim empirical_kl_case1_serial(std::size_t n, double eps, std::size_t trials,
                                     RngStream& rng);

// ---- sign-pattern prior (CaseII) -------------------------------------------
// Sum of m^d tilted signs stays below -(1-lambda) m^d kappa except with
// probability exp(-lambda^2 kappa^2 m^d / 2); with kappa = (1/3)sqrt(2/(3n)),
// lambda = 1/2, m^d = 200 n the exponent is the n-free constant 50/27.
struct HoeffdingCheck {
  double exponent = 0.0;      // lambda^2 kappa^2 m^d / 2
  double bound = 0.0;         // exp(-exponent)
  double tail0_hat = 0.0, tail0_se = 0.0;  // arm 0: P(sum >= -(1-lambda) m^d kappa)
  double tail1_hat = 0.0, tail1_se = 0.0;  // arm 1: P(sum <=  (1-lambda) m^d kappa)
};
HoeffdingCheck hoeffding_separation_check(const PriorSpec& spec, std::size_t trials,
                                          RngStream& rng, int threads = 0);
HoeffdingCheck hoeffding_separation_check_serial(const PriorSpec& spec, std::size_t trials,
                                                 RngStream& rng);

// Per-cube moment gap A - B with A = int (M + f_j)^q, B = int (M - f_j)^q over
// one cube; the chain of inequalities gives
// A - B >= q M^{q-1} 2^{-(q-2)} m^{-s-d} ||K||_{L1}.
struct Case2Separation {
  double a = 0.0, b = 0.0;
  double delta_prime = 0.0;  // A - B
  double lower_bound = 0.0;  // the constant-chain bound above
};
Case2Separation case2_separation(const PriorSpec& spec, int q, double tol);

// ---- Le Cam style summary ---------------------------------------------------
// CaseI: Delta = I_{g1}^q / 2, beta0 = beta1 = (1-eps)/2.
// CaseII: Delta = (1-lambda) kappa m^d (A-B), beta0 = beta1 = exp(-50/27) form.
struct PriorPair {
  double c = 0.0;       // centre the two priors separate around
  double delta = 0.0;   // separation
  double beta0 = 0.0, beta1 = 0.0;
};
PriorPair prior_pair_summary(const PriorSpec& spec, int q, double tol);

// ---- norm scaling of the scaled bumps ---------------------------------------
// ||D^t g||_{L^p} of the CaseI-amplitude bump scales like m^{t-s}; slope of
// log-norm against log-m fitted over m_list (d=1, t <= 2, central differences
// at step 1e-5/m, norms by fixed Simpson).
struct ScalingFit {
  double slope = 0.0;
  double r2 = 0.0;
  std::vector<double> norms;
};
ScalingFit sobolev_scaling_check(double s, double p, int t_order,
                                 const std::vector<std::size_t>& m_list);

// noisy-integral two-point construction: KL between the n-sample Gaussian
// shifts is n (n^{-gamma-1/2})^2 / (2 n^{-2gamma}) = 1/2 for every n, gamma
double gaussian_shift_kl(std::size_t n, double gamma);

}  // namespace cvquad
