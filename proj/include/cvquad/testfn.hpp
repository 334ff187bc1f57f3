#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cvquad/rng.hpp"

namespace cvquad {

// Base bump K0(x) = prod_i exp(-1/(1-x_i^2)) * 1{|x_i| <= 1}, supported on
// [-1,1]^d; K(x) = K0(2x) is supported on [-1/2,1/2]^d with sup e^{-d} at 0.
enum class BumpProfile { K0, K };
double bump_base_eval(const double* x, int d, BumpProfile profile);

enum class FnKind { Constant, Smooth, BumpBase, ScaledBump, PriorSample, Peak };
enum class SmoothProfile { Sin2PiPlus2, OnePlusBump, Linear, Tent };

// Two bump amplitudes show up in the lower-bound constructions: the two-point
// prior uses m^{-s+d/p} (CaseI), the sign-pattern prior uses m^{-s} (CaseII).
enum class BumpCase { CaseI, CaseII };
enum class PriorCase { CaseI, CaseII };

// Derived constants for the priors at sample budget n.
struct PriorSpec {
  PriorCase prior_case = PriorCase::CaseI;
  std::size_t n = 1;
  int d = 1;
  double s = 1.0;
  double p = 4.0;
  std::size_t m = 1;   // cubes per axis, ceil((200 n)^{1/d})
  double alpha = 0.0;  // ||K||_inf = e^{-d}
  double big_m = 0.0;  // M = 3 alpha
  double kappa = 0.0;  // (1/3) sqrt(2/(3n))
  double lambda = 0.5;
  double eps = 0.5;    // CaseI mixture tilt
};
PriorSpec make_prior_spec(PriorCase c, std::size_t n, int d, double s, double p,
                          double eps = 0.5);

struct TestFunction {
  FnKind kind = FnKind::Constant;
  int d = 1;
  double s = 1.0, p = 4.0;  // smoothness-class metadata for rate lookups

  double c = 0.0;                                     // Constant
  SmoothProfile profile = SmoothProfile::Sin2PiPlus2; // Smooth

  // ScaledBump / PriorSample geometry: m cubes per axis on [0,1]^d, cube index
  // j is 1-based row-major (last axis fastest), centers at cube midpoints
  std::size_t m = 1;
  std::size_t j = 1;
  double amplitude = 1.0;

  double level = 0.0;              // PriorSample CaseII offset M
  std::vector<std::int8_t> signs;  // PriorSample CaseII eta_j, size m^d
  int case1_v = 0;                 // PriorSample CaseI arm drawn (0 = zero function)

  double beta = 0.0;               // Peak
  std::vector<double> x0;

  double eval(const double* x) const;
  double operator()(const double* x) const { return eval(x); }
};

TestFunction make_constant(double value, int d);
TestFunction make_smooth(SmoothProfile profile, int d, double s = 1.0, double p = 4.0);
TestFunction make_bump_base(int d);  // K centered in [0,1]^d
TestFunction make_scaled_bump(std::size_t m, std::size_t j, int d, BumpCase amp_case,
                              double s, double p);
// arm 0 / arm 1 pick the tilt of the prior the sample is drawn from
TestFunction make_prior_sample(const PriorSpec& spec, int arm, RngStream& rng);
// f(x) = ||x - x0||^{-beta}; requires beta in [d/(2q), min(d/q, d/p - s)), the
// window where the q-th moment is finite but plain MC has infinite variance
TestFunction make_peak(double beta, const std::vector<double>& x0, int d, int q,
                       double p, double s);

// I_f^q = int f^q to absolute tolerance tol: closed form where available
// (Constant, Peak in d=1), support-aware adaptive quadrature otherwise.
double reference_moment(const TestFunction& f, int q, double tol);

// center of 1-based row-major cube j of the m-grid on [0,1]^d
void cube_center(std::size_t m, std::size_t j, int d, double* out);
// number of cubes m^d (checked against overflow)
std::size_t cube_count(std::size_t m, int d);

}  // namespace cvquad
