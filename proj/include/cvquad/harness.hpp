#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cvquad/estimators.hpp"
#include "cvquad/rate_theory.hpp"

namespace cvquad {

// Repository default seed. Acceptance pins one seeded regression check (the
// max-error comparison on the heavy-tailed peak), so this value is part of the
// tested contract; see tests/acceptance.cpp.
inline constexpr std::uint64_t kDefaultBaseSeed = 26;

enum class Stat { RMSE, MedianAbs };
const char* stat_name(Stat s);

// Function menu the sweep harness can build per cell (all deterministic;
// prior draws are exercised by the lab, not by sweeps).
struct FunctionSpec {
  std::string name = "sin2pi_plus2";  // constant | sin2pi_plus2 | one_plus_bump |
                                      // linear | tent | peak | scaled_bump
  int d = 1;
  double s = 1.0, p = 4.0;
  double c = 1.0;                         // constant
  double beta = 0.18;                     // peak
  std::vector<double> x0;                 // peak centre (defaults to the origin)
  std::size_t m = 4, j = 1;               // scaled_bump
  BumpCase bump_case = BumpCase::CaseII;  // scaled_bump amplitude

  TestFunction build(int q) const;
};

enum class MSchedule { None, Fixed, Power, Theta };
enum class KSchedule { Fixed, Optimal };
enum class CellsSchedule { Fixed, Power, Occupancy };

struct EstimatorSpec {
  Method method = Method::PlainMC;
  int q = 1;

  MSchedule m_mode = MSchedule::None;  // truncation: Fixed -> m_c,
  double m_c = 1.0, m_pow = 0.0;       // Power -> m_c n^{m_pow}, Theta -> default_truncation

  KSchedule k_mode = KSchedule::Fixed;
  std::size_t k = 1;

  RegressorKind reg_kind = RegressorKind::Grid;
  CellsSchedule cells_mode = CellsSchedule::Fixed;  // Fixed -> cells_c,
  double cells_c = 16.0, cells_pow = 1.0;  // Power -> round(cells_c n^{pow}),
                                           // Occupancy -> floor(N/(cells_c ln N))
  GridFill fill = GridFill::Zero;
  std::size_t reg_k = 1;  // KNN regressor inside cv_moment

  std::size_t quad_resolution = 0;  // 0 = default
  std::size_t probe_n = 100000;     // weights-form volumes in d>=2
};

struct ExperimentConfig {
  FunctionSpec fn;
  EstimatorSpec est;
  std::vector<std::size_t> n_grid;
  std::size_t reps = 100;
  double gamma = std::numeric_limits<double>::infinity();
  std::uint64_t base_seed = kDefaultBaseSeed;
  Stat stat = Stat::RMSE;
  std::optional<double> reference;  // else reference_moment at ref_tol
  double ref_tol = 1e-10;
  double theory_tol = 0.2;
  int threads = 0;  // 0 = runtime default
};

struct RepRecord {
  std::size_t n = 0;
  std::size_t rep = 0;
  double estimate = 0.0;
  double error = 0.0;
  bool failed = false;
  std::string message;
};

struct NStat {
  std::size_t n = 0;
  double stat = 0.0;
  double se = 0.0;  // large-sample standard error of the statistic
  std::size_t n_reps = 0;
  std::size_t n_failed = 0;
};

struct SweepResult {
  double reference = 0.0;
  std::vector<RepRecord> reps;  // ordered by (n index, rep)
  std::vector<NStat> stats;     // one per n
};

// schedules resolved at size n (Fixed/Power/Theta truncation, grid cells,
// optimal k); shared by the sweep cells and the single-estimate command
double schedule_truncation(const ExperimentConfig& cfg, std::size_t n);
std::size_t schedule_cells(const ExperimentConfig& cfg, std::size_t n);
std::size_t schedule_k(const ExperimentConfig& cfg, std::size_t n);

// one estimate at size n on cell substream (base_seed, n, rep)
Estimate estimate_once(const ExperimentConfig& cfg, std::size_t n, std::size_t rep = 0);

// Each (n, rep) cell owns substream (base_seed, n, rep) and is independent of
// every other cell, so the result is a pure function of (config, base_seed)
// whatever the thread count. Cell failures are recorded, not fatal.
SweepResult run_sweep(const ExperimentConfig& cfg);
SweepResult run_sweep_serial(const ExperimentConfig& cfg);  // reference path

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double residual_max = 0.0;
  bool below_floor = false;  // some per-n statistic was exactly 0; no fit
};
// least squares of log(stat) on log(n)
SlopeFit fit_slope(const std::vector<NStat>& stats);

struct RateReport {
  SlopeFit fit;
  double theory = 0.0;
  double tol = 0.0;
  bool within = false;
  std::string verdict;
};
// theory slope per estimator kind: plain MC -1/2, truncated MC q beta - 1 on
// the peak (minimax moment exponent otherwise), CV the moment exponent (with a
// regime warning when the parameters sit in the rare-event window), k-NN the
// noisy-integral exponent
RateReport compare_to_theory(const SweepResult& result, const ExperimentConfig& cfg);

}  // namespace cvquad
