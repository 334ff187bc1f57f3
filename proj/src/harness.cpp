#include "cvquad/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cvquad/parallel.hpp"
#include "cvquad/sampling.hpp"
#include "cvquad/testfn.hpp"

namespace cvquad {

const char* stat_name(Stat s) { return s == Stat::RMSE ? "rmse" : "median_abs"; }

TestFunction FunctionSpec::build(int q) const {
  if (name == "constant") return make_constant(c, d);
  if (name == "sin2pi_plus2") return make_smooth(SmoothProfile::Sin2PiPlus2, d, s, p);
  if (name == "one_plus_bump") return make_smooth(SmoothProfile::OnePlusBump, d, s, p);
  if (name == "linear") return make_smooth(SmoothProfile::Linear, d, s, p);
  if (name == "tent") return make_smooth(SmoothProfile::Tent, d, s, p);
  if (name == "peak") {
    std::vector<double> centre = x0;
    if (centre.empty()) centre.assign(static_cast<std::size_t>(d), 0.0);
    return make_peak(beta, centre, d, q, p, s);
  }
  if (name == "scaled_bump") return make_scaled_bump(m, j, d, bump_case, s, p);
  throw std::invalid_argument("unknown function name: " + name);
}

namespace {

void validate(const ExperimentConfig& cfg) {
  if (cfg.n_grid.size() < 4)
    throw std::invalid_argument("sweep config: n_grid needs at least 4 sizes");
  for (std::size_t i = 0; i + 1 < cfg.n_grid.size(); ++i)
    if (cfg.n_grid[i] >= cfg.n_grid[i + 1])
      throw std::invalid_argument("sweep config: n_grid must be strictly increasing");
  if (cfg.n_grid.front() < 2)
    throw std::invalid_argument("sweep config: sizes must be >= 2");
  if (cfg.reps < 30) throw std::invalid_argument("sweep config: reps must be >= 30");
  if (cfg.est.q < 1) throw std::invalid_argument("sweep config: q must be >= 1");
  if (std::isnan(cfg.gamma) || cfg.gamma < 0.0)
    throw std::invalid_argument("sweep config: gamma must be >= 0 or inf");
  if (cfg.est.method == Method::TruncatedMC && cfg.est.m_mode == MSchedule::None)
    throw std::invalid_argument("sweep config: truncated MC needs a truncation schedule");
  const bool knn_integral = cfg.est.method == Method::KnnQuadratureDirect ||
                            cfg.est.method == Method::KnnQuadratureWeights;
  if (knn_integral && cfg.est.q != 1)
    throw std::invalid_argument("sweep config: the quadrature estimators target q = 1");
}

}  // namespace

double schedule_truncation(const ExperimentConfig& cfg, std::size_t n) {
  switch (cfg.est.m_mode) {
    case MSchedule::Fixed:
      return cfg.est.m_c;
    case MSchedule::Power:
      return cfg.est.m_c * std::pow(static_cast<double>(n), cfg.est.m_pow);
    case MSchedule::Theta:
      return default_truncation(n, cfg.fn.s, cfg.fn.p, cfg.fn.d, cfg.est.m_c);
    case MSchedule::None:
      break;
  }
  throw std::invalid_argument("schedule_truncation: no truncation schedule configured");
}

std::size_t schedule_cells(const ExperimentConfig& cfg, std::size_t n) {
  const double nn = static_cast<double>(n);
  double v = 0.0;
  switch (cfg.est.cells_mode) {
    case CellsSchedule::Fixed:
      v = cfg.est.cells_c;
      break;
    case CellsSchedule::Power:
      v = std::round(cfg.est.cells_c * std::pow(nn, cfg.est.cells_pow));
      break;
    case CellsSchedule::Occupancy:
      v = std::floor(nn / (cfg.est.cells_c * std::log(nn)));
      break;
  }
  return static_cast<std::size_t>(std::max(1.0, v));
}

std::size_t schedule_k(const ExperimentConfig& cfg, std::size_t n) {
  if (cfg.est.k_mode == KSchedule::Fixed) return cfg.est.k;
  return optimal_k(n, cfg.fn.s, cfg.fn.d, cfg.gamma);
}

Estimate estimate_once(const ExperimentConfig& cfg, std::size_t n, std::size_t rep) {
  const TestFunction fn = cfg.fn.build(cfg.est.q);
  RngStream rng = derive_substream(cfg.base_seed, static_cast<std::uint64_t>(n),
                                   static_cast<std::uint64_t>(rep));
  SampleSet smp = sample_uniform(n, cfg.fn.d, rng);
  observe(smp, fn, cfg.gamma, rng);
  switch (cfg.est.method) {
    case Method::PlainMC:
      return plain_mc_moment(smp, cfg.est.q);
    case Method::TruncatedMC:
      return truncated_mc_moment(smp, cfg.est.q, schedule_truncation(cfg, n));
    case Method::CVMoment: {
      RegressorSpec rs;
      rs.kind = cfg.est.reg_kind;
      rs.k = cfg.est.reg_k;
      rs.cells_per_axis = schedule_cells(cfg, n);
      rs.fill = cfg.est.fill;
      return cv_moment(smp, cfg.est.q, rs, cfg.est.quad_resolution);
    }
    case Method::KnnQuadratureDirect:
      return integral_knn_quadrature(smp, schedule_k(cfg, n), cfg.est.quad_resolution);
    case Method::KnnQuadratureWeights:
      return integral_weights_form(smp, schedule_k(cfg, n), cfg.est.probe_n, &rng, 1);
  }
  throw std::logic_error("estimate_once: unknown method");
}

namespace {

RepRecord run_cell(const ExperimentConfig& cfg, std::size_t n, std::size_t rep,
                   double reference) {
  RepRecord rec;
  rec.n = n;
  rec.rep = rep;
  try {
    const Estimate est = estimate_once(cfg, n, rep);
    rec.estimate = est.value;
    rec.error = std::abs(est.value - reference);
  } catch (const std::exception& ex) {
    rec.failed = true;
    rec.message = ex.what();
  }
  return rec;
}

NStat stat_over_reps(std::size_t n, const RepRecord* recs, std::size_t reps, Stat stat) {
  NStat out;
  out.n = n;
  std::vector<double> errs;
  errs.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    if (recs[r].failed)
      ++out.n_failed;
    else
      errs.push_back(recs[r].error);
  }
  out.n_reps = errs.size();
  if (errs.empty()) {
    out.stat = std::numeric_limits<double>::quiet_NaN();
    out.se = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const double m = static_cast<double>(errs.size());
  if (stat == Stat::RMSE) {
    double s2 = 0.0, s4 = 0.0;
    for (double e : errs) {
      s2 += e * e;
      s4 += e * e * e * e;
    }
    const double mean2 = s2 / m;
    out.stat = std::sqrt(mean2);
    // delta method: Var(RMSE) ~ Var(e^2) / (4 mean2 m)
    const double var2 = std::max(0.0, s4 / m - mean2 * mean2);
    out.se = mean2 > 0.0 ? std::sqrt(var2 / m) / (2.0 * out.stat) : 0.0;
  } else {
    std::sort(errs.begin(), errs.end());
    const std::size_t mid = errs.size() / 2;
    out.stat = (errs.size() % 2 == 1) ? errs[mid] : 0.5 * (errs[mid - 1] + errs[mid]);
    // distance between the order statistics sqrt(m)/2 either side of the
    // middle, the usual large-sample SE of a sample median
    const double half = std::sqrt(m) / 2.0;
    const double centre = (m - 1.0) / 2.0;
    const std::size_t lo = static_cast<std::size_t>(std::max(0.0, std::floor(centre - half)));
    const std::size_t hi = static_cast<std::size_t>(
        std::min(m - 1.0, std::ceil(centre + half)));
    out.se = (errs[hi] - errs[lo]) / 2.0;
  }
  return out;
}

SweepResult sweep_impl(const ExperimentConfig& cfg, bool serial) {
  validate(cfg);
  const TestFunction fn = cfg.fn.build(cfg.est.q);
  const int ref_q = (cfg.est.method == Method::KnnQuadratureDirect ||
                     cfg.est.method == Method::KnnQuadratureWeights)
                        ? 1
                        : cfg.est.q;
  SweepResult res;
  res.reference = cfg.reference ? *cfg.reference : reference_moment(fn, ref_q, cfg.ref_tol);

  const std::size_t cells = cfg.n_grid.size() * cfg.reps;
  res.reps.resize(cells);
  auto run_one = [&](std::size_t flat) {
    const std::size_t n_idx = flat / cfg.reps;
    const std::size_t rep = flat % cfg.reps;
    res.reps[flat] = run_cell(cfg, cfg.n_grid[n_idx], rep, res.reference);
  };
  if (serial) {
    for (std::size_t i = 0; i < cells; ++i) run_one(i);
  } else {
    parallel_for(cells, cfg.threads, run_one);
  }

  res.stats.reserve(cfg.n_grid.size());
  for (std::size_t n_idx = 0; n_idx < cfg.n_grid.size(); ++n_idx)
    res.stats.push_back(stat_over_reps(cfg.n_grid[n_idx], res.reps.data() + n_idx * cfg.reps,
                                       cfg.reps, cfg.stat));
  return res;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg) { return sweep_impl(cfg, /*serial=*/false); }

SweepResult run_sweep_serial(const ExperimentConfig& cfg) {
  return sweep_impl(cfg, /*serial=*/true);
}

SlopeFit fit_slope(const std::vector<NStat>& stats) {
  if (stats.size() < 2) throw std::invalid_argument("fit_slope: need at least 2 grid points");
  SlopeFit fit;
  for (const NStat& s : stats) {
    if (!std::isfinite(s.stat))
      throw std::runtime_error("fit_slope: non-finite error statistic (all reps failed?)");
    if (s.stat == 0.0) {
      fit.below_floor = true;
      return fit;
    }
    if (s.stat < 0.0) throw std::logic_error("fit_slope: negative error statistic");
  }
  const std::size_t k = stats.size();
  std::vector<double> xs(k), ys(k);
  for (std::size_t i = 0; i < k; ++i) {
    xs[i] = std::log(static_cast<double>(stats[i].n));
    ys[i] = std::log(stats[i].stat);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  for (std::size_t i = 0; i < k; ++i)
    fit.residual_max =
        std::max(fit.residual_max, std::abs(ys[i] - (fit.intercept + fit.slope * xs[i])));
  return fit;
}

namespace {

// the branch formula without the standing-assumption gate, for verdicts on
// parameter sets the gate rejects
double moment_exponent_raw(double s, double p, int q, int d) {
  const double sd = s / static_cast<double>(d);
  return std::max(-static_cast<double>(q) * (sd - 1.0 / p) - 1.0, -sd - 0.5);
}

}  // namespace

RateReport compare_to_theory(const SweepResult& result, const ExperimentConfig& cfg) {
  RateReport rep;
  rep.fit = fit_slope(result.stats);
  rep.tol = cfg.theory_tol;

  std::vector<std::string> warnings;
  const FunctionSpec& fn = cfg.fn;
  const int q = cfg.est.q;

  auto moment_theory = [&]() {
    try {
      const RegimeReport rr = regime(fn.s, fn.p, q, fn.d);
      if (cfg.est.method == Method::CVMoment && rr.regime == Regime::RareEvent)
        warnings.push_back(
            "rare-event regime: truncated MC is the recommended estimator here");
      return rr.exponent;
    } catch (const std::invalid_argument&) {
      warnings.push_back(
          "standing assumptions (p > 2, q < p < 2q) not met; comparing against the raw "
          "branch formula");
      return moment_exponent_raw(fn.s, fn.p, q, fn.d);
    }
  };

  switch (cfg.est.method) {
    case Method::PlainMC:
      rep.theory = -0.5;
      if (fn.name == "peak" && 2.0 * q * fn.beta >= static_cast<double>(fn.d))
        warnings.push_back("plain MC has infinite q-th-power variance for this peak");
      break;
    case Method::TruncatedMC:
      if (fn.name == "peak")
        rep.theory = static_cast<double>(q) * fn.beta - 1.0;
      else
        rep.theory = moment_theory();
      break;
    case Method::CVMoment:
      rep.theory = (q == 1) ? integral_exponent(fn.s, fn.d, cfg.gamma) : moment_theory();
      break;
    case Method::KnnQuadratureDirect:
    case Method::KnnQuadratureWeights:
      rep.theory = integral_exponent(fn.s, fn.d, cfg.gamma);
      break;
  }

  std::ostringstream os;
  os.precision(6);
  if (rep.fit.below_floor) {
    rep.within = true;
    os << "error statistic at the measurement floor (exact estimator); no slope fitted";
  } else {
    rep.within = std::abs(rep.fit.slope - rep.theory) <= rep.tol;
    os << stat_name(cfg.stat) << " slope " << rep.fit.slope << " vs theory " << rep.theory
       << (rep.within ? ": within tol " : ": OUTSIDE tol ") << rep.tol;
  }
  for (const std::string& w : warnings) os << "; warning: " << w;
  rep.verdict = os.str();
  return rep;
}

}  // namespace cvquad
