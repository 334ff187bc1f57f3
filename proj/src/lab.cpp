#include "cvquad/lab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cvquad/knorm.hpp"
#include "cvquad/parallel.hpp"
#include "cvquad/quadrature.hpp"

namespace cvquad {

namespace {

void check_eps(double eps) {
  if (!(eps >= 0.0 && eps < 1.0))
    throw std::invalid_argument("two-point prior: eps must lie in [0,1)");
}

struct MeanAcc {
  double sum = 0.0, sumsq = 0.0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
  }
  void merge(const MeanAcc& o) {
    sum += o.sum;
    sumsq += o.sumsq;
  }
};

void finish(const MeanAcc& a, std::size_t trials, double& mean, double& se) {
  const double t = static_cast<double>(trials);
  mean = a.sum / t;
  const double var = std::max(0.0, a.sumsq / t - mean * mean);
  se = std::sqrt(var / t);
}

}  // namespace

Case1Kl kl_bound_case1(std::size_t n, double eps) {
  if (n < 1) throw std::invalid_argument("kl_bound_case1: n must be >= 1");
  check_eps(eps);
  const double md = 200.0 * static_cast<double>(n);
  Case1Kl out;
  out.hit = 1.0 - std::pow(1.0 - 1.0 / md, static_cast<double>(n));
  out.kl = eps == 0.0 ? 0.0 : eps * std::log((1.0 + eps) / (1.0 - eps)) * out.hit;
  out.tv_bound = std::sqrt(out.kl / 2.0);
  return out;
}

double case1_hit_bound() { return 1.0 - std::pow(2.0 * std::exp(1.0), -1.0 / 200.0); }

namespace {

// shared serial/parallel core: reduced observation of the two-point prior.
// A trial first resolves whether any design point hit the bump cube and then,
// if it did, which arm the mixture drew; everything else cancels in the ratio.
Case1KlSim kl_sim_impl(std::size_t n, double eps, std::size_t trials, RngStream& rng,
                       int threads, bool serial) {
  if (n < 1) throw std::invalid_argument("empirical_kl_case1: n must be >= 1");
  check_eps(eps);
  if (trials < 1000)
    throw std::invalid_argument("empirical_kl_case1: needs at least 1000 trials");

  const double hit = kl_bound_case1(n, eps).hit;
  const double log_ratio = eps == 0.0 ? 0.0 : std::log((1.0 + eps) / (1.0 - eps));
  // |1 - p1/p0|/2 conditional on the arm the hit revealed
  const double tv_plus = eps / (1.0 + eps);
  const double tv_minus = eps / (1.0 - eps);

  const std::uint64_t seed = rng.next_u64();
  const std::size_t chunks = chunk_count(trials);
  std::vector<MeanAcc> kl_parts(chunks), tv_parts(chunks);

  auto run_chunk = [&](std::size_t ci) {
    RngStream sub = derive_substream(seed, ci);
    const std::size_t begin = ci * kProbeChunk;
    const std::size_t end = std::min(trials, begin + kProbeChunk);
    MeanAcc kl, tv;
    for (std::size_t t = begin; t < end; ++t) {
      if (sub.next_uniform() >= hit) {
        kl.add(0.0);
        tv.add(0.0);
        continue;
      }
      const bool plus = sub.next_uniform() < (1.0 + eps) / 2.0;
      kl.add(plus ? log_ratio : -log_ratio);
      tv.add(plus ? tv_plus : tv_minus);
    }
    kl_parts[ci] = kl;
    tv_parts[ci] = tv;
  };

  if (serial) {
    for (std::size_t ci = 0; ci < chunks; ++ci) run_chunk(ci);
  } else {
    parallel_for(chunks, threads, run_chunk);
  }

  MeanAcc kl, tv;
  for (std::size_t ci = 0; ci < chunks; ++ci) {
    kl.merge(kl_parts[ci]);
    tv.merge(tv_parts[ci]);
  }
  Case1KlSim out;
  finish(kl, trials, out.kl_hat, out.kl_se);
  finish(tv, trials, out.tv_hat, out.tv_se);
  return out;
}

}  // namespace

Case1KlSim empirical_kl_case1(std::size_t n, double eps, std::size_t trials, RngStream& rng,
                              int threads) {
  return kl_sim_impl(n, eps, trials, rng, threads, /*serial=*/false);
}

Case1KlSim empirical_kl_case1_serial(std::size_t n, double eps, std::size_t trials,
                                     RngStream& rng) {
  return kl_sim_impl(n, eps, trials, rng, 0, /*serial=*/true);
}

namespace {

HoeffdingCheck hoeffding_impl(const PriorSpec& spec, std::size_t trials, RngStream& rng,
                              int threads, bool serial) {
  if (spec.prior_case != PriorCase::CaseII)
    throw std::invalid_argument("hoeffding_separation_check: needs a CaseII prior spec");
  if (trials < 1) throw std::invalid_argument("hoeffding_separation_check: trials must be >= 1");

  const std::size_t md = cube_count(spec.m, spec.d);
  const double mdd = static_cast<double>(md);
  HoeffdingCheck out;
  out.exponent = spec.lambda * spec.lambda * spec.kappa * spec.kappa * mdd / 2.0;
  out.bound = std::exp(-out.exponent);

  const double threshold = (1.0 - spec.lambda) * mdd * spec.kappa;
  const double p_minus = (1.0 + spec.kappa) / 2.0;  // tilt toward the arm's mean

  const std::uint64_t seed = rng.next_u64();
  // sign draws dominate the cost, so chunks are sized in sign draws
  const std::size_t trials_per_chunk = std::max<std::size_t>(1, kProbeChunk / (2 * md) + 1);
  const std::size_t chunks = (trials + trials_per_chunk - 1) / trials_per_chunk;
  std::vector<std::uint64_t> exceed0(chunks, 0), exceed1(chunks, 0);

  auto run_chunk = [&](std::size_t ci) {
    RngStream sub = derive_substream(seed, ci);
    const std::size_t begin = ci * trials_per_chunk;
    const std::size_t end = std::min(trials, begin + trials_per_chunk);
    std::uint64_t e0 = 0, e1 = 0;
    for (std::size_t t = begin; t < end; ++t) {
      long long s0 = 0, s1 = 0;
      for (std::size_t j = 0; j < md; ++j)
        s0 += (sub.next_uniform() < p_minus) ? -1 : +1;  // mean -kappa
      for (std::size_t j = 0; j < md; ++j)
        s1 += (sub.next_uniform() < p_minus) ? +1 : -1;  // mean +kappa
      if (static_cast<double>(s0) >= -threshold) ++e0;
      if (static_cast<double>(s1) <= threshold) ++e1;
    }
    exceed0[ci] = e0;
    exceed1[ci] = e1;
  };

  if (serial) {
    for (std::size_t ci = 0; ci < chunks; ++ci) run_chunk(ci);
  } else {
    parallel_for(chunks, threads, run_chunk);
  }

  std::uint64_t t0 = 0, t1 = 0;
  for (std::size_t ci = 0; ci < chunks; ++ci) {
    t0 += exceed0[ci];
    t1 += exceed1[ci];
  }
  const double tt = static_cast<double>(trials);
  out.tail0_hat = static_cast<double>(t0) / tt;
  out.tail1_hat = static_cast<double>(t1) / tt;
  out.tail0_se = std::sqrt(out.tail0_hat * (1.0 - out.tail0_hat) / tt);
  out.tail1_se = std::sqrt(out.tail1_hat * (1.0 - out.tail1_hat) / tt);
  return out;
}

}  // namespace

HoeffdingCheck hoeffding_separation_check(const PriorSpec& spec, std::size_t trials,
                                          RngStream& rng, int threads) {
  return hoeffding_impl(spec, trials, rng, threads, /*serial=*/false);
}

HoeffdingCheck hoeffding_separation_check_serial(const PriorSpec& spec, std::size_t trials,
                                                 RngStream& rng) {
  return hoeffding_impl(spec, trials, rng, 0, /*serial=*/true);
}

Case2Separation case2_separation(const PriorSpec& spec, int q, double tol) {
  if (spec.prior_case != PriorCase::CaseII)
    throw std::invalid_argument("case2_separation: needs a CaseII prior spec");
  if (q < 1) throw std::invalid_argument("case2_separation: q must be >= 1");

  const TestFunction fj =
      make_scaled_bump(spec.m, 1, spec.d, BumpCase::CaseII, spec.s, spec.p);
  std::vector<double> lo(static_cast<std::size_t>(spec.d), 0.0);
  std::vector<double> hi(static_cast<std::size_t>(spec.d), 1.0 / static_cast<double>(spec.m));
  const double big_m = spec.big_m;

  Case2Separation out;
  out.a = integrate_box([&](const double* x) { return ipow(big_m + fj.eval(x), q); },
                        lo.data(), hi.data(), spec.d, tol);
  out.b = integrate_box([&](const double* x) { return ipow(big_m - fj.eval(x), q); },
                        lo.data(), hi.data(), spec.d, tol);
  out.delta_prime = out.a - out.b;

  const double c0 = static_cast<double>(q) * std::pow(big_m, q - 1) *
                    std::pow(2.0, -(static_cast<double>(q) - 2.0));
  out.lower_bound = c0 *
                    std::pow(static_cast<double>(spec.m), -spec.s - static_cast<double>(spec.d)) *
                    k_lq_norm(1, spec.d);
  return out;
}

PriorPair prior_pair_summary(const PriorSpec& spec, int q, double tol) {
  PriorPair out;
  if (spec.prior_case == PriorCase::CaseI) {
    const TestFunction g1 =
        make_scaled_bump(spec.m, 1, spec.d, BumpCase::CaseI, spec.s, spec.p);
    const double iq = reference_moment(g1, q, tol);
    out.c = iq / 2.0;
    out.delta = iq / 2.0;
    out.beta0 = out.beta1 = (1.0 - spec.eps) / 2.0;
  } else {
    const Case2Separation sep = case2_separation(spec, q, tol);
    const double mdd = static_cast<double>(cube_count(spec.m, spec.d));
    out.c = mdd * (sep.a + sep.b) / 2.0;
    out.delta = (1.0 - spec.lambda) * spec.kappa * mdd * sep.delta_prime;
    const double expo = spec.lambda * spec.lambda * spec.kappa * spec.kappa * mdd / 2.0;
    out.beta0 = out.beta1 = std::exp(-expo);
  }
  return out;
}

ScalingFit sobolev_scaling_check(double s, double p, int t_order,
                                 const std::vector<std::size_t>& m_list) {
  if (t_order < 0 || t_order > 2)
    throw std::invalid_argument("sobolev_scaling_check: derivative order must be 0, 1 or 2");
  if (m_list.size() < 3)
    throw std::invalid_argument("sobolev_scaling_check: need at least 3 grid scales");
  if (!(p >= 1.0)) throw std::invalid_argument("sobolev_scaling_check: requires p >= 1");

  ScalingFit out;
  out.norms.reserve(m_list.size());
  std::vector<double> logs_m, logs_norm;

  for (std::size_t m : m_list) {
    if (m < 1) throw std::invalid_argument("sobolev_scaling_check: m must be >= 1");
    const TestFunction f = make_scaled_bump(m, 1, 1, BumpCase::CaseI, s, p);
    const double h = 1e-5 / static_cast<double>(m);
    const BoxFn integrand = [&](const double* x) {
      const double z = x[0];
      double der = 0.0;
      if (t_order == 0) {
        der = f.eval(&z);
      } else if (t_order == 1) {
        const double zp = z + h, zm = z - h;
        der = (f.eval(&zp) - f.eval(&zm)) / (2.0 * h);
      } else {
        const double zp = z + h, zm = z - h;
        der = (f.eval(&zp) - 2.0 * f.eval(&z) + f.eval(&zm)) / (h * h);
      }
      return std::pow(std::abs(der), p);
    };
    const double lo = 0.0, hi = 1.0 / static_cast<double>(m);
    const double val = simpson_fixed(integrand, &lo, &hi, 1, 4096);
    const double norm = std::pow(val, 1.0 / p);
    if (!std::isfinite(norm) || norm <= 0.0)
      throw std::runtime_error("sobolev_scaling_check: norm came out non-finite");
    out.norms.push_back(norm);
    logs_m.push_back(std::log(static_cast<double>(m)));
    logs_norm.push_back(std::log(norm));
  }

  const std::size_t k = m_list.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += logs_m[i];
    my += logs_norm[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = logs_m[i] - mx, dy = logs_norm[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  out.slope = sxy / sxx;
  out.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return out;
}

double gaussian_shift_kl(std::size_t n, double gamma) {
  if (n < 1) throw std::invalid_argument("gaussian_shift_kl: n must be >= 1");
  if (!(gamma >= 0.0) || std::isinf(gamma))
    throw std::invalid_argument("gaussian_shift_kl: gamma must be finite and >= 0");
  const double nn = static_cast<double>(n);
  const double shift = std::pow(nn, -gamma - 0.5);
  const double sigma2 = std::pow(nn, -2.0 * gamma);
  return nn * shift * shift / (2.0 * sigma2);
}

}  // namespace cvquad
