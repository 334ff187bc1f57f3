#include "cvquad/testfn.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cvquad/quadrature.hpp"

namespace cvquad {

namespace {

constexpr double kTwoPi = 6.28318530717958647692528676656;

void check_dim(int d, const char* who) {
  if (d < 1 || d > 3) {
    std::ostringstream msg;
    msg << who << ": d must be 1..3, got " << d;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

double bump_base_eval(const double* x, int d, BumpProfile profile) {
  check_dim(d, "bump_base_eval");
  const double scale = (profile == BumpProfile::K) ? 2.0 : 1.0;
  double v = 1.0;
  for (int a = 0; a < d; ++a) {
    const double u = scale * x[a];
    if (!(std::abs(u) < 1.0)) return 0.0;
    v *= std::exp(-1.0 / (1.0 - u * u));
  }
  return v;
}

std::size_t cube_count(std::size_t m, int d) {
  check_dim(d, "cube_count");
  if (m == 0) throw std::invalid_argument("cube_count: m must be >= 1");
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) {
    if (total > std::numeric_limits<std::size_t>::max() / m)
      throw std::invalid_argument("cube_count: m^d overflows");
    total *= m;
  }
  return total;
}

void cube_center(std::size_t m, std::size_t j, int d, double* out) {
  const std::size_t total = cube_count(m, d);
  if (j < 1 || j > total) throw std::invalid_argument("cube_center: cube index out of range");
  std::size_t rem = j - 1;  // row-major, last axis fastest
  for (int a = d - 1; a >= 0; --a) {
    out[a] = (static_cast<double>(rem % m) + 0.5) / static_cast<double>(m);
    rem /= m;
  }
}

PriorSpec make_prior_spec(PriorCase c, std::size_t n, int d, double s, double p, double eps) {
  check_dim(d, "make_prior_spec");
  if (n < 1) throw std::invalid_argument("make_prior_spec: n must be >= 1");
  if (!(s > 0.0)) throw std::invalid_argument("make_prior_spec: s must be > 0");
  if (!(p > 0.0)) throw std::invalid_argument("make_prior_spec: p must be > 0");
  if (c == PriorCase::CaseI && !(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("make_prior_spec: eps must lie in (0,1)");

  PriorSpec spec;
  spec.prior_case = c;
  spec.n = n;
  spec.d = d;
  spec.s = s;
  spec.p = p;
  spec.eps = eps;

  // m = ceil((200 n)^{1/d}), nudged so floating pow can't miss an exact root
  const double target = 200.0 * static_cast<double>(n);
  auto md = [&](std::size_t m) {
    double v = 1.0;
    for (int a = 0; a < d; ++a) v *= static_cast<double>(m);
    return v;
  };
  std::size_t m = static_cast<std::size_t>(
      std::ceil(std::pow(target, 1.0 / static_cast<double>(d))));
  while (m > 1 && md(m - 1) >= target) --m;
  while (md(m) < target) ++m;
  spec.m = m;

  spec.alpha = std::exp(-static_cast<double>(d));
  spec.big_m = 3.0 * spec.alpha;
  spec.kappa = std::sqrt(2.0 / (3.0 * static_cast<double>(n))) / 3.0;
  spec.lambda = 0.5;
  return spec;
}

double TestFunction::eval(const double* x) const {
  switch (kind) {
    case FnKind::Constant:
      return c;
    case FnKind::Smooth:
      switch (profile) {
        case SmoothProfile::Sin2PiPlus2:
          return std::sin(kTwoPi * x[0]) + 2.0;
        case SmoothProfile::OnePlusBump: {
          double u[3];
          for (int a = 0; a < d; ++a) u[a] = 2.0 * x[a] - 1.0;
          return 1.0 + bump_base_eval(u, d, BumpProfile::K0);
        }
        case SmoothProfile::Linear: {
          double v = 0.0;
          for (int a = 0; a < d; ++a) v += x[a];
          return v / static_cast<double>(d);
        }
        case SmoothProfile::Tent:
          return 1.0 - 2.0 * std::abs(x[0] - 0.5);
      }
      return 0.0;
    case FnKind::BumpBase: {
      double u[3];
      for (int a = 0; a < d; ++a) u[a] = 2.0 * x[a] - 1.0;
      return bump_base_eval(u, d, BumpProfile::K0);
    }
    case FnKind::ScaledBump: {
      double ctr[3];
      cube_center(m, j, d, ctr);
      double u[3];
      for (int a = 0; a < d; ++a)
        u[a] = 2.0 * static_cast<double>(m) * (x[a] - ctr[a]);
      return amplitude * bump_base_eval(u, d, BumpProfile::K0);
    }
    case FnKind::PriorSample: {
      if (signs.empty()) {  // two-point prior: zero function or the single bump
        if (case1_v == 0) return 0.0;
        double ctr[3];
        cube_center(m, 1, d, ctr);
        double u[3];
        for (int a = 0; a < d; ++a)
          u[a] = 2.0 * static_cast<double>(m) * (x[a] - ctr[a]);
        return amplitude * bump_base_eval(u, d, BumpProfile::K0);
      }
      // sign-pattern prior: every x sits in exactly one cube's bump
      std::size_t flat = 0;
      double u[3];
      for (int a = 0; a < d; ++a) {
        std::size_t idx = static_cast<std::size_t>(x[a] * static_cast<double>(m));
        if (idx >= m) idx = m - 1;
        flat = flat * m + idx;
        const double ctr = (static_cast<double>(idx) + 0.5) / static_cast<double>(m);
        u[a] = 2.0 * static_cast<double>(m) * (x[a] - ctr);
      }
      return level + static_cast<double>(signs[flat]) * amplitude *
                         bump_base_eval(u, d, BumpProfile::K0);
    }
    case FnKind::Peak: {
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) r2 += (x[a] - x0[a]) * (x[a] - x0[a]);
      return std::pow(std::sqrt(r2), -beta);
    }
  }
  return 0.0;
}

TestFunction make_constant(double value, int d) {
  check_dim(d, "make_constant");
  TestFunction f;
  f.kind = FnKind::Constant;
  f.d = d;
  f.c = value;
  return f;
}

TestFunction make_smooth(SmoothProfile profile, int d, double s, double p) {
  check_dim(d, "make_smooth");
  if ((profile == SmoothProfile::Sin2PiPlus2 || profile == SmoothProfile::Tent) && d != 1)
    throw std::invalid_argument("make_smooth: this profile is 1-d only");
  TestFunction f;
  f.kind = FnKind::Smooth;
  f.profile = profile;
  f.d = d;
  f.s = s;
  f.p = p;
  return f;
}

TestFunction make_bump_base(int d) {
  check_dim(d, "make_bump_base");
  TestFunction f;
  f.kind = FnKind::BumpBase;
  f.d = d;
  return f;
}

TestFunction make_scaled_bump(std::size_t m, std::size_t j, int d, BumpCase amp_case,
                              double s, double p) {
  check_dim(d, "make_scaled_bump");
  if (!(s > 0.0) || !(p > 0.0))
    throw std::invalid_argument("make_scaled_bump: s and p must be > 0");
  const std::size_t total = cube_count(m, d);
  if (j < 1 || j > total)
    throw std::invalid_argument("make_scaled_bump: cube index out of range");
  TestFunction f;
  f.kind = FnKind::ScaledBump;
  f.d = d;
  f.s = s;
  f.p = p;
  f.m = m;
  f.j = j;
  const double dm = static_cast<double>(m);
  f.amplitude = (amp_case == BumpCase::CaseI)
                    ? std::pow(dm, -s + static_cast<double>(d) / p)
                    : std::pow(dm, -s);
  return f;
}

TestFunction make_prior_sample(const PriorSpec& spec, int arm, RngStream& rng) {
  if (arm != 0 && arm != 1) throw std::invalid_argument("make_prior_sample: arm must be 0 or 1");
  TestFunction f;
  f.kind = FnKind::PriorSample;
  f.d = spec.d;
  f.s = spec.s;
  f.p = spec.p;
  f.m = spec.m;
  const double dm = static_cast<double>(spec.m);
  if (spec.prior_case == PriorCase::CaseI) {
    // P(zero function) = (1+eps)/2 under arm 0, (1-eps)/2 under arm 1
    const double p0 = (arm == 0) ? 0.5 * (1.0 + spec.eps) : 0.5 * (1.0 - spec.eps);
    f.case1_v = (rng.next_uniform() < p0) ? 0 : 1;
    f.j = 1;
    f.amplitude = std::pow(dm, -spec.s + static_cast<double>(spec.d) / spec.p);
  } else {
    // P(eta_j = -1) = (1+kappa)/2 under arm 0, (1-kappa)/2 under arm 1
    const double pminus = (arm == 0) ? 0.5 * (1.0 + spec.kappa) : 0.5 * (1.0 - spec.kappa);
    const std::size_t total = cube_count(spec.m, spec.d);
    f.signs.resize(total);
    for (std::size_t i = 0; i < total; ++i)
      f.signs[i] = (rng.next_uniform() < pminus) ? -1 : 1;
    f.level = spec.big_m;
    f.amplitude = std::pow(dm, -spec.s);
  }
  return f;
}

TestFunction make_peak(double beta, const std::vector<double>& x0, int d, int q,
                       double p, double s) {
  check_dim(d, "make_peak");
  if (q < 1) throw std::invalid_argument("make_peak: q must be >= 1");
  if (!(p > 0.0)) throw std::invalid_argument("make_peak: p must be > 0");
  if (!(s >= 0.0)) throw std::invalid_argument("make_peak: s must be >= 0");
  if (x0.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("make_peak: x0 must have d components");
  for (double v : x0)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("make_peak: x0 must lie in [0,1]^d");

  const double dd = static_cast<double>(d);
  const double lo = dd / (2.0 * q);
  const double hi = std::min(dd / q, dd / p - s);
  std::ostringstream msg;
  if (!(lo < hi)) {
    msg << "make_peak: empty exponent window [" << lo << ", " << hi
        << "): requires s < d(2q-p)/(2pq)";
    throw std::invalid_argument(msg.str());
  }
  if (!(beta >= lo && beta < hi)) {
    msg << "make_peak: beta = " << beta << " outside [" << lo << ", " << hi
        << ") = [d/(2q), min(d/q, d/p - s))";
    throw std::invalid_argument(msg.str());
  }

  TestFunction f;
  f.kind = FnKind::Peak;
  f.d = d;
  f.s = s;
  f.p = p;
  f.beta = beta;
  f.x0 = x0;
  return f;
}

double reference_moment(const TestFunction& f, int q, double tol) {
  if (q < 1) throw std::invalid_argument("reference_moment: q must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("reference_moment: tol must be > 0");

  auto fq = [&](const double* x) { return ipow(f.eval(x), q); };

  switch (f.kind) {
    case FnKind::Constant:
      return ipow(f.c, q);
    case FnKind::Peak: {
      if (f.d == 1) {
        // int_0^1 |x - x0|^{-beta q} dx, exact
        const double e = 1.0 - f.beta * static_cast<double>(q);
        const double a = f.x0[0];
        return (std::pow(a, e) + std::pow(1.0 - a, e)) / e;
      }
      break;  // d >= 2 falls through to the generic route
    }
    case FnKind::ScaledBump: {
      double ctr[3], lo[3], hi[3];
      cube_center(f.m, f.j, f.d, ctr);
      const double half = 0.5 / static_cast<double>(f.m);
      for (int a = 0; a < f.d; ++a) {
        lo[a] = ctr[a] - half;
        hi[a] = ctr[a] + half;
      }
      return integrate_box(fq, lo, hi, f.d, tol);
    }
    case FnKind::PriorSample: {
      if (f.signs.empty()) {
        if (f.case1_v == 0) return 0.0;
        double ctr[3], lo[3], hi[3];
        cube_center(f.m, 1, f.d, ctr);
        const double half = 0.5 / static_cast<double>(f.m);
        for (int a = 0; a < f.d; ++a) {
          lo[a] = ctr[a] - half;
          hi[a] = ctr[a] + half;
        }
        return integrate_box(fq, lo, hi, f.d, tol);
      }
      const std::size_t total = cube_count(f.m, f.d);
      const double cube_tol = tol / static_cast<double>(total);
      double sum = 0.0;
      for (std::size_t jj = 1; jj <= total; ++jj) {
        double ctr[3], lo[3], hi[3];
        cube_center(f.m, jj, f.d, ctr);
        const double half = 0.5 / static_cast<double>(f.m);
        for (int a = 0; a < f.d; ++a) {
          lo[a] = ctr[a] - half;
          hi[a] = ctr[a] + half;
        }
        sum += integrate_box(fq, lo, hi, f.d, cube_tol);
      }
      return sum;
    }
    default:
      break;
  }

  const double lo[3] = {0.0, 0.0, 0.0};
  const double hi[3] = {1.0, 1.0, 1.0};
  return integrate_box(fq, lo, hi, f.d, tol);
}

}  // namespace cvquad
