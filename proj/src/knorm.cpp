#include "cvquad/knorm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cvquad/quadrature.hpp"
#include "cvquad/testfn.hpp"

namespace cvquad {

namespace {

// pinned by tools/gen_constants at quadrature tolerance 1e-10 (see
// data/k_norms.txt for the exported copy)
constexpr double kNormD1[6] = {
    0.22199690808403971, 0.25795941623150170, 0.27711611494919014,
    0.28955871750968193, 0.29847398227110211, 0.30525664630507110,
};
constexpr double kNormD2[6] = {
    0.049282627198873580, 0.066543060422497136, 0.076793341164532777,
    0.083844250885851790, 0.089086718092770162, 0.093181620113419281,
};

void check_args(int q, int d) {
  if (q < 1 || q > 6) throw std::invalid_argument("k_lq_norm: q must be 1..6");
  if (d < 1 || d > 2) throw std::invalid_argument("k_lq_norm: d must be 1 or 2");
}

}  // namespace

double k_lq_norm(int q, int d) {
  check_args(q, d);
  return d == 1 ? kNormD1[q - 1] : kNormD2[q - 1];
}

double k_lq_norm_fresh(int q, int d, double tol) {
  check_args(q, d);
  auto kq = [&](const double* x) {
    return ipow(bump_base_eval(x, d, BumpProfile::K), q);
  };
  const double lo[2] = {-0.5, -0.5};
  const double hi[2] = {0.5, 0.5};
  const double integral = integrate_box(kq, lo, hi, d, tol);
  return std::pow(integral, 1.0 / static_cast<double>(q));
}

double k_sup_norm(int d) {
  if (d < 1 || d > 3) throw std::invalid_argument("k_sup_norm: d must be 1..3");
  return std::exp(-static_cast<double>(d));
}

std::vector<NamedConstant> k_norm_table() {
  std::vector<NamedConstant> table;
  for (int d = 1; d <= 2; ++d)
    for (int q = 1; q <= 6; ++q) {
      char name[32];
      std::snprintf(name, sizeof(name), "k_lq_norm_q%d_d%d", q, d);
      table.push_back({name, k_lq_norm(q, d)});
    }
  return table;
}

std::vector<NamedConstant> parse_constants_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open constants file: " + path);
  std::vector<NamedConstant> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("constants file line without '=': " + line);
    NamedConstant c;
    c.name = line.substr(0, eq);
    try {
      c.value = std::stod(line.substr(eq + 1));
    } catch (const std::exception&) {
      throw std::runtime_error("constants file value not a number: " + line);
    }
    out.push_back(std::move(c));
  }
  return out;
}

void write_constants_file(const std::string& path, const std::vector<NamedConstant>& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write constants file: " + path);
  for (const auto& c : table) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", c.value);
    out << c.name << '=' << buf << '\n';
  }
}

}  // namespace cvquad
