#pragma once

#include <string>
#include <vector>

namespace cvquad {

// ||K||_{L^q([-1/2,1/2]^d)} for q in 1..6, d in 1..2, pinned at quadrature
// tolerance 1e-10. tools/gen_constants regenerates data/k_norms.txt from the
// same quadrature; the lab suite cross-checks table, file and a fresh run.
double k_lq_norm(int q, int d);

// recompute by adaptive quadrature (independent of the pinned table)
double k_lq_norm_fresh(int q, int d, double tol);

// ||K||_inf = e^{-d}, exact
double k_sup_norm(int d);

struct NamedConstant {
  std::string name;
  double value;
};

std::vector<NamedConstant> k_norm_table();
std::vector<NamedConstant> parse_constants_file(const std::string& path);
void write_constants_file(const std::string& path, const std::vector<NamedConstant>& table);

}  // namespace cvquad
