// Regenerates data/k_norms.txt from adaptive quadrature and diffs the result
// against the table pinned in the library.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cvquad/knorm.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "data/k_norms.txt";

  std::vector<cvquad::NamedConstant> fresh;
  double worst = 0.0;
  for (int d = 1; d <= 2; ++d)
    for (int q = 1; q <= 6; ++q) {
      char name[32];
      std::snprintf(name, sizeof(name), "k_lq_norm_q%d_d%d", q, d);
      const double value = cvquad::k_lq_norm_fresh(q, d, 1e-10);
      const double pinned = cvquad::k_lq_norm(q, d);
      worst = std::max(worst, std::abs(value - pinned));
      std::printf("%s = %.17g (pinned %.17g, diff %.3g)\n", name, value, pinned,
                  value - pinned);
      fresh.push_back({name, value});
    }

  cvquad::write_constants_file(path, fresh);
  std::printf("wrote %s\n", path.c_str());
  if (worst > 1e-9) {
    std::printf("FAILURE: pinned table deviates from fresh quadrature by %.3g\n", worst);
    return 1;
  }
  return 0;
}
