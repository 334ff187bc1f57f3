// Times the OpenMP kernels against their serial reference implementations and
// checks that both produce bitwise-identical results.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#include "cvquad/harness.hpp"
#include "cvquad/lab.hpp"
#include "cvquad/parallel.hpp"
#include "cvquad/regress.hpp"
#include "cvquad/sampling.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool report(const char* name, double serial_ms, double parallel_ms, bool equal) {
  std::printf("%-28s serial %9.1f ms   parallel %9.1f ms   speedup %5.2fx   %s\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms,
              equal ? "bitwise-equal" : "MISMATCH");
  return equal;
}

}  // namespace

int main(int argc, char** argv) {
  int threads = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc)
      threads = std::atoi(argv[++i]);
  }
  std::printf("threads: %d (0 = runtime default, %d available)\n", threads,
              cvquad::hardware_threads());
  bool all_equal = true;

  {  // probe Monte Carlo cell volumes in d=2
    cvquad::RngStream rng(7, 1);
    cvquad::SampleSet s = cvquad::sample_uniform(2000, 2, rng);
    const cvquad::Regressor knn = [&] {
      cvquad::SampleSet obs = s;
      obs.ys.assign(obs.n, 1.0);
      return cvquad::fit_knn(obs, 16);
    }();
    const std::size_t probes = 2000000;

    cvquad::RngStream r1(7, 2), r2(7, 2);
    auto t0 = Clock::now();
    const cvquad::CellVolumes vs = cvquad::knn_cell_volumes_serial(knn, probes, &r1);
    const double t_serial = ms_since(t0);
    t0 = Clock::now();
    const cvquad::CellVolumes vp = cvquad::knn_cell_volumes(knn, probes, &r2, threads);
    const double t_par = ms_since(t0);
    bool equal = vs.volumes.size() == vp.volumes.size();
    for (std::size_t i = 0; equal && i < vs.volumes.size(); ++i)
      equal = vs.volumes[i] == vp.volumes[i] && vs.se[i] == vp.se[i];
    all_equal = report("knn_cell_volumes d=2", t_serial, t_par, equal) && all_equal;
  }

  {  // replication sweep, k-NN quadrature
    cvquad::ExperimentConfig cfg;
    cfg.fn.name = "sin2pi_plus2";
    cfg.est.method = cvquad::Method::KnnQuadratureDirect;
    cfg.est.q = 1;
    cfg.est.k = 1;
    cfg.n_grid = {256, 512, 1024, 2048, 4096};
    cfg.reps = 60;
    cfg.threads = threads;

    auto t0 = Clock::now();
    const cvquad::SweepResult rs = cvquad::run_sweep_serial(cfg);
    const double t_serial = ms_since(t0);
    t0 = Clock::now();
    const cvquad::SweepResult rp = cvquad::run_sweep(cfg);
    const double t_par = ms_since(t0);
    bool equal = rs.reps.size() == rp.reps.size() && rs.reference == rp.reference;
    for (std::size_t i = 0; equal && i < rs.reps.size(); ++i)
      equal = rs.reps[i].estimate == rp.reps[i].estimate && rs.reps[i].error == rp.reps[i].error;
    for (std::size_t i = 0; equal && i < rs.stats.size(); ++i)
      equal = rs.stats[i].stat == rp.stats[i].stat && rs.stats[i].se == rp.stats[i].se;
    all_equal = report("run_sweep knn quadrature", t_serial, t_par, equal) && all_equal;
  }

  {  // likelihood-ratio simulation
    const std::size_t trials = 4000000;
    cvquad::RngStream r1(7, 3), r2(7, 3);
    auto t0 = Clock::now();
    const cvquad::Case1KlSim ss = cvquad::empirical_kl_case1_serial(64, 0.5, trials, r1);
    const double t_serial = ms_since(t0);
    t0 = Clock::now();
    const cvquad::Case1KlSim sp = cvquad::empirical_kl_case1(64, 0.5, trials, r2, threads);
    const double t_par = ms_since(t0);
    const bool equal = ss.kl_hat == sp.kl_hat && ss.kl_se == sp.kl_se &&
                       ss.tv_hat == sp.tv_hat && ss.tv_se == sp.tv_se;
    all_equal = report("empirical_kl_case1", t_serial, t_par, equal) && all_equal;
  }

  {  // tilted-sign tail simulation
    const cvquad::PriorSpec spec =
        cvquad::make_prior_spec(cvquad::PriorCase::CaseII, 64, 1, 1.0, 4.0);
    const std::size_t trials = 20000;
    cvquad::RngStream r1(7, 4), r2(7, 4);
    auto t0 = Clock::now();
    const cvquad::HoeffdingCheck hs =
        cvquad::hoeffding_separation_check_serial(spec, trials, r1);
    const double t_serial = ms_since(t0);
    t0 = Clock::now();
    const cvquad::HoeffdingCheck hp =
        cvquad::hoeffding_separation_check(spec, trials, r2, threads);
    const double t_par = ms_since(t0);
    const bool equal = hs.tail0_hat == hp.tail0_hat && hs.tail1_hat == hp.tail1_hat;
    all_equal = report("hoeffding_separation", t_serial, t_par, equal) && all_equal;
  }

  if (!all_equal) {
    std::printf("FAILURE: a parallel kernel diverged from its serial reference\n");
    return 1;
  }
  return 0;
}
