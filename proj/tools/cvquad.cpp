// Command-line surface: estimate | sweep | theory | lab | plot.
// Exit codes: 0 success, 1 check failure, 2 usage/config error, 3 estimator error.
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cvquad/harness.hpp"
#include "cvquad/io.hpp"
#include "cvquad/knorm.hpp"
#include "cvquad/lab.hpp"
#include "cvquad/parallel.hpp"
#include "cvquad/rate_theory.hpp"

namespace {

using cvquad::ExperimentConfig;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEstimator = 3;

struct CliKeys {  // config keys consumed by the CLI rather than the harness
  std::size_t n = 4096;
  std::size_t trials = 100000;
  std::string out_dir;
  std::string label = "sweep";
};

CliKeys cli_keys_from_json(const std::string& path) {
  CliKeys keys;
  std::ifstream in(path);
  if (!in) return keys;
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (...) {
    return keys;  // parse problems are reported by load_config_file
  }
  if (root.contains("n")) keys.n = root["n"].get<std::size_t>();
  if (root.contains("trials")) keys.trials = root["trials"].get<std::size_t>();
  if (root.contains("out_dir")) keys.out_dir = root["out_dir"].get<std::string>();
  if (root.contains("label")) keys.label = root["label"].get<std::string>();
  return keys;
}

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out_dir;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config_path, "JSON config file");
  if (config_required) opt->required();
  cmd->add_option("--seed", c.seed, "override base_seed");
  cmd->add_option("--threads", c.threads, "worker threads (0 = machine default)");
  cmd->add_option("--out", c.out_dir, "output directory (beats CVQUAD_OUT_DIR)");
}

ExperimentConfig load_config(const Common& c) {
  ExperimentConfig cfg = cvquad::load_config_file(c.config_path);
  if (c.seed) cfg.base_seed = *c.seed;
  if (c.threads > 0) cfg.threads = c.threads;
  return cfg;
}

void warn_if_rare_event(const ExperimentConfig& cfg) {
  if (cfg.est.method != cvquad::Method::CVMoment) return;
  try {
    const cvquad::RegimeReport rep = cvquad::regime(cfg.fn.s, cfg.fn.p, cfg.est.q, cfg.fn.d);
    if (rep.regime == cvquad::Regime::RareEvent)
      std::cerr << "warning: (s, p, q, d) sits in the rare-event regime; truncated MC is "
                   "the recommended estimator there\n";
  } catch (const std::invalid_argument&) {
    // parameters outside the standing assumptions: nothing to classify
  }
}

int cmd_estimate(const Common& c) {
  ExperimentConfig cfg;
  CliKeys keys;
  try {
    cfg = load_config(c);
    keys = cli_keys_from_json(c.config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  warn_if_rare_event(cfg);
  cvquad::Estimate est;
  try {
    est = cvquad::estimate_once(cfg, keys.n, 0);
  } catch (const std::exception& e) {
    std::cerr << "estimator error: " << e.what() << "\n";
    return kExitEstimator;
  }
  const std::string hash =
      cvquad::hash_hex(cvquad::fnv1a64(cvquad::canonical_config_json(cfg)));
  std::cout << "{\"schema_version\":" << cvquad::kSchemaVersion << ",\"config_hash\":\""
            << hash << "\",\"base_seed\":" << cfg.base_seed << ",\"method\":\""
            << cvquad::method_name(est.method) << "\",\"n\":" << est.n << ",\"q\":" << est.q
            << ",\"value\":" << cvquad::fmt17(est.value);
  if (std::isfinite(est.truncation))
    std::cout << ",\"truncation\":" << cvquad::fmt17(est.truncation);
  if (est.k > 0) std::cout << ",\"k\":" << est.k;
  if (est.cells > 0) std::cout << ",\"cells\":" << est.cells;
  if (est.quad_resolution > 0) std::cout << ",\"quad_resolution\":" << est.quad_resolution;
  if (std::isfinite(est.integral_part))
    std::cout << ",\"integral_part\":" << cvquad::fmt17(est.integral_part)
              << ",\"correction_part\":" << cvquad::fmt17(est.correction_part);
  std::cout << "}\n";
  return kExitOk;
}

int cmd_sweep(const Common& c, bool plot) {
  ExperimentConfig cfg;
  CliKeys keys;
  try {
    cfg = load_config(c);
    keys = cli_keys_from_json(c.config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  warn_if_rare_event(cfg);

  cvquad::SweepResult res;
  cvquad::RateReport report;
  try {
    res = cvquad::run_sweep(cfg);
    report = cvquad::compare_to_theory(res, cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "estimator error: " << e.what() << "\n";
    return kExitEstimator;
  }

  const std::string canon = cvquad::canonical_config_json(cfg);
  const std::string hash = cvquad::hash_hex(cvquad::fnv1a64(canon));
  const std::string dir = cvquad::resolve_out_dir(c.out_dir, keys.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::cerr << "config error: cannot create output directory " << dir << "\n";
    return kExitUsage;
  }
  const std::string stem = dir + "/" + keys.label;

  auto write_file = [&](const std::string& path, auto&& writer) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    writer(os);
  };
  try {
    write_file(stem + "_sweep.csv",
               [&](std::ostream& os) { cvquad::write_sweep_csv(os, res, hash, cfg.base_seed); });
    write_file(stem + "_reps.jsonl",
               [&](std::ostream& os) { cvquad::write_rep_jsonl(os, res, hash, cfg.base_seed); });
    write_file(stem + "_report.json", [&](std::ostream& os) {
      cvquad::write_rate_report_json(os, res, report, cfg, hash);
    });
    if (plot)
      write_file(stem + "_plot.svg", [&](std::ostream& os) {
        cvquad::write_rate_svg(os, res, report,
                               keys.label + " (" + cvquad::method_name(cfg.est.method) + ")");
      });
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitEstimator;
  }

  std::cout << "reference " << cvquad::fmt17(res.reference) << "\n";
  for (const cvquad::NStat& s : res.stats)
    std::cout << "n " << s.n << "  " << cvquad::stat_name(cfg.stat) << " "
              << cvquad::fmt17(s.stat) << "  se " << cvquad::fmt17(s.se) << "  reps "
              << s.n_reps << "  failed " << s.n_failed << "\n";
  std::cout << report.verdict << "\n";
  std::cout << "wrote " << stem << "_sweep.csv\n";
  return report.within ? kExitOk : kExitCheckFailed;
}

int cmd_theory(double s, double p, int q, int d, double gamma) {
  try {
    const cvquad::RegimeReport rep = cvquad::regime(s, p, q, d);
    std::cout << "regime            " << cvquad::regime_name(rep.regime)
              << (rep.on_boundary ? " (on boundary)" : "") << "\n";
    std::cout << "thresholds        d/p=" << cvquad::fmt17(rep.thr_case1)
              << "  rate=" << cvquad::fmt17(rep.thr_rate)
              << "  algo=" << cvquad::fmt17(rep.thr_algo) << "\n";
    std::cout << "moment_exponent   " << cvquad::fmt17(rep.exponent) << "\n";
    std::cout << "integral_exponent " << cvquad::fmt17(cvquad::integral_exponent(s, d, gamma))
              << "  (gamma=" << cvquad::fmt17(gamma) << ")\n";
    std::cout << "recommended       " << cvquad::recommend_name(rep.recommended) << "\n";
    const double mu = cvquad::truncation_exponent(s, p, d);
    if (mu > 0.0)
      std::cout << "truncation        M = c*n^" << cvquad::fmt17(mu) << "\n";
    else
      std::cout << "truncation        none (s/d >= 1/p)\n";
    if (s > 0.0 && s < 1.0) {
      const std::size_t k = cvquad::optimal_k(4096, s, d, gamma);
      std::cout << "k schedule        k(4096) = " << k << "\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "theory error: " << e.what() << "\n";
    return kExitUsage;
  }
}

struct LabRow {
  std::string name;
  bool pass = false;
  std::string detail;
};

int cmd_lab(const Common& c, std::size_t trials, const std::string& constants_path) {
  std::uint64_t seed = c.seed ? *c.seed : 0;  // the lab default suite is seed 0
  std::size_t use_trials = trials;
  if (!c.config_path.empty()) {
    try {
      const ExperimentConfig cfg = load_config(c);
      if (c.seed) seed = *c.seed;
      else seed = cfg.base_seed;
      const CliKeys keys = cli_keys_from_json(c.config_path);
      if (trials == 0) use_trials = keys.trials;
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  if (use_trials == 0) use_trials = 100000;
  if (use_trials < 1000) {
    std::cerr << "config error: lab needs at least 1000 trials (got " << use_trials << ")\n";
    return kExitUsage;
  }
  const int threads = c.threads;

  std::vector<LabRow> rows;
  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    rows.push_back({name, pass, detail});
  };
  std::ostringstream ss;
  ss.precision(10);

  try {
    // hit probability stays under its n-free bound
    double worst = -1.0;
    for (std::size_t n : {1ull, 10ull, 100ull, 1000ull, 10000ull})
      worst = std::max(worst, cvquad::kl_bound_case1(n, 0.5).hit - cvquad::case1_hit_bound());
    ss.str("");
    ss << "max(hit - bound) = " << worst;
    add("case1_hit_bound", worst <= 0.0, ss.str());

    // closed-form KL and TV vs the reduced-observation simulation
    const std::size_t n1 = 64;
    const cvquad::Case1Kl closed = cvquad::kl_bound_case1(n1, 0.5);
    cvquad::RngStream rng(seed, 1);
    const cvquad::Case1KlSim sim = cvquad::empirical_kl_case1(n1, 0.5, use_trials, rng, threads);
    ss.str("");
    ss << "closed " << closed.kl << " sim " << sim.kl_hat << " se " << sim.kl_se;
    add("case1_kl_sim", std::abs(sim.kl_hat - closed.kl) <= 3.0 * sim.kl_se, ss.str());
    ss.str("");
    ss << "tv_hat " << sim.tv_hat << " bound " << closed.tv_bound;
    add("case1_tv_vs_pinsker", sim.tv_hat <= closed.tv_bound + 3.0 * sim.tv_se, ss.str());
    ss.str("");
    ss << "tv_bound^2 " << closed.tv_bound * closed.tv_bound << " kl/2 " << closed.kl / 2.0;
    add("pinsker_identity",
        closed.tv_bound * closed.tv_bound <= closed.kl / 2.0 + 1e-15, ss.str());

    // sign-pattern prior: the n-free tail bound and the simulated tails
    const cvquad::PriorSpec spec2 =
        cvquad::make_prior_spec(cvquad::PriorCase::CaseII, 64, 1, 1.0, 4.0);
    cvquad::RngStream rng2(seed, 2);
    const cvquad::HoeffdingCheck hc =
        cvquad::hoeffding_separation_check(spec2, use_trials, rng2, threads);
    ss.str("");
    ss << "exponent " << hc.exponent << " vs 50/27 = " << 50.0 / 27.0;
    add("hoeffding_constant", std::abs(hc.exponent - 50.0 / 27.0) <= 1e-10, ss.str());
    ss.str("");
    ss << "tail0 " << hc.tail0_hat << " bound " << hc.bound;
    add("hoeffding_tail_arm0", hc.tail0_hat <= hc.bound + 3.0 * hc.tail0_se, ss.str());
    ss.str("");
    ss << "tail1 " << hc.tail1_hat << " bound " << hc.bound;
    add("hoeffding_tail_arm1", hc.tail1_hat <= hc.bound + 3.0 * hc.tail1_se, ss.str());

    // per-cube separation vs the constant-chain bound and the q=3 oracle
    const cvquad::PriorSpec spec_sep =
        cvquad::make_prior_spec(cvquad::PriorCase::CaseII, 1, 1, 1.0, 4.0);
    cvquad::PriorSpec spec_m4 = spec_sep;
    spec_m4.m = 4;  // the worked example scale
    const cvquad::Case2Separation sep = cvquad::case2_separation(spec_m4, 3, 1e-10);
    ss.str("");
    ss << "delta' " << sep.delta_prime << " chain bound " << sep.lower_bound;
    add("case2_chain_bound", sep.delta_prime >= sep.lower_bound - 1e-12, ss.str());
    {
      const cvquad::TestFunction fj =
          cvquad::make_scaled_bump(spec_m4.m, 1, 1, cvquad::BumpCase::CaseII, 1.0, 4.0);
      const double int_f = cvquad::reference_moment(fj, 1, 1e-12);
      const double int_f3 = cvquad::reference_moment(fj, 3, 1e-12);
      const double oracle = 2.0 * (3.0 * spec_m4.big_m * spec_m4.big_m * int_f + int_f3);
      ss.str("");
      ss << "delta' " << sep.delta_prime << " binomial oracle " << oracle;
      add("case2_binomial_oracle",
          std::abs(sep.delta_prime - oracle) <= 1e-8 * (1.0 + std::abs(oracle)), ss.str());
    }

    // two-point prior separation against the closed-form moment of the bump
    {
      const cvquad::PriorSpec spec1 =
          cvquad::make_prior_spec(cvquad::PriorCase::CaseI, 1, 1, 1.0, 4.0);
      const cvquad::PriorPair pair = cvquad::prior_pair_summary(spec1, 3, 1e-14);
      const double m = static_cast<double>(spec1.m);
      const double norm_q = cvquad::k_lq_norm(3, 1);
      const double expect =
          std::pow(m, -3.0 * (spec1.s - 1.0 / spec1.p) - 1.0) * std::pow(norm_q, 3) / 2.0;
      ss.str("");
      ss << "delta " << pair.delta << " closed form " << expect;
      add("case1_delta",
          std::abs(pair.delta - expect) <= 1e-8 * (1.0 + std::abs(expect)), ss.str());
    }

    // norm scaling of the bumps: slope of log ||D^t f|| on log m is t - s
    for (int t = 0; t <= 2; ++t) {
      const cvquad::ScalingFit fit =
          cvquad::sobolev_scaling_check(1.0, 4.0, t, {2, 4, 8, 16});
      ss.str("");
      ss << "slope " << fit.slope << " target " << t - 1.0;
      add("sobolev_scaling_t" + std::to_string(t),
          std::abs(fit.slope - (static_cast<double>(t) - 1.0)) <= 0.05, ss.str());
    }

    // Gaussian-shift KL is exactly 1/2 for every (n, gamma)
    {
      double worst_kl = 0.0;
      for (std::size_t n : {4ull, 64ull, 4096ull})
        for (double g : {0.0, 0.25, 0.5})
          worst_kl = std::max(worst_kl, std::abs(cvquad::gaussian_shift_kl(n, g) - 0.5));
      ss.str("");
      ss << "max |kl - 1/2| = " << worst_kl;
      add("gaussian_shift_kl", worst_kl <= 1e-12, ss.str());
    }

    // pinned norm table vs a fresh quadrature run, and vs the constants file
    {
      double worst_norm = 0.0;
      for (int dd = 1; dd <= 2; ++dd)
        for (int qq = 1; qq <= 6; ++qq)
          worst_norm = std::max(worst_norm, std::abs(cvquad::k_lq_norm(qq, dd) -
                                                     cvquad::k_lq_norm_fresh(qq, dd, 1e-10)));
      ss.str("");
      ss << "max |table - fresh| = " << worst_norm;
      add("knorm_table_vs_fresh", worst_norm <= 1e-8, ss.str());

      std::string path = constants_path;
      if (path.empty() && std::filesystem::exists("data/k_norms.txt"))
        path = "data/k_norms.txt";
      if (!path.empty()) {
        const auto table = cvquad::k_norm_table();
        const auto file = cvquad::parse_constants_file(path);
        bool ok = file.size() == table.size();
        double worst_file = 0.0;
        for (std::size_t i = 0; ok && i < table.size(); ++i) {
          ok = file[i].name == table[i].name;
          if (ok) worst_file = std::max(worst_file, std::abs(file[i].value - table[i].value));
        }
        // the file holds fresh quadrature values; they may differ from the
        // pinned table at the adaptive-tolerance scale, far below any tamper
        ok = ok && worst_file <= 1e-9;
        ss.str("");
        ss << path << " max |file - table| = " << worst_file;
        add("knorm_constants_file", ok, ss.str());
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "lab error: " << e.what() << "\n";
    return kExitEstimator;
  }

  bool all = true;
  for (const LabRow& r : rows) {
    all = all && r.pass;
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name;
    for (std::size_t pad = r.name.size(); pad < 26; ++pad) std::cout << ' ';
    std::cout << r.detail << "\n";
  }
  std::cout << (all ? "lab: all checks passed" : "lab: CHECKS FAILED") << " (trials "
            << use_trials << ", seed " << seed << ")\n";
  return all ? kExitOk : kExitCheckFailed;
}

int cmd_plot(const std::string& report_path, const std::string& out_dir) {
  nlohmann::json root;
  {
    std::ifstream in(report_path);
    if (!in) {
      std::cerr << "config error: cannot open report " << report_path << "\n";
      return kExitUsage;
    }
    try {
      root = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
      std::cerr << "config error: report is not valid JSON: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  cvquad::SweepResult res;
  cvquad::RateReport report;
  std::string method;
  try {
    if (root.contains("config") && root["config"].is_object())
      method = root["config"].value("method", "");
    res.reference = root.value("reference", 0.0);
    for (const auto& s : root.at("stats")) {
      cvquad::NStat ns;
      ns.n = s.at("n").get<std::size_t>();
      ns.stat = s.at("stat").get<double>();
      ns.se = s.value("se", 0.0);
      ns.n_reps = s.value("n_reps", std::size_t{0});
      ns.n_failed = s.value("n_failed", std::size_t{0});
      res.stats.push_back(ns);
    }
    const auto& fit = root.at("fit");
    report.fit.slope = fit.value("slope", 0.0);
    report.fit.intercept = fit.value("intercept", 0.0);
    report.fit.r2 = fit.value("r2", 0.0);
    report.fit.below_floor = fit.value("below_floor", false);
    report.theory = root.value("theory", 0.0);
    report.tol = root.value("tol", 0.0);
    report.within = root.value("within", false);
    report.verdict = root.value("verdict", "");
  } catch (const std::exception& e) {
    std::cerr << "config error: report is missing fields: " << e.what() << "\n";
    return kExitUsage;
  }

  std::filesystem::path in_path(report_path);
  std::string stem = in_path.filename().string();
  const std::string suffix = "_report.json";
  if (stem.size() > suffix.size() && stem.substr(stem.size() - suffix.size()) == suffix)
    stem = stem.substr(0, stem.size() - suffix.size());
  else
    stem = in_path.stem().string();
  const std::string dir =
      cvquad::resolve_out_dir(out_dir, in_path.parent_path().string());
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string out_path = dir + "/" + stem + "_plot.svg";
  std::ofstream os(out_path, std::ios::binary);
  if (!os) {
    std::cerr << "output error: cannot write " << out_path << "\n";
    return kExitEstimator;
  }
  // reproduce the sweep-time title so the regenerated svg is byte-identical
  cvquad::write_rate_svg(os, res, report, method.empty() ? stem : stem + " (" + method + ")");
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo quadrature toolkit: moment/integral estimators, rate sweeps, "
               "minimax-rate tables and lower-bound construction checks"};
  app.require_subcommand(1);

  Common c_est, c_sweep, c_lab;
  bool plot_flag = false;
  std::size_t lab_trials = 0;
  std::string lab_constants;
  double th_s = 1.0, th_p = 4.0, th_gamma = 0.0;
  int th_q = 3, th_d = 1;
  std::string plot_report, plot_out;

  CLI::App* est = app.add_subcommand("estimate", "run one estimate from a config");
  add_common(est, c_est, /*config_required=*/true);

  CLI::App* sweep = app.add_subcommand("sweep", "replicate an estimator over an n-grid");
  add_common(sweep, c_sweep, /*config_required=*/true);
  sweep->add_flag("--plot", plot_flag, "also write an SVG log-log plot");

  CLI::App* theory = app.add_subcommand("theory", "print exponents and regime for (s,p,q,d)");
  theory->add_option("--s", th_s, "smoothness s")->required();
  theory->add_option("--p", th_p, "integrability p")->required();
  theory->add_option("--q", th_q, "moment order q")->required();
  theory->add_option("--d", th_d, "dimension d")->required();
  theory->add_option("--gamma", th_gamma, "noise exponent (default 0)");

  CLI::App* lab = app.add_subcommand("lab", "run the lower-bound construction checks");
  add_common(lab, c_lab, /*config_required=*/false);
  lab->add_option("--trials", lab_trials, "simulation trials (>= 1000)");
  lab->add_option("--constants", lab_constants, "k-norm constants file to verify");

  CLI::App* plot = app.add_subcommand("plot", "render the SVG for an existing report JSON");
  plot->add_option("--report", plot_report, "path to a *_report.json")->required();
  plot->add_option("--out", plot_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (est->parsed()) return cmd_estimate(c_est);
  if (sweep->parsed()) return cmd_sweep(c_sweep, plot_flag);
  if (theory->parsed()) return cmd_theory(th_s, th_p, th_q, th_d, th_gamma);
  if (lab->parsed()) return cmd_lab(c_lab, lab_trials, lab_constants);
  if (plot->parsed()) return cmd_plot(plot_report, plot_out);
  return kExitUsage;
}
