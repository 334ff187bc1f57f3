#include "cvquad/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace cvquad {

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string json_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

// JSON numbers cannot carry inf; gamma = inf is serialized as the string "inf"
std::string json_real(double v) {
  if (std::isfinite(v)) return fmt17(v);
  return json_string(fmt17(v));
}

const char* m_schedule_name(MSchedule m) {
  switch (m) {
    case MSchedule::None: return "none";
    case MSchedule::Fixed: return "fixed";
    case MSchedule::Power: return "power";
    case MSchedule::Theta: return "theta";
  }
  return "?";
}

const char* k_schedule_name(KSchedule k) {
  return k == KSchedule::Fixed ? "fixed" : "optimal";
}

const char* cells_schedule_name(CellsSchedule c) {
  switch (c) {
    case CellsSchedule::Fixed: return "fixed";
    case CellsSchedule::Power: return "power";
    case CellsSchedule::Occupancy: return "occupancy";
  }
  return "?";
}

const char* fill_name(GridFill f) { return f == GridFill::Zero ? "zero" : "nearest_cell"; }

const char* reg_kind_name(RegressorKind k) { return k == RegressorKind::KNN ? "knn" : "grid"; }

const char* bump_case_name(BumpCase b) { return b == BumpCase::CaseI ? "case1" : "case2"; }

}  // namespace

std::string canonical_config_json(const ExperimentConfig& cfg) {
  // fixed alphabetical key order; exactly the fields that affect results
  std::ostringstream os;
  os << '{';
  os << "\"base_seed\":" << cfg.base_seed;
  os << ",\"beta\":" << fmt17(cfg.fn.beta);
  os << ",\"bump_case\":" << json_string(bump_case_name(cfg.fn.bump_case));
  os << ",\"bump_j\":" << cfg.fn.j;
  os << ",\"bump_m\":" << cfg.fn.m;
  os << ",\"cells_c\":" << fmt17(cfg.est.cells_c);
  os << ",\"cells_mode\":" << json_string(cells_schedule_name(cfg.est.cells_mode));
  os << ",\"cells_pow\":" << fmt17(cfg.est.cells_pow);
  os << ",\"const_c\":" << fmt17(cfg.fn.c);
  os << ",\"d\":" << cfg.fn.d;
  os << ",\"fill\":" << json_string(fill_name(cfg.est.fill));
  os << ",\"fn\":" << json_string(cfg.fn.name);
  os << ",\"gamma\":" << json_real(cfg.gamma);
  os << ",\"k\":" << cfg.est.k;
  os << ",\"k_mode\":" << json_string(k_schedule_name(cfg.est.k_mode));
  os << ",\"m_c\":" << fmt17(cfg.est.m_c);
  os << ",\"m_mode\":" << json_string(m_schedule_name(cfg.est.m_mode));
  os << ",\"m_pow\":" << fmt17(cfg.est.m_pow);
  os << ",\"method\":" << json_string(method_name(cfg.est.method));
  os << ",\"n_grid\":[";
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i)
    os << (i ? "," : "") << cfg.n_grid[i];
  os << "]";
  os << ",\"p\":" << fmt17(cfg.fn.p);
  os << ",\"probe_n\":" << cfg.est.probe_n;
  os << ",\"q\":" << cfg.est.q;
  os << ",\"quad_resolution\":" << cfg.est.quad_resolution;
  os << ",\"ref_tol\":" << fmt17(cfg.ref_tol);
  os << ",\"reference\":" << (cfg.reference ? fmt17(*cfg.reference) : "null");
  os << ",\"reg_k\":" << cfg.est.reg_k;
  os << ",\"reg_kind\":" << json_string(reg_kind_name(cfg.est.reg_kind));
  os << ",\"reps\":" << cfg.reps;
  os << ",\"s\":" << fmt17(cfg.fn.s);
  os << ",\"schema_version\":" << kSchemaVersion;
  os << ",\"stat\":" << json_string(stat_name(cfg.stat));
  os << ",\"theory_tol\":" << fmt17(cfg.theory_tol);
  os << ",\"x0\":[";
  for (std::size_t i = 0; i < cfg.fn.x0.size(); ++i)
    os << (i ? "," : "") << fmt17(cfg.fn.x0[i]);
  os << "]}";
  return os.str();
}

void write_sweep_csv(std::ostream& os, const SweepResult& res, std::string_view config_hash,
                     std::uint64_t base_seed) {
  os << "schema_version,config_hash,base_seed,n,stat,n_reps,stderr,n_failed\n";
  for (const NStat& s : res.stats)
    os << kSchemaVersion << ',' << config_hash << ',' << base_seed << ',' << s.n << ','
       << fmt17(s.stat) << ',' << s.n_reps << ',' << fmt17(s.se) << ',' << s.n_failed << '\n';
}

void write_rep_jsonl(std::ostream& os, const SweepResult& res, std::string_view config_hash,
                     std::uint64_t base_seed) {
  for (const RepRecord& r : res.reps) {
    os << "{\"schema_version\":" << kSchemaVersion << ",\"config_hash\":"
       << json_string(config_hash) << ",\"base_seed\":" << base_seed << ",\"n\":" << r.n
       << ",\"rep\":" << r.rep << ",\"estimate\":" << json_real(r.estimate)
       << ",\"error\":" << json_real(r.error)
       << ",\"failed\":" << (r.failed ? "true" : "false");
    if (r.failed) os << ",\"message\":" << json_string(r.message);
    os << "}\n";
  }
}

void write_rate_report_json(std::ostream& os, const SweepResult& res, const RateReport& report,
                            const ExperimentConfig& cfg, std::string_view config_hash) {
  os << "{\"schema_version\":" << kSchemaVersion
     << ",\"config_hash\":" << json_string(config_hash)
     << ",\"config\":" << canonical_config_json(cfg)
     << ",\"reference\":" << json_real(res.reference) << ",\"stats\":[";
  for (std::size_t i = 0; i < res.stats.size(); ++i) {
    const NStat& s = res.stats[i];
    os << (i ? "," : "") << "{\"n\":" << s.n << ",\"stat\":" << json_real(s.stat)
       << ",\"se\":" << json_real(s.se) << ",\"n_reps\":" << s.n_reps
       << ",\"n_failed\":" << s.n_failed << "}";
  }
  os << "],\"fit\":{\"slope\":" << json_real(report.fit.slope)
     << ",\"intercept\":" << json_real(report.fit.intercept)
     << ",\"r2\":" << json_real(report.fit.r2)
     << ",\"residual_max\":" << json_real(report.fit.residual_max)
     << ",\"below_floor\":" << (report.fit.below_floor ? "true" : "false") << "}"
     << ",\"theory\":" << json_real(report.theory) << ",\"tol\":" << json_real(report.tol)
     << ",\"within\":" << (report.within ? "true" : "false")
     << ",\"verdict\":" << json_string(report.verdict) << "}\n";
}

namespace {

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_rate_svg(std::ostream& os, const SweepResult& res, const RateReport& report,
                    const std::string& title) {
  const double width = 640.0, height = 480.0;
  const double left = 80.0, right = 620.0, top = 50.0, bottom = 420.0;

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"320\" y=\"28\" text-anchor=\"middle\" font-family=\"monospace\" "
        "font-size=\"14\">"
     << title << "</text>\n";

  std::vector<std::pair<double, double>> pts;  // (log10 n, log10 stat)
  for (const NStat& s : res.stats)
    if (std::isfinite(s.stat) && s.stat > 0.0)
      pts.push_back({std::log10(static_cast<double>(s.n)), std::log10(s.stat)});

  if (pts.size() < 2 || report.fit.below_floor) {
    os << "<text x=\"320\" y=\"240\" text-anchor=\"middle\" font-family=\"monospace\" "
          "font-size=\"12\">error statistic at the measurement floor; nothing to plot"
          "</text>\n</svg>\n";
    return;
  }

  const double ln10 = std::log(10.0);
  auto fit_y = [&](double lx) {
    return report.fit.intercept / ln10 + report.fit.slope * lx;  // log10 err at log10 n = lx
  };
  auto theory_y = [&](double lx) {  // theory slope anchored at the first point
    return pts.front().second + report.theory * (lx - pts.front().first);
  };

  double xmin = pts.front().first, xmax = pts.front().first;
  double ymin = pts.front().second, ymax = pts.front().second;
  for (const auto& p : pts) {
    xmin = std::min(xmin, p.first);
    xmax = std::max(xmax, p.first);
    ymin = std::min(ymin, p.second);
    ymax = std::max(ymax, p.second);
  }
  for (double lx : {xmin, xmax}) {
    ymin = std::min({ymin, fit_y(lx), theory_y(lx)});
    ymax = std::max({ymax, fit_y(lx), theory_y(lx)});
  }
  const double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin) + 1e-12;
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double lx) { return left + (lx - xmin) / (xmax - xmin) * (right - left); };
  auto py = [&](double ly) { return bottom - (ly - ymin) / (ymax - ymin) * (bottom - top); };

  os << "<rect x=\"" << svg_num(left) << "\" y=\"" << svg_num(top) << "\" width=\""
     << svg_num(right - left) << "\" height=\"" << svg_num(bottom - top)
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  // x ticks at the sweep sizes, y ticks at integer decades
  for (const NStat& s : res.stats) {
    const double lx = std::log10(static_cast<double>(s.n));
    os << "<line x1=\"" << svg_num(px(lx)) << "\" y1=\"" << svg_num(bottom) << "\" x2=\""
       << svg_num(px(lx)) << "\" y2=\"" << svg_num(bottom + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << svg_num(px(lx)) << "\" y=\"" << svg_num(bottom + 18)
       << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"10\">" << s.n
       << "</text>\n";
  }
  for (int dec = static_cast<int>(std::ceil(ymin)); dec <= static_cast<int>(std::floor(ymax));
       ++dec) {
    const double ly = static_cast<double>(dec);
    os << "<line x1=\"" << svg_num(left - 5) << "\" y1=\"" << svg_num(py(ly)) << "\" x2=\""
       << svg_num(left) << "\" y2=\"" << svg_num(py(ly)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << svg_num(left - 8) << "\" y=\"" << svg_num(py(ly) + 3)
       << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">1e" << dec
       << "</text>\n";
  }
  os << "<text x=\"" << svg_num((left + right) / 2) << "\" y=\"" << svg_num(height - 18)
     << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">n"
        "</text>\n";
  os << "<text x=\"18\" y=\"" << svg_num((top + bottom) / 2)
     << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" "
        "transform=\"rotate(-90 18 "
     << svg_num((top + bottom) / 2) << ")\">error</text>\n";

  // fitted line (solid) and theory line (dashed, anchored at the first point)
  os << "<line x1=\"" << svg_num(px(xmin)) << "\" y1=\"" << svg_num(py(fit_y(xmin)))
     << "\" x2=\"" << svg_num(px(xmax)) << "\" y2=\"" << svg_num(py(fit_y(xmax)))
     << "\" stroke=\"crimson\" stroke-width=\"1.5\"/>\n";
  os << "<line x1=\"" << svg_num(px(xmin)) << "\" y1=\"" << svg_num(py(theory_y(xmin)))
     << "\" x2=\"" << svg_num(px(xmax)) << "\" y2=\"" << svg_num(py(theory_y(xmax)))
     << "\" stroke=\"steelblue\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
  for (const auto& p : pts)
    os << "<circle cx=\"" << svg_num(px(p.first)) << "\" cy=\"" << svg_num(py(p.second))
       << "\" r=\"3\" fill=\"black\"/>\n";

  char legend[160];
  std::snprintf(legend, sizeof(legend), "fit slope %.3f   theory %.3f   %s",
                report.fit.slope, report.theory, report.within ? "within tol" : "OUTSIDE tol");
  os << "<text x=\"" << svg_num(left + 10) << "\" y=\"" << svg_num(top + 16)
     << "\" font-family=\"monospace\" font-size=\"11\">" << legend << "</text>\n";
  os << "</svg>\n";
}

std::string resolve_out_dir(const std::string& cli_out, const std::string& config_out) {
  if (!cli_out.empty()) return cli_out;
  if (const char* env = std::getenv("CVQUAD_OUT_DIR"); env != nullptr && env[0] != '\0')
    return env;
  if (!config_out.empty()) return config_out;
  return ".";
}

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& key, const std::string& why) {
  throw std::invalid_argument("config field '" + key + "': " + why);
}

double real_field(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    bad_field(key, "expected a number or \"inf\", got \"" + s + "\"");
  }
  bad_field(key, "expected a number");
}

std::size_t size_field(const json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    bad_field(key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

int int_field(const json& v, const std::string& key) {
  if (!v.is_number_integer()) bad_field(key, "expected an integer");
  return v.get<int>();
}

std::string str_field(const json& v, const std::string& key) {
  if (!v.is_string()) bad_field(key, "expected a string");
  return v.get<std::string>();
}

Method parse_method(const std::string& s) {
  if (s == "plain_mc") return Method::PlainMC;
  if (s == "truncated_mc") return Method::TruncatedMC;
  if (s == "cv_moment") return Method::CVMoment;
  if (s == "knn_quadrature") return Method::KnnQuadratureDirect;
  if (s == "knn_quadrature_weights") return Method::KnnQuadratureWeights;
  bad_field("method", "unknown method '" + s + "'");
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw std::invalid_argument("config must be a JSON object");

  static const char* known[] = {
      "schema_version", "fn", "d", "s", "p", "const_c", "beta", "x0", "bump_m", "bump_j",
      "bump_case", "method", "q", "m_mode", "m_c", "m_pow", "k_mode", "k", "reg_kind",
      "cells_mode", "cells_c", "cells_pow", "fill", "reg_k", "quad_resolution", "probe_n",
      "n_grid", "reps", "gamma", "base_seed", "stat", "reference", "ref_tol", "theory_tol",
      "threads", "n", "trials", "out_dir", "label"};
  for (const auto& [key, value] : root.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw std::invalid_argument("config field '" + key + "' is not recognised");
  }

  ExperimentConfig cfg;
  auto has = [&](const char* k) { return root.contains(k); };

  if (has("schema_version") && int_field(root["schema_version"], "schema_version") != kSchemaVersion)
    throw std::invalid_argument("config schema_version must be 1");

  if (has("fn")) cfg.fn.name = str_field(root["fn"], "fn");
  if (has("d")) cfg.fn.d = int_field(root["d"], "d");
  if (has("s")) cfg.fn.s = real_field(root["s"], "s");
  if (has("p")) cfg.fn.p = real_field(root["p"], "p");
  if (has("const_c")) cfg.fn.c = real_field(root["const_c"], "const_c");
  if (has("beta")) cfg.fn.beta = real_field(root["beta"], "beta");
  if (has("x0")) {
    if (!root["x0"].is_array()) bad_field("x0", "expected an array of reals");
    cfg.fn.x0.clear();
    for (const auto& v : root["x0"]) cfg.fn.x0.push_back(real_field(v, "x0"));
  }
  if (has("bump_m")) cfg.fn.m = size_field(root["bump_m"], "bump_m");
  if (has("bump_j")) cfg.fn.j = size_field(root["bump_j"], "bump_j");
  if (has("bump_case")) {
    const std::string s = str_field(root["bump_case"], "bump_case");
    if (s == "case1") cfg.fn.bump_case = BumpCase::CaseI;
    else if (s == "case2") cfg.fn.bump_case = BumpCase::CaseII;
    else bad_field("bump_case", "expected 'case1' or 'case2'");
  }

  if (has("method")) cfg.est.method = parse_method(str_field(root["method"], "method"));
  if (has("q")) cfg.est.q = int_field(root["q"], "q");
  if (has("m_mode")) {
    const std::string s = str_field(root["m_mode"], "m_mode");
    if (s == "none") cfg.est.m_mode = MSchedule::None;
    else if (s == "fixed") cfg.est.m_mode = MSchedule::Fixed;
    else if (s == "power") cfg.est.m_mode = MSchedule::Power;
    else if (s == "theta") cfg.est.m_mode = MSchedule::Theta;
    else bad_field("m_mode", "expected none|fixed|power|theta");
  }
  if (has("m_c")) cfg.est.m_c = real_field(root["m_c"], "m_c");
  if (has("m_pow")) cfg.est.m_pow = real_field(root["m_pow"], "m_pow");
  if (has("k_mode")) {
    const std::string s = str_field(root["k_mode"], "k_mode");
    if (s == "fixed") cfg.est.k_mode = KSchedule::Fixed;
    else if (s == "optimal") cfg.est.k_mode = KSchedule::Optimal;
    else bad_field("k_mode", "expected fixed|optimal");
  }
  if (has("k")) cfg.est.k = size_field(root["k"], "k");
  if (has("reg_kind")) {
    const std::string s = str_field(root["reg_kind"], "reg_kind");
    if (s == "grid") cfg.est.reg_kind = RegressorKind::Grid;
    else if (s == "knn") cfg.est.reg_kind = RegressorKind::KNN;
    else bad_field("reg_kind", "expected grid|knn");
  }
  if (has("cells_mode")) {
    const std::string s = str_field(root["cells_mode"], "cells_mode");
    if (s == "fixed") cfg.est.cells_mode = CellsSchedule::Fixed;
    else if (s == "power") cfg.est.cells_mode = CellsSchedule::Power;
    else if (s == "occupancy") cfg.est.cells_mode = CellsSchedule::Occupancy;
    else bad_field("cells_mode", "expected fixed|power|occupancy");
  }
  if (has("cells_c")) cfg.est.cells_c = real_field(root["cells_c"], "cells_c");
  if (has("cells_pow")) cfg.est.cells_pow = real_field(root["cells_pow"], "cells_pow");
  if (has("fill")) {
    const std::string s = str_field(root["fill"], "fill");
    if (s == "zero") cfg.est.fill = GridFill::Zero;
    else if (s == "nearest_cell") cfg.est.fill = GridFill::NearestCell;
    else bad_field("fill", "expected zero|nearest_cell");
  }
  if (has("reg_k")) cfg.est.reg_k = size_field(root["reg_k"], "reg_k");
  if (has("quad_resolution"))
    cfg.est.quad_resolution = size_field(root["quad_resolution"], "quad_resolution");
  if (has("probe_n")) cfg.est.probe_n = size_field(root["probe_n"], "probe_n");

  if (has("n_grid")) {
    if (!root["n_grid"].is_array()) bad_field("n_grid", "expected an array of sizes");
    cfg.n_grid.clear();
    for (const auto& v : root["n_grid"]) cfg.n_grid.push_back(size_field(v, "n_grid"));
  }
  if (has("reps")) cfg.reps = size_field(root["reps"], "reps");
  if (has("gamma")) cfg.gamma = real_field(root["gamma"], "gamma");
  if (has("base_seed")) cfg.base_seed = size_field(root["base_seed"], "base_seed");
  if (has("stat")) {
    const std::string s = str_field(root["stat"], "stat");
    if (s == "rmse") cfg.stat = Stat::RMSE;
    else if (s == "median_abs") cfg.stat = Stat::MedianAbs;
    else bad_field("stat", "expected rmse|median_abs");
  }
  if (has("reference") && !root["reference"].is_null())
    cfg.reference = real_field(root["reference"], "reference");
  if (has("ref_tol")) cfg.ref_tol = real_field(root["ref_tol"], "ref_tol");
  if (has("theory_tol")) cfg.theory_tol = real_field(root["theory_tol"], "theory_tol");
  if (has("threads")) cfg.threads = int_field(root["threads"], "threads");
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str());
}

}  // namespace cvquad
