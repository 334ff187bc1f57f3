#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include "cvquad/harness.hpp"

namespace cvquad {

inline constexpr int kSchemaVersion = 1;

// shortest text that round-trips a double, capped at 17 significant digits
std::string fmt17(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

// canonical key-sorted JSON of the experiment config; its FNV-1a hash is the
// config_hash embedded in every output row
std::string canonical_config_json(const ExperimentConfig& cfg);

// columns: schema_version,config_hash,base_seed,n,stat,n_reps,stderr,n_failed
void write_sweep_csv(std::ostream& os, const SweepResult& res, std::string_view config_hash,
                     std::uint64_t base_seed);
// one JSON object per replication
void write_rep_jsonl(std::ostream& os, const SweepResult& res, std::string_view config_hash,
                     std::uint64_t base_seed);
void write_rate_report_json(std::ostream& os, const SweepResult& res, const RateReport& report,
                            const ExperimentConfig& cfg, std::string_view config_hash);
// log-log scatter with the fitted and theoretical slopes; no timestamps, so
// reruns are byte-identical
void write_rate_svg(std::ostream& os, const SweepResult& res, const RateReport& report,
                    const std::string& title);

// --out flag beats CVQUAD_OUT_DIR beats the config value beats "."
std::string resolve_out_dir(const std::string& cli_out, const std::string& config_out);

ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace cvquad
