#pragma once

#include "config.hpp"
#include "metrics.hpp"

namespace gnnd {

struct MethodReport {
    std::string method;
    std::uint64_t seed = 0;
    EvalReport report;
};

struct RunRecord {
    std::string config_hash;
    std::string created_at;
    std::vector<MethodReport> reports;

    std::string to_json() const;
    static RunRecord from_json(const std::string& text);
};

// Full protocol per seed: load/generate -> split -> train base -> sample the
// deletion -> run the requested methods -> evaluate -> persist under
// cfg.out_dir (results.json, report.txt, per-seed checkpoints and splits).
// Refuses to overwrite results for the same config hash unless force.
RunRecord run_pipeline(const ExperimentConfig& cfg, bool force);

// mean +/- standard error per method/metric across seeds.
std::string report_table(const RunRecord& record);

// --- stage entry points used by the CLI subcommands ---

Graph load_dataset(const ExperimentConfig& cfg);
// Train + persist base checkpoint and splits for one seed; returns out paths.
void stage_train(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& out_dir);
void stage_unlearn(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& out_dir);
std::string stage_eval(const ExperimentConfig& cfg, std::uint64_t seed,
                       const std::string& out_dir);  // returns report JSON text

}  // namespace gnnd
