#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edge_split.hpp"
#include "model.hpp"
#include "unlearn.hpp"

namespace gnnd {

// Flat key=value sections, '#' comments:
//   [dataset]
//   kind = synthetic
//   spec = sbm(500,20,2000,0.9);features=community
struct IniFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static IniFile parse_file(const std::string& path);
    static IniFile parse_text(const std::string& text);
    std::optional<std::string> get(const std::string& section, const std::string& key) const;
};

struct DatasetConfig {
    std::string kind = "synthetic";  // synthetic | edge_list
    std::string spec = "two_cliques(20,1);features=identity";
    std::uint64_t gen_seed = 42;
    std::string path;  // edge_list inputs
    std::optional<std::string> features_path;
    std::optional<std::string> labels_path;
    std::size_t feature_dim_hint = 0;
};

struct DeletionTaskConfig {
    std::string task = "edges";  // edges | nodes | features
    double ratio = 0.025;
    Locality locality = Locality::In;
    std::int64_t node_count = 100;   // nodes/features tasks
    std::vector<NodeId> nodes;       // explicit list, overrides node_count
};

struct BaselineConfig {
    int grad_ascent_steps = 50;
    double grad_ascent_lr = 1e-3;
    int noisy_steps = 10;
    double noisy_sigma = 0.1;
    double noisy_lr = 1e-3;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    TrainConfig train;          // per-run seed overwritten by the pipeline
    UnlearnConfig unlearn_cfg;  // per-run seed overwritten by the pipeline
    DeletionTaskConfig deletion;
    BaselineConfig baselines;
    double test_frac = 0.05;
    double val_frac = 0.05;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::vector<std::string> methods{"gnndelete", "retrain", "grad_ascent", "noisy_finetune"};
    std::string out_dir = "runs/out";

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_ini(const IniFile& ini);
    void validate() const;       // referenced files must exist, seeds non-empty
    std::string canonical() const;  // normalized key=value dump
    std::string hash() const;       // fnv1a of canonical(), hex
};

}  // namespace gnnd
