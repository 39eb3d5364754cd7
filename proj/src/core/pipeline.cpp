#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "checkpoint.hpp"
#include "synthetic.hpp"

namespace gnnd {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc;
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << text;
}

// What one seed's deletion request looks like after sampling.
struct DeletionPlan {
    EdgeSplit split;       // deleted/remaining filled in; val/test filtered for node tasks
    NodeSet nodes;         // nodes/features tasks
    EdgeList objective_edges;  // edges driving the unlearning objective
    bool structural = true;    // false for the feature-update task
};

EdgeList incident_train_edges(const EdgeSplit& split, const NodeSet& nodes) {
    EdgeList out;
    for (const Edge& e : split.train) {
        if (nodes.contains(e.u) || nodes.contains(e.v)) out.push_back(e);
    }
    return out;
}

EdgeList drop_incident(const EdgeList& edges, const NodeSet& nodes) {
    EdgeList out;
    for (const Edge& e : edges) {
        if (!nodes.contains(e.u) && !nodes.contains(e.v)) out.push_back(e);
    }
    return out;
}

NodeSet pick_nodes(const ExperimentConfig& cfg, const Graph& g, std::uint64_t seed) {
    if (!cfg.deletion.nodes.empty()) return NodeSet(cfg.deletion.nodes);
    if (cfg.deletion.node_count <= 0 || cfg.deletion.node_count > g.num_nodes()) {
        throw ConfigError("deletion.node_count out of range");
    }
    std::vector<NodeId> all(std::size_t(g.num_nodes()));
    for (NodeId u = 0; u < g.num_nodes(); ++u) all[std::size_t(u)] = u;
    Rng rng(derive_seed(seed, 0x90de));
    for (std::int64_t i = 0; i < cfg.deletion.node_count; ++i) {
        const std::size_t j = std::size_t(i) + std::size_t(rng.below(all.size() - std::size_t(i)));
        std::swap(all[std::size_t(i)], all[j]);
    }
    all.resize(std::size_t(cfg.deletion.node_count));
    return NodeSet(std::move(all));
}

DeletionPlan plan_deletion(const ExperimentConfig& cfg, const Graph& g, const EdgeSplit& split,
                           std::uint64_t seed) {
    DeletionPlan plan;
    if (cfg.deletion.task == "edges") {
        plan.split = sample_deletion(g, split, cfg.deletion.ratio, cfg.deletion.locality,
                                     derive_seed(seed, 0xde1e));
        plan.objective_edges = plan.split.deleted;
        return plan;
    }
    plan.nodes = pick_nodes(cfg, g, seed);
    plan.split = split;
    if (cfg.deletion.task == "nodes") {
        plan.split.validation = drop_incident(split.validation, plan.nodes);
        plan.split.test = drop_incident(split.test, plan.nodes);
        plan.split.deleted = incident_train_edges(split, plan.nodes);
        plan.split.remaining = edge_difference(plan.split.train, plan.split.deleted);
        plan.objective_edges = plan.split.deleted;
    } else {  // features: edges stay, objective runs on the incident edges
        plan.objective_edges = incident_train_edges(split, plan.nodes);
        plan.structural = false;
    }
    plan.split.validate();
    return plan;
}

struct EvalInputs {
    const Graph* g_full = nullptr;
    const EdgeSplit* split = nullptr;
    const NodeEmbeddings* base_emb = nullptr;  // base model on its training graph
    const EdgeList* objective_edges = nullptr;
    bool structural = true;
    std::uint64_t seed = 0;
    const std::vector<std::int32_t>* labels = nullptr;
    const Tensor* cls_head = nullptr;
};

EvalReport evaluate(const EvalInputs& in, const NodeEmbeddings& serving, bool is_base,
                    double wall_seconds, std::int64_t delop_params) {
    EvalReport r;
    r.wall_time_seconds = wall_seconds;
    r.delop_params = delop_params;

    if (!in.split->test.empty()) {
        const EdgeList negs = negative_sample(*in.g_full, in.split->test.size(), {},
                                              derive_seed(in.seed, 0xe7));
        std::vector<double> scores = decode_edges(serving, in.split->test);
        std::vector<int> labels(scores.size(), 1);
        const std::vector<double> neg_scores = decode_edges(serving, negs);
        scores.insert(scores.end(), neg_scores.begin(), neg_scores.end());
        labels.insert(labels.end(), neg_scores.size(), 0);
        r.auroc_test = auroc(scores, labels);
        r.auprc_test = auprc(scores, labels);
    }

    if (in.structural && !in.split->deleted.empty()) {
        const auto [roc, prc] = eval_deleted(serving, in.split->remaining, in.split->deleted,
                                             derive_seed(in.seed, 0xed));
        r.auroc_deleted = roc;
        r.auprc_deleted = prc;
        if (!is_base) r.mi_ratio = mi_ratio(*in.base_emb, serving, in.split->deleted);
    }

    if (in.labels && in.cls_head && in.cls_head->defined()) {
        const Matrix scores = matmul(serving.final().detached(), in.cls_head->detached()).to_matrix();
        std::vector<std::int32_t> preds, truth;
        for (std::size_t u = 0; u < in.labels->size(); ++u) {
            if ((*in.labels)[u] < 0) continue;
            std::size_t best = 0;
            for (std::size_t c = 1; c < scores.cols; ++c) {
                if (scores.at(u, c) > scores.at(u, best)) best = c;
            }
            preds.push_back(std::int32_t(best));
            truth.push_back((*in.labels)[u]);
        }
        if (!preds.empty()) {
            const auto [acc, f1] = node_scores(preds, truth);
            r.node_accuracy = acc;
            r.node_f1 = f1;
        }
    }
    return r;
}

std::string seed_dir(const std::string& out_dir, std::uint64_t seed) {
    return out_dir + "/seed_" + std::to_string(seed);
}

}  // namespace

Graph load_dataset(const ExperimentConfig& cfg) {
    if (cfg.dataset.kind == "synthetic") {
        return generate_synthetic(cfg.dataset.spec, cfg.dataset.gen_seed);
    }
    return load_graph(cfg.dataset.path, cfg.dataset.features_path, cfg.dataset.labels_path,
                      cfg.dataset.feature_dim_hint);
}

RunRecord run_pipeline(const ExperimentConfig& cfg, bool force) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    const std::string results_path = cfg.out_dir + "/results.json";
    if (fs::exists(results_path)) {
        const RunRecord previous = RunRecord::from_json(read_file(results_path));
        if (previous.config_hash == cfg.hash() && !force) {
            throw ConfigError("results for config hash " + cfg.hash() + " already exist in " +
                              cfg.out_dir + "; pass --force to rerun");
        }
    }

    const Graph g = load_dataset(cfg);
    RunRecord record;
    record.config_hash = cfg.hash();
    record.created_at = timestamp_utc();

    for (const std::uint64_t seed : cfg.seeds) {
        const std::string dir = seed_dir(cfg.out_dir, seed);
        fs::create_directories(dir);

        EdgeSplit split = split_edges(g, cfg.test_frac, cfg.val_frac, seed);
        DeletionPlan plan = plan_deletion(cfg, g, split, seed);

        TrainConfig tc = cfg.train;
        tc.seed = seed;
        auto t0 = std::chrono::steady_clock::now();
        GnnModel base = train_base(g, plan.split, tc);
        const double base_seconds = seconds_since(t0);

        const Graph g_train = training_graph(g, plan.split);
        const NodeEmbeddings base_emb = forward(g_train, base);
        if (g.labels()) {
            base.cls_head = fit_cls_head(base_emb, *g.labels(), derive_seed(seed, 0xc1a));
        }
        save_model(base, dir + "/base.ckpt");
        save_split(plan.split, dir + "/splits.tsv");

        EvalInputs inputs;
        inputs.g_full = &g;
        inputs.split = &plan.split;
        inputs.base_emb = &base_emb;
        inputs.objective_edges = &plan.objective_edges;
        inputs.structural = plan.structural;
        inputs.seed = seed;
        if (g.labels()) inputs.labels = &*g.labels();
        if (base.has_cls_head()) inputs.cls_head = &base.cls_head;

        record.reports.push_back(
            {"base", seed, evaluate(inputs, base_emb, true, base_seconds, 0)});

        // serving graph after the deletion request, shared by the weight-level
        // baselines
        Graph g_post = plan.structural ? delete_edges(g_train, plan.split.deleted) : g_train;
        if (!plan.structural) {
            Matrix feats = g_train.features();
            for (NodeId u : plan.nodes.ids) {
                for (std::size_t c = 0; c < feats.cols; ++c) feats.at(std::size_t(u), c) = 0.0;
            }
            g_post = g_train.with_features(std::move(feats));
        }

        for (const std::string& method : cfg.methods) {
            t0 = std::chrono::steady_clock::now();
            if (method == "gnndelete") {
                UnlearnConfig uc = cfg.unlearn_cfg;
                uc.random_pair_seed = derive_seed(seed, 0x9a17);
                UnlearnResult result;
                if (cfg.deletion.task == "features") {
                    result = unlearn_node_features(base, g_train, plan.nodes, uc);
                } else {
                    result = unlearn(base, g_train, plan.split.deleted, uc);
                }
                const double secs = seconds_since(t0);
                save_operator(result.op, dir + "/gnndelete.op.ckpt");
                const UnlearnedModel um{base, result.op, result.graph_r};
                record.reports.push_back(
                    {method, seed,
                     evaluate(inputs, unlearned_forward(um), false, secs,
                              result.op.param_count())});
            } else if (method == "retrain") {
                TrainConfig rc = cfg.train;
                rc.seed = derive_seed(seed, 0x2e7);
                Graph g_for_retrain = g;
                if (!plan.structural) {  // feature task retrains on the updated features
                    Matrix feats = g.features();
                    for (NodeId u : plan.nodes.ids) {
                        for (std::size_t c = 0; c < feats.cols; ++c) {
                            feats.at(std::size_t(u), c) = 0.0;
                        }
                    }
                    g_for_retrain = g.with_features(std::move(feats));
                }
                GnnModel model = baseline_retrain(g_for_retrain, plan.split, rc);
                const double secs = seconds_since(t0);
                EdgeSplit serve_split = plan.split;
                serve_split.train = plan.split.remaining;
                serve_split.deleted.clear();
                serve_split.remaining = serve_split.train;
                const Graph g_serve = training_graph(g_for_retrain, serve_split);
                NodeEmbeddings emb = forward(g_serve, model);
                if (g.labels()) {
                    model.cls_head = fit_cls_head(emb, *g.labels(), derive_seed(seed, 0xc1b));
                }
                save_model(model, dir + "/retrain.ckpt");
                EvalInputs ri = inputs;
                if (model.has_cls_head()) ri.cls_head = &model.cls_head;
                record.reports.push_back({method, seed, evaluate(ri, emb, false, secs, 0)});
            } else if (method == "grad_ascent") {
                GnnModel model =
                    baseline_grad_ascent(base, g_post, plan.objective_edges,
                                         cfg.baselines.grad_ascent_steps,
                                         cfg.baselines.grad_ascent_lr);
                const double secs = seconds_since(t0);
                save_model(model, dir + "/grad_ascent.ckpt");
                record.reports.push_back(
                    {method, seed, evaluate(inputs, forward(g_post, model), false, secs, 0)});
            } else if (method == "noisy_finetune") {
                GnnModel model = baseline_noisy_finetune(
                    base, g_post, plan.split, cfg.baselines.noisy_steps,
                    cfg.baselines.noisy_sigma, cfg.baselines.noisy_lr, derive_seed(seed, 0xd2d));
                const double secs = seconds_since(t0);
                save_model(model, dir + "/noisy_finetune.ckpt");
                record.reports.push_back(
                    {method, seed, evaluate(inputs, forward(g_post, model), false, secs, 0)});
            } else {
                throw ConfigError("unknown method: " + method);
            }
        }
    }

    write_file(results_path, record.to_json());
    write_file(cfg.out_dir + "/report.txt", report_table(record));
    return record;
}

std::string RunRecord::to_json() const {
    nlohmann::ordered_json j;
    j["config_hash"] = config_hash;
    j["created_at"] = created_at;
    j["reports"] = nlohmann::ordered_json::array();
    for (const MethodReport& r : reports) {
        nlohmann::ordered_json item;
        item["method"] = r.method;
        item["seed"] = r.seed;
        item["report"] = nlohmann::ordered_json::parse(r.report.to_json());
        j["reports"].push_back(std::move(item));
    }
    return j.dump(2) + "\n";
}

RunRecord RunRecord::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    RunRecord rec;
    rec.config_hash = j.value("config_hash", "");
    rec.created_at = j.value("created_at", "");
    if (j.contains("reports")) {
        for (const auto& item : j["reports"]) {
            MethodReport r;
            r.method = item.value("method", "");
            r.seed = item.value("seed", std::uint64_t(0));
            r.report = EvalReport::from_json(item["report"].dump());
            rec.reports.push_back(std::move(r));
        }
    }
    return rec;
}

std::string report_table(const RunRecord& record) {
    std::vector<std::string> methods;
    for (const MethodReport& r : record.reports) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
            methods.push_back(r.method);
        }
    }
    struct Column {
        const char* name;
        std::optional<double> EvalReport::* field;
    };
    static const Column columns[] = {
        {"auroc_test", &EvalReport::auroc_test},
        {"auprc_test", &EvalReport::auprc_test},
        {"auroc_del", &EvalReport::auroc_deleted},
        {"auprc_del", &EvalReport::auprc_deleted},
        {"mi_ratio", &EvalReport::mi_ratio},
        {"node_acc", &EvalReport::node_accuracy},
        {"node_f1", &EvalReport::node_f1},
    };

    std::ostringstream out;
    out << "method           ";
    for (const Column& c : columns) out << " " << c.name << std::string(16 - std::string(c.name).size(), ' ');
    out << " time_s\n";

    for (const std::string& m : methods) {
        std::vector<const EvalReport*> rs;
        for (const MethodReport& r : record.reports) {
            if (r.method == m) rs.push_back(&r.report);
        }
        out << m << std::string(m.size() < 17 ? 17 - m.size() : 1, ' ');
        for (const Column& c : columns) {
            std::vector<double> vals;
            for (const EvalReport* r : rs) {
                if (r->*(c.field)) vals.push_back(*(r->*(c.field)));
            }
            if (vals.empty()) {
                out << " -" << std::string(15, ' ');
                continue;
            }
            double mean = 0.0;
            for (double v : vals) mean += v;
            mean /= double(vals.size());
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            const double stderr_ =
                vals.size() > 1 ? std::sqrt(var / double(vals.size() - 1)) /
                                      std::sqrt(double(vals.size()))
                                : 0.0;
            char buf[40];
            std::snprintf(buf, sizeof(buf), " %.3f +/- %.3f", mean, stderr_);
            out << buf << std::string(16 - std::min<std::size_t>(16, std::strlen(buf)), ' ');
        }
        double tmean = 0.0;
        for (const EvalReport* r : rs) tmean += r->wall_time_seconds;
        if (!rs.empty()) tmean /= double(rs.size());
        char buf[32];
        std::snprintf(buf, sizeof(buf), " %.2f\n", tmean);
        out << buf;
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// stage entry points
// ---------------------------------------------------------------------------

void stage_train(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& out_dir) {
    cfg.validate();
    const Graph g = load_dataset(cfg);
    const std::string dir = seed_dir(out_dir, seed);
    fs::create_directories(dir);

    const EdgeSplit split = split_edges(g, cfg.test_frac, cfg.val_frac, seed);
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    GnnModel base = train_base(g, split, tc);
    if (g.labels()) {
        const NodeEmbeddings emb = forward(training_graph(g, split), base);
        base.cls_head = fit_cls_head(emb, *g.labels(), derive_seed(seed, 0xc1a));
    }
    save_model(base, dir + "/base.ckpt");
    save_split(split, dir + "/splits.tsv");
}

void stage_unlearn(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& out_dir) {
    cfg.validate();
    const Graph g = load_dataset(cfg);
    const std::string dir = seed_dir(out_dir, seed);
    const GnnModel base = load_model(dir + "/base.ckpt");
    EdgeSplit split = load_split(dir + "/splits.tsv");
    split.deleted.clear();
    split.remaining = split.train;

    const DeletionPlan plan = plan_deletion(cfg, g, split, seed);
    const Graph g_train = training_graph(g, plan.split);

    UnlearnConfig uc = cfg.unlearn_cfg;
    uc.random_pair_seed = derive_seed(seed, 0x9a17);
    UnlearnResult result;
    if (cfg.deletion.task == "features") {
        result = unlearn_node_features(base, g_train, plan.nodes, uc);
    } else {
        result = unlearn(base, g_train, plan.split.deleted, uc);
    }
    save_operator(result.op, dir + "/gnndelete.op.ckpt");
    save_split(plan.split, dir + "/splits.tsv");

    nlohmann::ordered_json losses;
    losses["dec"] = result.report.dec;
    losses["ni"] = result.report.ni;
    losses["total"] = result.report.total;
    write_file(dir + "/gnndelete.losses.json", losses.dump(2) + "\n");
}

std::string stage_eval(const ExperimentConfig& cfg, std::uint64_t seed,
                       const std::string& out_dir) {
    cfg.validate();
    const Graph g = load_dataset(cfg);
    const std::string dir = seed_dir(out_dir, seed);
    const GnnModel base = load_model(dir + "/base.ckpt");
    const EdgeSplit split = load_split(dir + "/splits.tsv");

    const Graph g_train = training_graph(g, split);
    const NodeEmbeddings base_emb = forward(g_train, base);

    EdgeList objective = split.deleted;
    EvalInputs inputs;
    inputs.g_full = &g;
    inputs.split = &split;
    inputs.base_emb = &base_emb;
    inputs.objective_edges = &objective;
    inputs.structural = cfg.deletion.task != "features";
    inputs.seed = seed;
    if (g.labels()) inputs.labels = &*g.labels();
    if (base.has_cls_head()) inputs.cls_head = &base.cls_head;

    nlohmann::ordered_json out;
    out["base"] =
        nlohmann::ordered_json::parse(evaluate(inputs, base_emb, true, 0.0, 0).to_json());
    if (fs::exists(dir + "/gnndelete.op.ckpt") && !split.deleted.empty()) {
        const DeletionOperator op = load_operator(dir + "/gnndelete.op.ckpt");
        const Graph g_r = delete_edges(g_train, split.deleted);
        const UnlearnedModel um{base, op, g_r};
        out["gnndelete"] = nlohmann::ordered_json::parse(
            evaluate(inputs, unlearned_forward(um), false, 0.0, op.param_count()).to_json());
    }
    const std::string text = out.dump(2) + "\n";
    write_file(dir + "/eval.json", text);
    return text;
}

}  // namespace gnnd
