#include "unlearn.hpp"

#include <algorithm>
#include <cmath>

namespace gnnd {

void UnlearnConfig::validate() const {
    if (lambda < 0.0 || lambda > 1.0) throw ConfigError("unlearn: lambda must be in [0, 1]");
    if (lr <= 0.0) throw ConfigError("unlearn: lr must be positive");
    if (epochs < 0) throw ConfigError("unlearn: epochs must be >= 0");
    if (pairs_per_deleted_edge < 1) throw ConfigError("unlearn: pairs_per_deleted_edge >= 1");
}

Tensor dec_loss_on(const Tensor& h_layer, const Tensor& base_layer, const EdgeList& deleted,
                   const EdgeList& pairs, int pairs_per_deleted_edge) {
    if (deleted.empty()) return Tensor::scalar(0.0);
    const std::size_t ppde = std::size_t(pairs_per_deleted_edge);
    if (pairs.size() != deleted.size() * ppde) {
        throw ConfigError("dec_loss: expected " + std::to_string(deleted.size() * ppde) +
                          " random pairs, got " + std::to_string(pairs.size()));
    }
    std::vector<std::int32_t> us, vs, ps, qs;
    us.reserve(pairs.size());
    vs.reserve(pairs.size());
    ps.reserve(pairs.size());
    qs.reserve(pairs.size());
    for (std::size_t i = 0; i < deleted.size(); ++i) {
        for (std::size_t j = 0; j < ppde; ++j) {
            us.push_back(deleted[i].u);
            vs.push_back(deleted[i].v);
            ps.push_back(pairs[i * ppde + j].u);
            qs.push_back(pairs[i * ppde + j].v);
        }
    }
    Tensor revised = concat_cols(gather_rows(h_layer, us), gather_rows(h_layer, vs));
    const Tensor base = base_layer.detached();
    Tensor target = concat_cols(gather_rows(base, ps), gather_rows(base, qs));
    return mse(revised, target);
}

std::vector<double> ni_weights(const Graph& g, const EdgeList& deleted, int layer) {
    std::vector<double> w(std::size_t(g.num_nodes()), 0.0);
    for (const Edge& e : deleted) {
        const NodeSet hood = khop_nodes(g, NodeSet({e.u, e.v}), layer);
        for (NodeId u : hood.ids) w[std::size_t(u)] += 1.0;
    }
    return w;
}

Tensor ni_loss_on(const Tensor& h_layer, const Tensor& base_layer,
                  const std::vector<double>& node_weights) {
    return weighted_row_mse(h_layer, base_layer.detached(), node_weights);
}

Tensor dec_loss(int layer, const UnlearnedModel& um, const NodeEmbeddings& base_emb,
                const EdgeList& deleted, const EdgeList& pairs, int pairs_per_deleted_edge) {
    const NodeEmbeddings emb = unlearned_forward(um);
    return dec_loss_on(emb.h[std::size_t(layer)], base_emb.h[std::size_t(layer)], deleted, pairs,
                       pairs_per_deleted_edge);
}

Tensor ni_loss(int layer, const UnlearnedModel& um, const NodeEmbeddings& base_emb,
               const Graph& g, const EdgeList& deleted) {
    if (deleted.empty()) return Tensor::scalar(0.0);
    const NodeEmbeddings emb = unlearned_forward(um);
    return ni_loss_on(emb.h[std::size_t(layer)], base_emb.h[std::size_t(layer)],
                      ni_weights(g, deleted, layer));
}

namespace {

LayerMasks empty_masks(const Graph& g, int num_layers, DelMode mode) {
    const std::size_t count = mode == DelMode::LastLayerOnly ? 1 : std::size_t(num_layers);
    return LayerMasks(count, std::vector<std::uint8_t>(std::size_t(g.num_nodes()), 0));
}

struct TrainContext {
    const Graph* g_original = nullptr;     // pre-deletion graph (mask/target space)
    const GnnModel* base = nullptr;
    NodeEmbeddings base_emb;               // base model on the original graph
    EdgeList deleted;                      // edges the losses are built from
    Graph graph_r;                         // serving graph
    SparseMatrix adj_r;
    Tensor x_r;
    std::vector<std::vector<double>> weights_per_layer;  // ni weights, active layers
};

// One batch of optimization epochs over the operator, in place.
void run_epochs(TrainContext& ctx, DeletionOperator& op, const UnlearnConfig& cfg,
                std::uint64_t pair_stream_base, LossReport& report) {
    const int L = ctx.base->num_layers();
    const int first_active = cfg.mode == DelMode::LastLayerOnly ? L - 1 : 0;
    const std::size_t n_pairs = ctx.deleted.size() * std::size_t(cfg.pairs_per_deleted_edge);

    AdamState adam;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const EdgeList pairs =
            n_pairs > 0 ? negative_sample(*ctx.g_original, n_pairs, {},
                                          derive_seed(cfg.random_pair_seed,
                                                      pair_stream_base + std::uint64_t(epoch)))
                        : EdgeList{};

        Tape tape;
        std::vector<Tensor> taped;
        taped.reserve(op.w_d.size());
        for (Tensor& w : op.w_d) taped.push_back(tape.watch(w));
        const NodeEmbeddings emb = unlearned_forward(ctx.adj_r, ctx.x_r, *ctx.base, op, &taped);

        Tensor overall;
        std::vector<double> dec_row, ni_row, total_row;
        for (int a = 0; a < op.active_layers(); ++a) {
            const int l = first_active + a + 1;  // 1-based layer index
            const Tensor& h_l = emb.h[std::size_t(l)];
            const Tensor& b_l = ctx.base_emb.h[std::size_t(l)];
            Tensor dec = dec_loss_on(h_l, b_l, ctx.deleted, pairs, cfg.pairs_per_deleted_edge);
            Tensor ni = ni_loss_on(h_l, b_l, ctx.weights_per_layer[std::size_t(a)]);
            Tensor total;
            if (cfg.lambda == 0.0) {
                total = ni;
            } else if (cfg.lambda == 1.0) {
                total = dec;
            } else {
                total = add(scale(dec, cfg.lambda), scale(ni, 1.0 - cfg.lambda));
            }
            dec_row.push_back(dec.item());
            ni_row.push_back(ni.item());
            total_row.push_back(total.item());
            if (!std::isfinite(total.item())) {
                throw NumericError("unlearn: loss diverged at epoch " + std::to_string(epoch));
            }
            overall = overall.defined() ? add(overall, total) : total;
        }
        report.dec.push_back(std::move(dec_row));
        report.ni.push_back(std::move(ni_row));
        report.total.push_back(std::move(total_row));

        if (overall.defined() && overall.tape()) {
            tape.backward(overall);
            if (cfg.optimizer == UnlearnConfig::Optimizer::Adam) {
                adam_step(taped, adam, cfg.lr);
            } else {
                sgd_step(taped, cfg.lr);
            }
        }
    }
}

TrainContext make_context(const GnnModel& base, const Graph& g, const EdgeList& deleted,
                          Graph graph_r, const LayerMasks& masks, DelMode mode) {
    TrainContext ctx;
    ctx.g_original = &g;
    ctx.base = &base;
    ctx.base_emb = forward(g, base);
    ctx.deleted = deleted;
    ctx.graph_r = std::move(graph_r);
    ctx.adj_r = normalized_adjacency(ctx.graph_r);
    ctx.x_r = Tensor::from_matrix(ctx.graph_r.features());

    const int L = base.num_layers();
    const int first_active = mode == DelMode::LastLayerOnly ? L - 1 : 0;
    for (std::size_t a = 0; a < masks.size(); ++a) {
        const int l = first_active + int(a) + 1;
        ctx.weights_per_layer.push_back(ni_weights(g, deleted, l));
    }
    return ctx;
}

}  // namespace

UnlearnResult unlearn(const GnnModel& base, const Graph& g, const EdgeList& deleted,
                      const UnlearnConfig& cfg) {
    return sequential_unlearn(base, g, {deleted}, cfg);
}

UnlearnResult sequential_unlearn(const GnnModel& base, const Graph& g,
                                 const std::vector<EdgeList>& batches,
                                 const UnlearnConfig& cfg) {
    cfg.validate();
    base.validate();
    const int L = base.num_layers();

    // batches must be disjoint edge sets of g
    EdgeList cumulative;
    for (const EdgeList& batch : batches) {
        EdgeList b(batch);
        sort_unique(b);
        if (b.size() != batch.size()) throw ConfigError("sequential_unlearn: batch has duplicates");
        for (const Edge& e : b) {
            if (!contains_edge(g.edges(), e)) {
                throw DataError("sequential_unlearn: edge not in graph: (" + std::to_string(e.u) +
                                "," + std::to_string(e.v) + ")");
            }
            if (contains_edge(cumulative, e)) {
                throw ConfigError("sequential_unlearn: batches overlap on (" +
                                  std::to_string(e.u) + "," + std::to_string(e.v) + ")");
            }
        }
        cumulative = edge_union(cumulative, b);
    }

    UnlearnResult result;
    result.op = identity_operator(base, cfg.mode, cfg.activation);
    result.op.masks = empty_masks(g, L, cfg.mode);
    result.graph_r = g;

    cumulative.clear();
    for (std::size_t i = 0; i < batches.size(); ++i) {
        EdgeList batch(batches[i]);
        sort_unique(batch);
        cumulative = edge_union(cumulative, batch);
        result.graph_r = delete_edges(result.graph_r, batch);
        if (cumulative.empty()) continue;
        result.op.masks = build_masks(g, cumulative, L, cfg.mode);

        TrainContext ctx =
            make_context(base, g, cumulative, result.graph_r, result.op.masks, cfg.mode);
        run_epochs(ctx, result.op, cfg, std::uint64_t(i) * std::uint64_t(cfg.epochs),
                   result.report);
    }
    return result;
}

UnlearnResult unlearn_node_features(const GnnModel& base, const Graph& g, const NodeSet& nodes,
                                    const UnlearnConfig& cfg) {
    cfg.validate();
    base.validate();
    for (NodeId u : nodes.ids) g.check_node(u);
    const int L = base.num_layers();

    EdgeList incident;
    for (NodeId u : nodes.ids) {
        for (NodeId v : g.neighbors(u)) incident.push_back(make_edge(u, v));
    }
    sort_unique(incident);

    Matrix feats = g.features();
    for (NodeId u : nodes.ids) {
        for (std::size_t c = 0; c < feats.cols; ++c) feats.at(std::size_t(u), c) = 0.0;
    }

    UnlearnResult result;
    result.op = identity_operator(base, cfg.mode, cfg.activation);
    result.op.masks =
        nodes.empty() ? empty_masks(g, L, cfg.mode) : build_masks(g, nodes, L, cfg.mode);
    result.graph_r = g.with_features(std::move(feats));
    if (nodes.empty()) return result;

    TrainContext ctx = make_context(base, g, incident, result.graph_r, result.op.masks, cfg.mode);
    run_epochs(ctx, result.op, cfg, 0, result.report);
    return result;
}

GnnModel baseline_retrain(const Graph& g, const EdgeSplit& split, const TrainConfig& cfg) {
    EdgeSplit retrain_split;
    retrain_split.train = split.remaining;
    retrain_split.validation = split.validation;
    retrain_split.test = split.test;
    retrain_split.remaining = split.remaining;
    retrain_split.validate();
    return train_base(g, retrain_split, cfg);
}

GnnModel baseline_grad_ascent(const GnnModel& base, const Graph& g, const EdgeList& deleted,
                              int steps, double lr) {
    GnnModel model = base.clone();
    if (steps <= 0 || deleted.empty()) return model;
    const SparseMatrix adj = normalized_adjacency(g);
    const Tensor x = Tensor::from_matrix(g.features());

    std::vector<std::int32_t> us, vs;
    for (const Edge& e : deleted) {
        us.push_back(e.u);
        vs.push_back(e.v);
    }
    const Tensor ones({deleted.size()}, std::vector<double>(deleted.size(), 1.0));

    for (int step = 0; step < steps; ++step) {
        Tape tape;
        std::vector<Tensor> ws;
        for (Tensor& w : model.layer_weights) ws.push_back(tape.watch(w));
        const NodeEmbeddings emb = gcn_forward(adj, x, ws);
        Tensor logits = rowwise_dot(gather_rows(emb.final(), us), gather_rows(emb.final(), vs));
        Tensor loss = bce_with_logits(logits, ones);
        if (!std::isfinite(loss.item())) {
            throw NumericError("grad_ascent: loss diverged at step " + std::to_string(step));
        }
        tape.backward(loss);
        sgd_step(ws, -lr);  // ascent
    }
    return model;
}

GnnModel baseline_noisy_finetune(const GnnModel& base, const Graph& g_r, const EdgeSplit& split,
                                 int steps, double noise_sigma, double lr, std::uint64_t seed) {
    GnnModel model = base.clone();
    const SparseMatrix adj = normalized_adjacency(g_r);
    const Tensor x = Tensor::from_matrix(g_r.features());
    const EdgeList& positives = split.remaining;

    if (steps > 0 && !positives.empty()) {
        std::vector<double> labels(positives.size(), 1.0);
        labels.insert(labels.end(), positives.size(), 0.0);
        const Tensor label_t({labels.size()}, labels);
        AdamState adam;
        for (int step = 0; step < steps; ++step) {
            const EdgeList negs =
                negative_sample(g_r, positives.size(), {}, derive_seed(seed, 0x200 + step));
            std::vector<std::int32_t> us, vs;
            for (const Edge& e : positives) {
                us.push_back(e.u);
                vs.push_back(e.v);
            }
            for (const Edge& e : negs) {
                us.push_back(e.u);
                vs.push_back(e.v);
            }
            Tape tape;
            std::vector<Tensor> ws;
            for (Tensor& w : model.layer_weights) ws.push_back(tape.watch(w));
            const NodeEmbeddings emb = gcn_forward(adj, x, ws);
            Tensor logits =
                rowwise_dot(gather_rows(emb.final(), us), gather_rows(emb.final(), vs));
            Tensor loss = bce_with_logits(logits, label_t);
            if (!std::isfinite(loss.item())) {
                throw NumericError("noisy_finetune: loss diverged at step " +
                                   std::to_string(step));
            }
            tape.backward(loss);
            adam_step(ws, adam, lr);
        }
    }

    if (noise_sigma != 0.0) {
        Rng rng(derive_seed(seed, 0xd2d));
        for (Tensor& w : model.layer_weights) {
            for (double& v : w.data()) v += noise_sigma * rng.normal();
        }
    }
    return model;
}

}  // namespace gnnd
