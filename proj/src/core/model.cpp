#include "model.hpp"

#include <algorithm>
#include <cmath>

#include "metrics.hpp"

namespace gnnd {

GnnModel GnnModel::clone() const {
    GnnModel m;
    m.layer_dims = layer_dims;
    m.layer_weights.reserve(layer_weights.size());
    for (const Tensor& w : layer_weights) m.layer_weights.push_back(w.clone());
    if (has_cls_head()) m.cls_head = cls_head.clone();
    return m;
}

void GnnModel::validate() const {
    if (layer_weights.empty()) throw ConfigError("model: needs at least one layer");
    if (layer_dims.size() != layer_weights.size() + 1) {
        throw ConfigError("model: layer_dims must chain through every weight");
    }
    for (std::size_t l = 0; l < layer_weights.size(); ++l) {
        if (layer_weights[l].rows() != layer_dims[l] || layer_weights[l].cols() != layer_dims[l + 1]) {
            throw ConfigError("model: weight " + std::to_string(l) + " shape mismatch");
        }
        for (double x : layer_weights[l].data()) {
            if (!std::isfinite(x)) throw NumericError("model: non-finite weight");
        }
    }
}

SparseMatrix normalized_adjacency(const Graph& g) {
    const std::size_t n = std::size_t(g.num_nodes());
    SparseMatrix a;
    a.rows = a.cols = n;
    a.offsets.assign(n + 1, 0);
    for (std::size_t u = 0; u < n; ++u) {
        a.offsets[u + 1] = a.offsets[u] + g.degree(NodeId(u)) + 1;  // + self-loop
    }
    a.indices.resize(std::size_t(a.offsets[n]));
    a.values.resize(std::size_t(a.offsets[n]));
    for (std::size_t u = 0; u < n; ++u) {
        const double du = std::sqrt(double(g.degree(NodeId(u)) + 1));
        std::int64_t pos = a.offsets[u];
        bool self_placed = false;
        for (NodeId v : g.neighbors(NodeId(u))) {
            if (!self_placed && std::size_t(v) > u) {
                a.indices[std::size_t(pos)] = std::int32_t(u);
                a.values[std::size_t(pos)] = 1.0 / (du * du);
                ++pos;
                self_placed = true;
            }
            const double dv = std::sqrt(double(g.degree(v) + 1));
            a.indices[std::size_t(pos)] = v;
            a.values[std::size_t(pos)] = 1.0 / (du * dv);
            ++pos;
        }
        if (!self_placed) {
            a.indices[std::size_t(pos)] = std::int32_t(u);
            a.values[std::size_t(pos)] = 1.0 / (du * du);
        }
    }
    return a;
}

NodeEmbeddings gcn_forward(const SparseMatrix& adj, const Tensor& x,
                           const std::vector<Tensor>& weights) {
    if (x.cols() != weights.front().rows()) {
        throw DataError("forward: feature dim " + std::to_string(x.cols()) +
                        " != first layer input dim " + std::to_string(weights.front().rows()));
    }
    NodeEmbeddings emb;
    emb.h.reserve(weights.size() + 1);
    emb.h.push_back(x);
    Tensor h = x;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        Tensor z = spmm(adj, matmul(h, weights[l]));
        if (l + 1 < weights.size()) z = relu(z);
        emb.h.push_back(z);
        h = z;
    }
    return emb;
}

NodeEmbeddings forward(const Graph& g, const GnnModel& model) {
    const SparseMatrix adj = normalized_adjacency(g);
    return gcn_forward(adj, Tensor::from_matrix(g.features()), model.layer_weights);
}

double decode_edge(const NodeEmbeddings& emb, NodeId u, NodeId v) {
    const Tensor& z = emb.final();
    const std::size_t n = z.rows(), d = z.cols();
    if (u < 0 || v < 0 || std::size_t(u) >= n || std::size_t(v) >= n) {
        throw DataError("decode_edge: node id out of range");
    }
    auto zv = z.data();
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += zv[std::size_t(u) * d + j] * zv[std::size_t(v) * d + j];
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

std::vector<double> decode_edges(const NodeEmbeddings& emb, const EdgeList& edges) {
    std::vector<double> out;
    out.reserve(edges.size());
    for (const Edge& e : edges) out.push_back(decode_edge(emb, e.u, e.v));
    return out;
}

Matrix classify_nodes(const NodeEmbeddings& emb, const GnnModel& model) {
    if (!model.has_cls_head()) throw ConfigError("classify_nodes: model has no classification head");
    return matmul(emb.final().detached(), model.cls_head.detached()).to_matrix();
}

std::vector<std::int32_t> predict_labels(const NodeEmbeddings& emb, const GnnModel& model) {
    const Matrix scores = classify_nodes(emb, model);
    std::vector<std::int32_t> preds(scores.rows, 0);
    for (std::size_t r = 0; r < scores.rows; ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < scores.cols; ++c) {
            if (scores.at(r, c) > scores.at(r, best)) best = c;
        }
        preds[r] = std::int32_t(best);
    }
    return preds;
}

GnnModel init_gcn(std::size_t in_dim, const std::vector<std::size_t>& hidden_dims,
                  std::uint64_t seed) {
    if (hidden_dims.empty()) throw ConfigError("init_gcn: need at least one layer dim");
    GnnModel m;
    m.layer_dims.push_back(in_dim);
    for (std::size_t d : hidden_dims) m.layer_dims.push_back(d);
    Rng rng(derive_seed(seed, 0x1417));
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
        const std::size_t fan_in = m.layer_dims[l], fan_out = m.layer_dims[l + 1];
        const double a = std::sqrt(6.0 / double(fan_in + fan_out));
        Tensor w({fan_in, fan_out});
        for (double& x : w.data()) x = rng.uniform(-a, a);
        m.layer_weights.push_back(std::move(w));
    }
    return m;
}

namespace {

// Link logits for (pos + neg) pairs on the final embedding.
Tensor link_logits(const Tensor& z, const EdgeList& pos, const EdgeList& neg) {
    std::vector<std::int32_t> us, vs;
    us.reserve(pos.size() + neg.size());
    vs.reserve(pos.size() + neg.size());
    for (const Edge& e : pos) {
        us.push_back(e.u);
        vs.push_back(e.v);
    }
    for (const Edge& e : neg) {
        us.push_back(e.u);
        vs.push_back(e.v);
    }
    return rowwise_dot(gather_rows(z, us), gather_rows(z, vs));
}

double link_auroc(const NodeEmbeddings& emb, const EdgeList& pos, const EdgeList& neg) {
    std::vector<double> scores = decode_edges(emb, pos);
    std::vector<double> neg_scores = decode_edges(emb, neg);
    std::vector<int> labels(scores.size(), 1);
    scores.insert(scores.end(), neg_scores.begin(), neg_scores.end());
    labels.insert(labels.end(), neg_scores.size(), 0);
    return auroc(scores, labels);
}

}  // namespace

GnnModel train_base(const Graph& g, const EdgeSplit& split, const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw ConfigError("train_base: epochs must be >= 1");
    split.validate();
    const Graph g_train = training_graph(g, split);
    const SparseMatrix adj = normalized_adjacency(g_train);
    const Tensor x = Tensor::from_matrix(g_train.features());

    GnnModel model = init_gcn(g_train.features().cols, cfg.hidden_dims, cfg.seed);

    const bool select = !split.validation.empty();
    EdgeList val_negs;
    if (select) {
        val_negs = negative_sample(g, split.validation.size(), {}, derive_seed(cfg.seed, 0xa1));
    }
    std::vector<Tensor> best;
    double best_auroc = -1.0;
    std::vector<double> labels(split.train.size(), 1.0);
    labels.insert(labels.end(), split.train.size(), 0.0);
    const Tensor label_t({labels.size()}, labels);

    AdamState adam;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const EdgeList negs =
            negative_sample(g, split.train.size(), {}, derive_seed(cfg.seed, 0x100 + epoch));

        Tape tape;
        std::vector<Tensor> ws;
        ws.reserve(model.layer_weights.size());
        for (Tensor& w : model.layer_weights) ws.push_back(tape.watch(w));
        NodeEmbeddings emb = gcn_forward(adj, x, ws);

        if (select) {
            const double val = link_auroc(emb, split.validation, val_negs);
            if (val > best_auroc) {
                best_auroc = val;
                best.clear();
                for (const Tensor& w : model.layer_weights) best.push_back(w.clone());
            }
        }

        Tensor loss = bce_with_logits(link_logits(emb.final(), split.train, negs), label_t);
        if (!std::isfinite(loss.item())) {
            throw NumericError("train_base: loss diverged at epoch " + std::to_string(epoch));
        }
        tape.backward(loss);
        adam_step(ws, adam, cfg.lr);
    }

    if (select) {
        const NodeEmbeddings emb = gcn_forward(adj, x, model.layer_weights);
        const double val = link_auroc(emb, split.validation, val_negs);
        if (val <= best_auroc) {
            model.layer_weights = std::move(best);
        }
    }
    model.validate();
    return model;
}

Tensor fit_cls_head(const NodeEmbeddings& emb, const std::vector<std::int32_t>& labels,
                    std::uint64_t seed, int epochs, double lr) {
    const Tensor z = emb.final().detached();
    if (labels.size() != z.rows()) throw DataError("fit_cls_head: label count != nodes");
    std::int32_t num_classes = 0;
    std::vector<std::int32_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= 0) {
            rows.push_back(std::int32_t(i));
            num_classes = std::max(num_classes, labels[i] + 1);
        }
    }
    if (rows.empty()) throw DataError("fit_cls_head: no labeled nodes");

    const std::size_t d = z.cols(), c = std::size_t(num_classes);
    Tensor onehot({rows.size(), c});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        onehot.data()[i * c + std::size_t(labels[std::size_t(rows[i])])] = 1.0;
    }
    const Tensor zl = gather_rows(z, rows);

    Rng rng(derive_seed(seed, 0xc15));
    const double a = std::sqrt(6.0 / double(d + c));
    Tensor head({d, c});
    for (double& w : head.data()) w = rng.uniform(-a, a);

    AdamState adam;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        Tape tape;
        std::vector<Tensor> params{tape.watch(head)};
        Tensor loss = bce_with_logits(matmul(zl, params[0]), onehot);
        tape.backward(loss);
        adam_step(params, adam, lr);
    }
    return head;
}

}  // namespace gnnd
