#pragma once

#include "edge_split.hpp"
#include "graph.hpp"
#include "tensor.hpp"

namespace gnnd {

// GCN stack with a dot-product/sigmoid edge decoder and an optional linear
// node-classification head.
struct GnnModel {
    std::vector<Tensor> layer_weights;    // W^l, shape dims[l] x dims[l+1]
    std::vector<std::size_t> layer_dims;  // [n_f, d_1, ..., d_L]
    Tensor cls_head;                      // optional, d_L x num_classes

    int num_layers() const { return int(layer_weights.size()); }
    bool has_cls_head() const { return cls_head.defined(); }
    GnnModel clone() const;
    void validate() const;
};

// Per-layer node representations H^0 .. H^L; H^0 is the feature matrix.
struct NodeEmbeddings {
    std::vector<Tensor> h;

    const Tensor& final() const { return h.back(); }
    const Tensor& layer(int l) const { return h[std::size_t(l)]; }  // 0-based on h
};

// Symmetric-normalized adjacency with self-loops in CSR.
SparseMatrix normalized_adjacency(const Graph& g);

// H^l = ReLU(A_hat H^{l-1} W^l) for l < L, no nonlinearity on the final
// layer. Pass a tape-watched X or weights to make the result differentiable;
// adj must outlive any tape the result is recorded on.
NodeEmbeddings gcn_forward(const SparseMatrix& adj, const Tensor& x,
                           const std::vector<Tensor>& weights);
NodeEmbeddings forward(const Graph& g, const GnnModel& model);

double decode_edge(const NodeEmbeddings& emb, NodeId u, NodeId v);
std::vector<double> decode_edges(const NodeEmbeddings& emb, const EdgeList& edges);

// Scores = H^L * cls_head; argmax per row (ties -> lowest class id).
Matrix classify_nodes(const NodeEmbeddings& emb, const GnnModel& model);
std::vector<std::int32_t> predict_labels(const NodeEmbeddings& emb, const GnnModel& model);

struct TrainConfig {
    std::vector<std::size_t> hidden_dims{128, 64};
    int epochs = 200;
    double lr = 1e-2;
    std::uint64_t seed = 1;
};

GnnModel init_gcn(std::size_t in_dim, const std::vector<std::size_t>& hidden_dims,
                  std::uint64_t seed);

// Link-prediction training on the split's train edges against an equal
// number of per-epoch resampled negatives; returns the weights with the best
// validation AUROC (final weights when the validation set is empty).
// g is the full graph; message passing runs on its train-edge subgraph.
GnnModel train_base(const Graph& g, const EdgeSplit& split, const TrainConfig& cfg);

// Linear probe for node classification, fit on frozen final embeddings with
// one-vs-all logistic regression. Rows with label < 0 are ignored.
Tensor fit_cls_head(const NodeEmbeddings& emb, const std::vector<std::int32_t>& labels,
                    std::uint64_t seed, int epochs = 200, double lr = 1e-2);

}  // namespace gnnd
