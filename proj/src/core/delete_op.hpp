#pragma once

#include "graph.hpp"
#include "model.hpp"
#include "tensor.hpp"

namespace gnnd {

enum class DelMode { LayerWise, LastLayerOnly };
enum class DelActivation { Linear, Sigmoid };

using LayerMasks = std::vector<std::vector<std::uint8_t>>;

// Trainable per-layer transform applied only to nodes inside the deletion's
// per-layer neighborhoods; identity everywhere else. Layer-wise mode carries
// one square matrix per GNN layer, last-layer-only a single one.
struct DeletionOperator {
    std::vector<Tensor> w_d;           // square, dims[i] x dims[i]
    std::vector<std::size_t> dims;     // output dim of each active layer
    LayerMasks masks;                  // one mask per active layer, length num_nodes
    DelMode mode = DelMode::LayerWise;
    DelActivation activation = DelActivation::Linear;

    int active_layers() const { return int(w_d.size()); }
    std::int64_t param_count() const;  // sum of dims[i]^2, graph-size independent
    DeletionOperator clone() const;
    void validate() const;
};

// Identity-initialized operator (no masks yet) for the given model.
DeletionOperator identity_operator(const GnnModel& model, DelMode mode,
                                   DelActivation activation);

// Per-layer node masks around the seed nodes, computed on the pre-deletion
// graph: layer l covers every node within l hops of a seed. Last-layer-only
// mode produces the single layer-L mask.
LayerMasks build_masks(const Graph& g, const NodeSet& seeds, int num_layers, DelMode mode);
LayerMasks build_masks(const Graph& g, const EdgeList& deleted, int num_layers, DelMode mode);

// Masked rows become act(row * w_d); unmasked rows pass through unchanged
// (exact equality).
Tensor del_forward(const Tensor& h, const std::vector<std::uint8_t>& mask, const Tensor& w_d,
                   DelActivation activation);

// Frozen base model plus a deletion operator, served on the post-deletion
// graph.
struct UnlearnedModel {
    GnnModel base;
    DeletionOperator op;
    Graph graph_r;
};

// Forward pass with the operator spliced in after each active layer; base
// weights never join a tape here. When taped_wd is supplied (one taped
// handle per active layer, already watched), every layer's input is
// detached so W_D^l only receives gradient from losses on layer l's output.
// adj must outlive any tape the result is recorded on.
NodeEmbeddings unlearned_forward(const UnlearnedModel& um);
NodeEmbeddings unlearned_forward(const SparseMatrix& adj, const Tensor& x, const GnnModel& base,
                                 const DeletionOperator& op,
                                 const std::vector<Tensor>* taped_wd = nullptr);

}  // namespace gnnd
