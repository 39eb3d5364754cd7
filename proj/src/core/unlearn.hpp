#pragma once

#include "delete_op.hpp"
#include "edge_split.hpp"
#include "graph.hpp"
#include "model.hpp"

namespace gnnd {

struct UnlearnConfig {
    double lambda = 0.5;  // weight on the deleted-edge term, in [0, 1]
    int epochs = 200;
    double lr = 1e-3;
    enum class Optimizer { Adam, Sgd } optimizer = Optimizer::Adam;
    std::uint64_t random_pair_seed = 1;
    int pairs_per_deleted_edge = 1;
    DelMode mode = DelMode::LayerWise;
    DelActivation activation = DelActivation::Linear;

    void validate() const;
};

// Per-epoch, per-active-layer loss series; total[e][l] equals
// lambda * dec[e][l] + (1 - lambda) * ni[e][l] exactly.
struct LossReport {
    std::vector<std::vector<double>> dec;
    std::vector<std::vector<double>> ni;
    std::vector<std::vector<double>> total;
};

struct UnlearnResult {
    DeletionOperator op;
    LossReport report;
    Graph graph_r;
};

// --- losses (standalone forms; the trainer uses the taped builders) ---

// MSE between the stacked [h'_u ; h'_v] rows of the deleted edges (revised
// model on graph_r) and [h_p ; h_q] rows of the random pairs (base model on
// the original graph, constant targets). pairs must hold
// |deleted| * pairs_per_deleted_edge entries. layer is 1-based.
Tensor dec_loss(int layer, const UnlearnedModel& um, const NodeEmbeddings& base_emb,
                const EdgeList& deleted, const EdgeList& pairs, int pairs_per_deleted_edge = 1);

// Per deleted edge, MSE between the revised and base representations of the
// edge's layer-l neighborhood on the pre-deletion graph g, id-aligned,
// summed over edges and normalized by the total node count.
Tensor ni_loss(int layer, const UnlearnedModel& um, const NodeEmbeddings& base_emb,
               const Graph& g, const EdgeList& deleted);

// Taped builders shared by the trainer and the gradient tests.
Tensor dec_loss_on(const Tensor& h_layer, const Tensor& base_layer, const EdgeList& deleted,
                   const EdgeList& pairs, int pairs_per_deleted_edge);
Tensor ni_loss_on(const Tensor& h_layer, const Tensor& base_layer,
                  const std::vector<double>& node_weights);
// node_weights[w] = number of deleted edges whose layer-l neighborhood
// contains w; the ni normalizer is sum(node_weights) * dim.
std::vector<double> ni_weights(const Graph& g, const EdgeList& deleted, int layer);

// --- drivers ---

// Trains a deletion operator for the given deletion set: freezes the base
// weights, builds masks on g, optimizes the lambda-weighted per-layer
// objective with per-layer gradient isolation. Deterministic given seeds.
UnlearnResult unlearn(const GnnModel& base, const Graph& g, const EdgeList& deleted,
                      const UnlearnConfig& cfg);

// Unlearns batch after batch with one operator: masks are rebuilt for the
// union of all batches seen so far, the graph shrinks cumulatively, and
// optimization continues from the current weights. A single batch matches
// unlearn() bit for bit.
UnlearnResult sequential_unlearn(const GnnModel& base, const Graph& g,
                                 const std::vector<EdgeList>& batches, const UnlearnConfig& cfg);

// Zeroes the listed nodes' feature rows (edges stay) and trains the operator
// with masks around those nodes and the deleted-edge set taken as their
// incident edges.
UnlearnResult unlearn_node_features(const GnnModel& base, const Graph& g, const NodeSet& nodes,
                                    const UnlearnConfig& cfg);

// --- baselines ---

// Fresh model trained on the remaining edges only.
GnnModel baseline_retrain(const Graph& g, const EdgeSplit& split, const TrainConfig& cfg);

// Copies the base model and runs `steps` of gradient ascent on the BCE loss
// of the given edges (as positives), with embeddings computed on g (the
// caller passes the post-deletion graph).
GnnModel baseline_grad_ascent(const GnnModel& base, const Graph& g, const EdgeList& deleted,
                              int steps, double lr);

// Copies the base model, runs `steps` of BCE descent on the remaining edges,
// then perturbs every weight with N(0, sigma^2) noise.
GnnModel baseline_noisy_finetune(const GnnModel& base, const Graph& g_r, const EdgeSplit& split,
                                 int steps, double noise_sigma, double lr, std::uint64_t seed);

}  // namespace gnnd
