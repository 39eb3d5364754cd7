#pragma once

#include <optional>
#include <string>

#include "edge_split.hpp"
#include "graph.hpp"
#include "model.hpp"

namespace gnnd {

// Probability that a random positive outranks a random negative, ties
// counted 1/2 (rank-sum formulation, exact). Throws DataError when only one
// class is present.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Area under the precision-recall curve by step interpolation, tie groups
// processed as blocks.
double auprc(std::span<const double> scores, std::span<const int> labels);

// Deleted-edge separability: deleted edges labelled 0 against an equal
// number of seeded remaining edges labelled 1; returns (auroc, auprc).
std::pair<double, double> eval_deleted(const NodeEmbeddings& emb, const EdgeList& remaining,
                                       const EdgeList& deleted, std::uint64_t seed);

// Mean presence probability of the deleted edges before the deletion
// operator divided by the mean after (floor 1e-9); > 1 means the revised
// model carries less information about them.
double mi_ratio(const NodeEmbeddings& before, const NodeEmbeddings& after, const EdgeList& deleted);
double mi_ratio(const GnnModel& model_before, const GnnModel& model_after, const Graph& g,
                const Graph& g_r, const EdgeList& deleted);

// Largest singular value by power iteration on w^T w.
double spectral_norm(const Matrix& w, int iters = 50, double tol = 1e-10);

struct Theorem1Result {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

// Checks <z_u,z_v> - <z_u',z_v'> >= -(1 + ||W||_2^2)/2 * ||z_u - z_v||^2
// with z_u, z_v normalized to unit length and z' = normalize(sigmoid(W z)).
Theorem1Result theorem1_check(std::span<const double> z_u, std::span<const double> z_v,
                              const Matrix& w_d);

// (accuracy, macro F1) of class predictions.
std::pair<double, double> node_scores(std::span<const std::int32_t> preds,
                                      std::span<const std::int32_t> truth);

struct EvalReport {
    std::optional<double> auroc_test;
    std::optional<double> auprc_test;
    std::optional<double> auroc_deleted;
    std::optional<double> auprc_deleted;
    std::optional<double> mi_ratio;
    std::optional<double> node_accuracy;
    std::optional<double> node_f1;
    double wall_time_seconds = 0.0;
    std::int64_t delop_params = 0;

    std::string to_json() const;  // flat object, stable key order
    static EvalReport from_json(const std::string& text);
};

}  // namespace gnnd
