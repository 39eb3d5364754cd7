#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace gnnd {

using NodeId = std::int32_t;

// Undirected edge in canonical form (u < v).
struct Edge {
    NodeId u = 0;
    NodeId v = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(NodeId a, NodeId b) {
    return a < b ? Edge{a, b} : Edge{b, a};
}

// Sorted, unique canonical edges.
using EdgeList = std::vector<Edge>;

void sort_unique(EdgeList& edges);
bool contains_edge(const EdgeList& edges, Edge e);  // binary search
EdgeList edge_union(const EdgeList& a, const EdgeList& b);
EdgeList edge_difference(const EdgeList& a, const EdgeList& b);

// Sorted, unique node ids.
struct NodeSet {
    std::vector<NodeId> ids;

    NodeSet() = default;
    explicit NodeSet(std::vector<NodeId> raw);  // sorts + dedupes

    bool contains(NodeId u) const;
    std::size_t size() const { return ids.size(); }
    bool empty() const { return ids.empty(); }
};

NodeSet endpoints(const EdgeList& edges);

// Immutable undirected graph in CSR form with node features and optional
// node labels. Both directions of every edge are stored; neighbor lists are
// sorted; no self-loops, no duplicates. Node ids stay stable under edge
// deletion (isolated nodes keep their rows).
class Graph {
public:
    Graph() = default;

    // edges must be canonical; duplicates are an error here (the loaders
    // dedupe before calling). features.rows must equal num_nodes.
    static Graph build(NodeId num_nodes, EdgeList edges, Matrix features,
                       std::optional<std::vector<std::int32_t>> labels = std::nullopt);

    NodeId num_nodes() const { return n_; }
    std::int64_t num_edges() const;  // canonical (undirected) count
    std::span<const NodeId> neighbors(NodeId u) const;
    std::int64_t degree(NodeId u) const;
    bool has_edge(NodeId u, NodeId v) const;
    const EdgeList& edges() const { return edges_; }
    const Matrix& features() const { return features_; }
    const std::optional<std::vector<std::int32_t>>& labels() const { return labels_; }
    const std::vector<std::int64_t>& csr_offsets() const { return offsets_; }
    const std::vector<NodeId>& csr_neighbors() const { return neighbors_; }

    Graph with_features(Matrix features) const;  // same topology, new features

    void check_node(NodeId u) const;
    // Full-scan structural check: offsets monotone, ids in range, sorted
    // unique neighbor lists, symmetry, no self-loops.
    void validate() const;

private:
    NodeId n_ = 0;
    std::vector<std::int64_t> offsets_;
    std::vector<NodeId> neighbors_;
    EdgeList edges_;  // canonical, sorted
    Matrix features_;
    std::optional<std::vector<std::int32_t>> labels_;
};

struct LoadStats {
    std::int64_t rows_read = 0;          // edge rows parsed (directed)
    std::int64_t dropped_self_loops = 0;
    std::int64_t dropped_duplicates = 0;
};

// Loads a TSV edge list ("u<TAB>v" per line, '#' comments). Self-loops and
// duplicate rows are dropped and counted in stats. When no feature file is
// given, nodes get degree-bucketed one-hot features with feature_dim_hint
// buckets (16 if the hint is zero).
Graph load_edge_list(const std::string& path, std::size_t feature_dim_hint = 0,
                     LoadStats* stats = nullptr);
Graph load_graph(const std::string& edge_path,
                 const std::optional<std::string>& features_path,
                 const std::optional<std::string>& labels_path,
                 std::size_t feature_dim_hint = 0, LoadStats* stats = nullptr);

// Writes edges.tsv (both directions), features.csv and, when present,
// labels.csv into dir.
void save_graph(const Graph& g, const std::string& dir);

Matrix load_features_csv(const std::string& path, std::size_t num_nodes);
std::vector<std::int32_t> load_labels_csv(const std::string& path, std::size_t num_nodes);

// Degree-bucketed one-hot features (bucket = min(deg, dim - 1)).
Matrix degree_bucket_features(const Graph& g, std::size_t dim);

// All nodes within graph distance <= k of any seed (BFS, seeds included).
NodeSet khop_nodes(const Graph& g, const NodeSet& seeds, int k);

// Removes the given edges in both CSR directions; features/labels carry
// over; isolated nodes are retained.
Graph delete_edges(const Graph& g, const EdgeList& to_delete);

// Removes every edge incident to a listed node; returns the new graph and
// the removed canonical edge set.
std::pair<Graph, EdgeList> delete_nodes(const Graph& g, const NodeSet& nodes);

}  // namespace gnnd
