#pragma once

#include "graph.hpp"

namespace gnnd {

// Disjoint canonical edge sets. deleted is always a subset of train and
// remaining = train \ deleted.
struct EdgeSplit {
    EdgeList train;
    EdgeList validation;
    EdgeList test;
    EdgeList deleted;
    EdgeList remaining;

    std::size_t total_edges() const {
        return train.size() + validation.size() + test.size();
    }
    void validate() const;
};

enum class Locality { In, Out };

// Uniform disjoint split of the graph's canonical edges; deleted starts
// empty and remaining = train.
EdgeSplit split_edges(const Graph& g, double test_frac, double val_frac, std::uint64_t seed);

// Draws floor(ratio * total) train edges uniformly without replacement from
// the pool inside (In) or outside (Out) the 2-hop node set around the test
// edges' endpoints. Returns the split with deleted/remaining filled in.
EdgeSplit sample_deletion(const Graph& g, const EdgeSplit& split, double ratio,
                          Locality locality, std::uint64_t seed);

// m uniformly sampled canonical node pairs that are neither edges of g nor
// listed in exclude.
EdgeList negative_sample(const Graph& g, std::size_t m, const EdgeList& exclude,
                         std::uint64_t seed);

// Graph containing exactly the split's train edges (the message-passing
// graph; validation/test edges are held out of it).
Graph training_graph(const Graph& g, const EdgeSplit& split);

void save_split(const EdgeSplit& split, const std::string& path);
EdgeSplit load_split(const std::string& path);

}  // namespace gnnd
