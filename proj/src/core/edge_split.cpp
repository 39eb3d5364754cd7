#include "edge_split.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace gnnd {

namespace {

bool disjoint(const EdgeList& a, const EdgeList& b) {
    EdgeList tmp;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(tmp));
    return tmp.empty();
}

// Seeded partial Fisher-Yates: first m entries of a shuffle of pool.
EdgeList draw_without_replacement(EdgeList pool, std::size_t m, Rng& rng) {
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + std::size_t(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    sort_unique(pool);
    return pool;
}

}  // namespace

void EdgeSplit::validate() const {
    if (!disjoint(train, validation) || !disjoint(train, test) || !disjoint(validation, test)) {
        throw DataError("edge split: train/validation/test overlap");
    }
    for (const Edge& e : deleted) {
        if (!contains_edge(train, e)) throw DataError("edge split: deleted edge not in train");
    }
    if (edge_difference(train, deleted) != remaining) {
        throw DataError("edge split: remaining != train \\ deleted");
    }
}

EdgeSplit split_edges(const Graph& g, double test_frac, double val_frac, std::uint64_t seed) {
    if (test_frac < 0.0 || val_frac < 0.0 || test_frac + val_frac >= 1.0) {
        throw ConfigError("split_edges: fractions must be >= 0 and sum below 1");
    }
    EdgeList all = g.edges();
    Rng rng(derive_seed(seed, 0x5b717));
    rng.shuffle(all);

    const std::size_t n_test = std::size_t(std::floor(test_frac * double(all.size())));
    const std::size_t n_val = std::size_t(std::floor(val_frac * double(all.size())));

    EdgeSplit split;
    split.test.assign(all.begin(), all.begin() + n_test);
    split.validation.assign(all.begin() + n_test, all.begin() + n_test + n_val);
    split.train.assign(all.begin() + n_test + n_val, all.end());
    sort_unique(split.test);
    sort_unique(split.validation);
    sort_unique(split.train);
    split.remaining = split.train;
    split.validate();
    return split;
}

EdgeSplit sample_deletion(const Graph& g, const EdgeSplit& split, double ratio,
                          Locality locality, std::uint64_t seed) {
    if (ratio <= 0.0 || ratio > 1.0) throw ConfigError("sample_deletion: ratio must be in (0, 1]");
    if (ratio > 0.05) {
        std::fprintf(stderr, "[gnnd] deletion ratio %.3f above the usual 0.05 cap\n", ratio);
    }
    if (split.test.empty()) throw DataError("sample_deletion: test set is empty");

    const std::size_t want =
        std::size_t(std::floor(ratio * double(split.total_edges())));

    const NodeSet hood = khop_nodes(g, endpoints(split.test), 2);
    EdgeList pool;
    pool.reserve(split.train.size());
    for (const Edge& e : split.train) {
        const bool inside = hood.contains(e.u) || hood.contains(e.v);
        if ((locality == Locality::In) == inside) pool.push_back(e);
    }
    if (pool.size() < want) {
        throw DataError("sample_deletion: candidate pool has " + std::to_string(pool.size()) +
                        " edges, requested " + std::to_string(want));
    }

    EdgeSplit out = split;
    if (want == 0) {
        out.deleted.clear();
        out.remaining = out.train;
        return out;
    }
    Rng rng(derive_seed(seed, 0xde1));
    out.deleted = draw_without_replacement(std::move(pool), want, rng);
    out.remaining = edge_difference(out.train, out.deleted);
    out.validate();
    return out;
}

EdgeList negative_sample(const Graph& g, std::size_t m, const EdgeList& exclude,
                         std::uint64_t seed) {
    const std::int64_t n = g.num_nodes();
    EdgeList excl(exclude);
    sort_unique(excl);
    // count exclusions that are actual non-edges (edges of g are already out)
    std::int64_t excluded_non_edges = 0;
    for (const Edge& e : excl) {
        if (e.u >= 0 && e.v < n && e.u != e.v && !g.has_edge(e.u, e.v)) ++excluded_non_edges;
    }
    const std::int64_t total_pairs = n * (n - 1) / 2;
    const std::int64_t available = total_pairs - g.num_edges() - excluded_non_edges;
    if (std::int64_t(m) > available) {
        throw DataError("negative_sample: requested " + std::to_string(m) + " non-edges, only " +
                        std::to_string(std::max<std::int64_t>(available, 0)) + " available");
    }

    Rng rng(derive_seed(seed, 0x9e9));
    EdgeList out;
    out.reserve(m);
    if (available <= std::int64_t(4 * m) || total_pairs <= 200000) {
        // dense regime: enumerate the pool and draw without replacement
        EdgeList pool;
        pool.reserve(std::size_t(available));
        for (NodeId u = 0; u < n; ++u) {
            auto nb = g.neighbors(u);
            for (NodeId v = u + 1; v < n; ++v) {
                if (std::binary_search(nb.begin(), nb.end(), v)) continue;
                if (contains_edge(excl, Edge{u, v})) continue;
                pool.push_back(Edge{u, v});
            }
        }
        return draw_without_replacement(std::move(pool), m, rng);
    }
    std::set<Edge> seen;
    while (out.size() < m) {
        const NodeId u = NodeId(rng.below(std::uint64_t(n)));
        const NodeId v = NodeId(rng.below(std::uint64_t(n)));
        if (u == v) continue;
        const Edge e = make_edge(u, v);
        if (g.has_edge(e.u, e.v) || contains_edge(excl, e)) continue;
        if (!seen.insert(e).second) continue;
        out.push_back(e);
    }
    sort_unique(out);
    return out;
}

Graph training_graph(const Graph& g, const EdgeSplit& split) {
    return Graph::build(g.num_nodes(), split.train, g.features(), g.labels());
}

void save_split(const EdgeSplit& split, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write split file: " + path);
    auto dump = [&](const EdgeList& edges, const char* tag) {
        for (const Edge& e : edges) out << e.u << '\t' << e.v << '\t' << tag << '\n';
    };
    dump(split.train, "train");
    dump(split.validation, "val");
    dump(split.test, "test");
    dump(split.deleted, "deleted");
}

EdgeSplit load_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open split file: " + path);
    EdgeSplit split;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        NodeId u, v;
        char tag[16];
        if (std::sscanf(line.c_str(), "%d\t%d\t%15s", &u, &v, tag) != 3) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected 'u<TAB>v<TAB>set'");
        }
        const Edge e = make_edge(u, v);
        const std::string t(tag);
        if (t == "train") split.train.push_back(e);
        else if (t == "val") split.validation.push_back(e);
        else if (t == "test") split.test.push_back(e);
        else if (t == "deleted") split.deleted.push_back(e);
        else throw DataError(path + ":" + std::to_string(line_no) + ": unknown set '" + t + "'");
    }
    sort_unique(split.train);
    sort_unique(split.validation);
    sort_unique(split.test);
    sort_unique(split.deleted);
    split.remaining = edge_difference(split.train, split.deleted);
    split.validate();
    return split;
}

}  // namespace gnnd
