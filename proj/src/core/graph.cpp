#include "graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <queue>
#include <sstream>

namespace gnnd {

void sort_unique(EdgeList& edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

bool contains_edge(const EdgeList& edges, Edge e) {
    return std::binary_search(edges.begin(), edges.end(), e);
}

EdgeList edge_union(const EdgeList& a, const EdgeList& b) {
    EdgeList out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

EdgeList edge_difference(const EdgeList& a, const EdgeList& b) {
    EdgeList out;
    out.reserve(a.size());
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

NodeSet::NodeSet(std::vector<NodeId> raw) : ids(std::move(raw)) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

bool NodeSet::contains(NodeId u) const {
    return std::binary_search(ids.begin(), ids.end(), u);
}

NodeSet endpoints(const EdgeList& edges) {
    std::vector<NodeId> out;
    out.reserve(edges.size() * 2);
    for (const Edge& e : edges) {
        out.push_back(e.u);
        out.push_back(e.v);
    }
    return NodeSet(std::move(out));
}

Graph Graph::build(NodeId num_nodes, EdgeList edges, Matrix features,
                   std::optional<std::vector<std::int32_t>> labels) {
    if (num_nodes < 0) throw DataError("graph: negative node count");
    sort_unique(edges);
    for (const Edge& e : edges) {
        if (e.u < 0 || e.v >= num_nodes) {
            throw DataError("graph: edge endpoint out of range: " + std::to_string(e.u) +
                            "," + std::to_string(e.v));
        }
        if (e.u == e.v) throw DataError("graph: self-loop in edge set");
    }
    if (features.rows != std::size_t(num_nodes)) {
        throw DataError("graph: feature row count " + std::to_string(features.rows) +
                        " != num_nodes " + std::to_string(num_nodes));
    }
    if (labels && labels->size() != std::size_t(num_nodes)) {
        throw DataError("graph: label count != num_nodes");
    }

    Graph g;
    g.n_ = num_nodes;
    g.features_ = std::move(features);
    g.labels_ = std::move(labels);

    std::vector<std::int64_t> deg(num_nodes, 0);
    for (const Edge& e : edges) {
        ++deg[e.u];
        ++deg[e.v];
    }
    g.offsets_.assign(num_nodes + 1, 0);
    for (NodeId u = 0; u < num_nodes; ++u) g.offsets_[u + 1] = g.offsets_[u] + deg[u];
    g.neighbors_.resize(std::size_t(g.offsets_[num_nodes]));
    std::vector<std::int64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const Edge& e : edges) {
        g.neighbors_[std::size_t(cursor[e.u]++)] = e.v;
        g.neighbors_[std::size_t(cursor[e.v]++)] = e.u;
    }
    for (NodeId u = 0; u < num_nodes; ++u) {
        auto b = g.neighbors_.begin() + g.offsets_[u];
        auto e = g.neighbors_.begin() + g.offsets_[u + 1];
        std::sort(b, e);
    }
    g.edges_ = std::move(edges);
    return g;
}

std::int64_t Graph::num_edges() const { return std::int64_t(edges_.size()); }

std::span<const NodeId> Graph::neighbors(NodeId u) const {
    check_node(u);
    return {neighbors_.data() + offsets_[u], std::size_t(offsets_[u + 1] - offsets_[u])};
}

std::int64_t Graph::degree(NodeId u) const {
    check_node(u);
    return offsets_[u + 1] - offsets_[u];
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    check_node(u);
    check_node(v);
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

Graph Graph::with_features(Matrix features) const {
    if (features.rows != std::size_t(n_)) throw DataError("with_features: row count mismatch");
    Graph g = *this;
    g.features_ = std::move(features);
    return g;
}

void Graph::check_node(NodeId u) const {
    if (u < 0 || u >= n_) {
        throw DataError("node id out of range: " + std::to_string(u));
    }
}

void Graph::validate() const {
    if (offsets_.size() != std::size_t(n_) + 1) throw DataError("graph: bad offsets length");
    if (offsets_.front() != 0 || offsets_.back() != std::int64_t(neighbors_.size())) {
        throw DataError("graph: offsets do not cover neighbor array");
    }
    for (NodeId u = 0; u < n_; ++u) {
        if (offsets_[u + 1] < offsets_[u]) throw DataError("graph: offsets not monotone");
        for (std::int64_t i = offsets_[u]; i < offsets_[u + 1]; ++i) {
            NodeId v = neighbors_[std::size_t(i)];
            if (v < 0 || v >= n_) throw DataError("graph: neighbor id out of range");
            if (v == u) throw DataError("graph: stored self-loop");
            if (i > offsets_[u] && neighbors_[std::size_t(i - 1)] >= v) {
                throw DataError("graph: neighbor list not sorted-unique");
            }
            if (!has_edge(v, u)) throw DataError("graph: adjacency not symmetric");
        }
    }
    if (features_.rows != std::size_t(n_)) throw DataError("graph: feature rows mismatch");
}

namespace {

NodeId parse_node_id(std::string_view tok, int line_no, const std::string& path) {
    NodeId value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || value < 0) {
        throw DataError(path + ":" + std::to_string(line_no) + ": malformed node id '" +
                        std::string(tok) + "'");
    }
    return value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

Graph load_edge_list(const std::string& path, std::size_t feature_dim_hint, LoadStats* stats) {
    return load_graph(path, std::nullopt, std::nullopt, feature_dim_hint, stats);
}

Graph load_graph(const std::string& edge_path,
                 const std::optional<std::string>& features_path,
                 const std::optional<std::string>& labels_path,
                 std::size_t feature_dim_hint, LoadStats* stats) {
    std::ifstream in(edge_path);
    if (!in) throw DataError("cannot open edge list: " + edge_path);

    LoadStats local;
    EdgeList edges;
    NodeId max_id = -1;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        const std::size_t tab = sv.find_first_of("\t ");
        if (tab == std::string_view::npos) {
            throw DataError(edge_path + ":" + std::to_string(line_no) +
                            ": expected 'u<TAB>v'");
        }
        const NodeId a = parse_node_id(trim(sv.substr(0, tab)), line_no, edge_path);
        const NodeId b = parse_node_id(trim(sv.substr(tab + 1)), line_no, edge_path);
        ++local.rows_read;
        if (a == b) {
            ++local.dropped_self_loops;
            continue;
        }
        edges.push_back(make_edge(a, b));
        max_id = std::max({max_id, a, b});
    }
    const std::size_t before = edges.size();
    sort_unique(edges);
    local.dropped_duplicates = std::int64_t(before - edges.size());
    if (local.dropped_self_loops + local.dropped_duplicates > 0) {
        std::fprintf(stderr, "[gnnd] %s: dropped %lld self-loop and %lld duplicate rows\n",
                     edge_path.c_str(), (long long)local.dropped_self_loops,
                     (long long)local.dropped_duplicates);
    }

    const NodeId n = max_id + 1;
    Matrix features;
    if (features_path) {
        features = load_features_csv(*features_path, std::size_t(n));
    }
    std::optional<std::vector<std::int32_t>> labels;
    if (labels_path) labels = load_labels_csv(*labels_path, std::size_t(n));

    Graph g;
    if (features_path) {
        g = Graph::build(n, std::move(edges), std::move(features), std::move(labels));
    } else {
        // build with placeholder features, then derive degree buckets
        const std::size_t dim = feature_dim_hint ? feature_dim_hint : 16;
        g = Graph::build(n, std::move(edges), Matrix(std::size_t(n), dim), std::move(labels));
        g = g.with_features(degree_bucket_features(g, dim));
    }
    if (stats) *stats = local;
    return g;
}

void save_graph(const Graph& g, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir + "/edges.tsv");
        if (!out) throw DataError("cannot write " + dir + "/edges.tsv");
        for (const Edge& e : g.edges()) {
            out << e.u << '\t' << e.v << '\n';
            out << e.v << '\t' << e.u << '\n';
        }
    }
    {
        std::ofstream out(dir + "/features.csv");
        const Matrix& f = g.features();
        out.precision(17);
        for (std::size_t r = 0; r < f.rows; ++r) {
            for (std::size_t c = 0; c < f.cols; ++c) {
                if (c) out << ',';
                out << f.at(r, c);
            }
            out << '\n';
        }
    }
    if (g.labels()) {
        std::ofstream out(dir + "/labels.csv");
        const auto& lab = *g.labels();
        for (std::size_t i = 0; i < lab.size(); ++i) {
            out << i << ',' << lab[i] << '\n';
        }
    }
}

Matrix load_features_csv(const std::string& path, std::size_t num_nodes) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open features: " + path);
    std::vector<double> values;
    std::size_t cols = 0, rows = 0;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        std::size_t row_cols = 0;
        std::stringstream ss{std::string(sv)};
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw DataError(path + ":" + std::to_string(line_no) + ": bad number '" +
                                cell + "'");
            }
            ++row_cols;
        }
        if (cols == 0) {
            cols = row_cols;
        } else if (row_cols != cols) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(cols) + " columns, got " + std::to_string(row_cols));
        }
        ++rows;
    }
    if (rows != num_nodes) {
        throw DataError(path + ": feature rows " + std::to_string(rows) +
                        " != node count " + std::to_string(num_nodes));
    }
    Matrix m(rows, cols);
    m.data = std::move(values);
    return m;
}

std::vector<std::int32_t> load_labels_csv(const std::string& path, std::size_t num_nodes) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open labels: " + path);
    std::vector<std::int32_t> labels(num_nodes, -1);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        const std::size_t comma = sv.find(',');
        if (comma == std::string_view::npos) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected 'node_id,label'");
        }
        const NodeId id = parse_node_id(trim(sv.substr(0, comma)), line_no, path);
        const NodeId lab = parse_node_id(trim(sv.substr(comma + 1)), line_no, path);
        if (std::size_t(id) >= num_nodes) {
            throw DataError(path + ":" + std::to_string(line_no) + ": node id out of range");
        }
        labels[std::size_t(id)] = lab;
    }
    return labels;
}

Matrix degree_bucket_features(const Graph& g, std::size_t dim) {
    Matrix f(std::size_t(g.num_nodes()), dim);
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        const std::size_t bucket = std::min<std::size_t>(std::size_t(g.degree(u)), dim - 1);
        f.at(std::size_t(u), bucket) = 1.0;
    }
    return f;
}

NodeSet khop_nodes(const Graph& g, const NodeSet& seeds, int k) {
    if (k < 0) throw ConfigError("khop_nodes: k must be >= 0");
    for (NodeId s : seeds.ids) g.check_node(s);

    std::vector<int> dist(std::size_t(g.num_nodes()), -1);
    std::queue<NodeId> q;
    for (NodeId s : seeds.ids) {
        dist[std::size_t(s)] = 0;
        q.push(s);
    }
    std::vector<NodeId> found(seeds.ids);
    while (!q.empty()) {
        const NodeId u = q.front();
        q.pop();
        if (dist[std::size_t(u)] >= k) continue;
        for (NodeId v : g.neighbors(u)) {
            if (dist[std::size_t(v)] < 0) {
                dist[std::size_t(v)] = dist[std::size_t(u)] + 1;
                found.push_back(v);
                q.push(v);
            }
        }
    }
    return NodeSet(std::move(found));
}

Graph delete_edges(const Graph& g, const EdgeList& to_delete) {
    EdgeList del(to_delete);
    sort_unique(del);
    for (const Edge& e : del) {
        if (!contains_edge(g.edges(), e)) {
            throw DataError("delete_edges: edge not present: (" + std::to_string(e.u) + "," +
                            std::to_string(e.v) + ")");
        }
    }
    EdgeList kept = edge_difference(g.edges(), del);
    return Graph::build(g.num_nodes(), std::move(kept), g.features(), g.labels());
}

std::pair<Graph, EdgeList> delete_nodes(const Graph& g, const NodeSet& nodes) {
    for (NodeId u : nodes.ids) g.check_node(u);
    EdgeList removed;
    for (NodeId u : nodes.ids) {
        for (NodeId v : g.neighbors(u)) removed.push_back(make_edge(u, v));
    }
    sort_unique(removed);
    EdgeList kept = edge_difference(g.edges(), removed);
    Graph out = Graph::build(g.num_nodes(), std::move(kept), g.features(), g.labels());
    return {std::move(out), std::move(removed)};
}

}  // namespace gnnd
