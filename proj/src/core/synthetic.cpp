#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace gnnd {

namespace {

std::vector<std::string> split_str(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double num_arg(const std::vector<std::string>& args, std::size_t i, const std::string& name) {
    if (i >= args.size()) throw ConfigError("synthetic spec " + name + ": missing argument");
    try {
        return std::stod(strip(args[i]));
    } catch (const std::exception&) {
        throw ConfigError("synthetic spec " + name + ": bad argument '" + args[i] + "'");
    }
}

}  // namespace

SyntheticSpec SyntheticSpec::parse(const std::string& text) {
    const std::vector<std::string> parts = split_str(text, ';');
    if (parts.empty()) throw ConfigError("empty synthetic spec");
    const std::string head = strip(parts[0]);
    const auto open = head.find('(');
    const auto close = head.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open) {
        throw ConfigError("synthetic spec must look like name(args): " + text);
    }
    const std::string name = strip(head.substr(0, open));
    const std::vector<std::string> args = split_str(head.substr(open + 1, close - open - 1), ',');

    SyntheticSpec spec;
    if (name == "erdos_renyi") {
        spec.kind = Kind::ErdosRenyi;
        spec.n = std::int64_t(num_arg(args, 0, name));
        spec.p = num_arg(args, 1, name);
        if (spec.n <= 0 || spec.p < 0.0 || spec.p > 1.0) {
            throw ConfigError("erdos_renyi: need n > 0 and p in [0, 1]");
        }
    } else if (name == "barabasi_albert") {
        spec.kind = Kind::BarabasiAlbert;
        spec.n = std::int64_t(num_arg(args, 0, name));
        spec.ba_m = std::int64_t(num_arg(args, 1, name));
        if (spec.ba_m < 1 || spec.n <= spec.ba_m) {
            throw ConfigError("barabasi_albert: need n > m >= 1");
        }
    } else if (name == "two_cliques") {
        spec.kind = Kind::TwoCliques;
        spec.n_per = std::int64_t(num_arg(args, 0, name));
        spec.bridges = std::int64_t(num_arg(args, 1, name));
        if (spec.n_per < 2 || spec.bridges < 0 || spec.bridges > spec.n_per) {
            throw ConfigError("two_cliques: need n_per >= 2 and 0 <= bridges <= n_per");
        }
    } else if (name == "sbm") {
        spec.kind = Kind::Sbm;
        spec.n = std::int64_t(num_arg(args, 0, name));
        spec.communities = std::int64_t(num_arg(args, 1, name));
        spec.edges = std::int64_t(num_arg(args, 2, name));
        spec.intra_frac = args.size() > 3 ? num_arg(args, 3, name) : 0.9;
        if (spec.n <= 1 || spec.communities < 1 || spec.communities > spec.n ||
            spec.edges < 0 || spec.intra_frac < 0.0 || spec.intra_frac > 1.0) {
            throw ConfigError("sbm: need n > 1, 1 <= communities <= n, edges >= 0, intra in [0,1]");
        }
    } else {
        throw ConfigError("unknown synthetic generator: " + name);
    }

    for (std::size_t i = 1; i < parts.size(); ++i) {
        const std::string part = strip(parts[i]);
        if (part.empty()) continue;
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw ConfigError("synthetic spec option needs key=value: " + part);
        const std::string key = strip(part.substr(0, eq));
        const std::string value = strip(part.substr(eq + 1));
        if (key == "features") {
            if (value == "degree16") spec.features = Features::DegreeBuckets;
            else if (value == "identity") spec.features = Features::Identity;
            else if (value == "community") spec.features = Features::CommunityCode;
            else throw ConfigError("unknown feature mode: " + value);
        } else if (key == "dim") {
            spec.feature_dim = std::size_t(std::stoul(value));
            if (spec.feature_dim == 0) throw ConfigError("feature dim must be positive");
        } else if (key == "noise") {
            spec.feature_noise = std::stod(value);
        } else {
            throw ConfigError("unknown synthetic spec option: " + key);
        }
    }
    return spec;
}

std::string SyntheticSpec::canonical() const {
    std::ostringstream out;
    switch (kind) {
        case Kind::ErdosRenyi: out << "erdos_renyi(" << n << "," << p << ")"; break;
        case Kind::BarabasiAlbert: out << "barabasi_albert(" << n << "," << ba_m << ")"; break;
        case Kind::TwoCliques: out << "two_cliques(" << n_per << "," << bridges << ")"; break;
        case Kind::Sbm:
            out << "sbm(" << n << "," << communities << "," << edges << "," << intra_frac << ")";
            break;
    }
    out << ";features=";
    switch (features) {
        case Features::DegreeBuckets: out << "degree16"; break;
        case Features::Identity: out << "identity"; break;
        case Features::CommunityCode: out << "community"; break;
    }
    out << ";dim=" << feature_dim << ";noise=" << feature_noise;
    return out.str();
}

namespace {

EdgeList gen_erdos_renyi(std::int64_t n, double p, Rng& rng) {
    EdgeList edges;
    if (p <= 0.0) return edges;
    for (NodeId u = 0; u + 1 < n; ++u) {
        if (p >= 1.0) {
            for (NodeId v = u + 1; v < n; ++v) edges.push_back({u, NodeId(v)});
            continue;
        }
        // geometric skips over the row u+1..n-1
        std::int64_t v = u;
        while (true) {
            const double r = rng.real01();
            v += 1 + std::int64_t(std::floor(std::log1p(-r) / std::log1p(-p)));
            if (v >= n) break;
            edges.push_back({u, NodeId(v)});
        }
    }
    return edges;
}

EdgeList gen_barabasi_albert(std::int64_t n, std::int64_t m, Rng& rng) {
    EdgeList edges;
    std::vector<NodeId> repeated;
    std::vector<NodeId> targets(std::size_t(m));
    for (std::int64_t i = 0; i < m; ++i) targets[std::size_t(i)] = NodeId(i);
    for (std::int64_t source = m; source < n; ++source) {
        for (NodeId t : targets) {
            edges.push_back(make_edge(NodeId(source), t));
            repeated.push_back(t);
            repeated.push_back(NodeId(source));
        }
        std::set<NodeId> next;
        while (std::int64_t(next.size()) < m) {
            next.insert(repeated[std::size_t(rng.below(repeated.size()))]);
        }
        targets.assign(next.begin(), next.end());
    }
    sort_unique(edges);
    return edges;
}

EdgeList gen_two_cliques(std::int64_t n_per, std::int64_t bridges) {
    EdgeList edges;
    for (NodeId u = 0; u < n_per; ++u)
        for (NodeId v = u + 1; v < n_per; ++v) edges.push_back({u, v});
    for (NodeId u = 0; u < n_per; ++u)
        for (NodeId v = u + 1; v < n_per; ++v)
            edges.push_back({NodeId(u + n_per), NodeId(v + n_per)});
    for (std::int64_t b = 0; b < bridges; ++b) {
        edges.push_back({NodeId(b), NodeId(b + n_per)});
    }
    sort_unique(edges);
    return edges;
}

EdgeList gen_sbm(std::int64_t n, const std::vector<std::int32_t>& community,
                 std::int64_t communities, std::int64_t target_edges, double intra_frac,
                 Rng& rng) {
    std::vector<std::vector<NodeId>> members(std::size_t(communities));
    for (NodeId u = 0; u < n; ++u) members[std::size_t(community[std::size_t(u)])].push_back(u);

    // community pick proportional to its intra-pair count
    std::vector<double> cum;
    double total_intra = 0.0;
    for (const auto& mem : members) {
        const double pairs = double(mem.size()) * double(mem.size() - 1) / 2.0;
        total_intra += pairs;
        cum.push_back(total_intra);
    }
    std::int64_t want_intra = std::llround(intra_frac * double(target_edges));
    want_intra = std::min<std::int64_t>(want_intra, std::int64_t(total_intra));
    const std::int64_t want_cross = target_edges - want_intra;

    std::set<Edge> chosen;
    while (std::int64_t(chosen.size()) < want_intra) {
        const double r = rng.real01() * total_intra;
        const std::size_t c =
            std::size_t(std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
        const auto& mem = members[std::min(c, members.size() - 1)];
        if (mem.size() < 2) continue;
        const NodeId a = mem[std::size_t(rng.below(mem.size()))];
        const NodeId b = mem[std::size_t(rng.below(mem.size()))];
        if (a == b) continue;
        chosen.insert(make_edge(a, b));
    }
    std::int64_t cross_count = 0;
    while (cross_count < want_cross) {
        const NodeId a = NodeId(rng.below(std::uint64_t(n)));
        const NodeId b = NodeId(rng.below(std::uint64_t(n)));
        if (a == b || community[std::size_t(a)] == community[std::size_t(b)]) continue;
        if (chosen.insert(make_edge(a, b)).second) ++cross_count;
    }
    return EdgeList(chosen.begin(), chosen.end());
}

Matrix community_code_features(const std::vector<std::int32_t>& community,
                               std::int64_t communities, std::size_t dim, double noise,
                               Rng& rng) {
    const double scale = 1.0 / std::sqrt(double(dim));
    Matrix codes(std::size_t(communities), dim);
    for (double& x : codes.data) x = rng.below(2) ? scale : -scale;
    Matrix f(community.size(), dim);
    for (std::size_t u = 0; u < community.size(); ++u) {
        for (std::size_t c = 0; c < dim; ++c) {
            f.at(u, c) = codes.at(std::size_t(community[u]), c) + noise * rng.normal();
        }
    }
    return f;
}

}  // namespace

Graph generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    Rng rng(derive_seed(seed, fnv1a(spec.canonical())));

    EdgeList edges;
    std::int64_t n = 0;
    std::vector<std::int32_t> community;
    std::int64_t communities = 0;

    switch (spec.kind) {
        case SyntheticSpec::Kind::ErdosRenyi:
            n = spec.n;
            edges = gen_erdos_renyi(n, spec.p, rng);
            break;
        case SyntheticSpec::Kind::BarabasiAlbert:
            n = spec.n;
            edges = gen_barabasi_albert(n, spec.ba_m, rng);
            break;
        case SyntheticSpec::Kind::TwoCliques:
            n = 2 * spec.n_per;
            edges = gen_two_cliques(spec.n_per, spec.bridges);
            communities = 2;
            community.resize(std::size_t(n));
            for (std::int64_t u = 0; u < n; ++u) community[std::size_t(u)] = u < spec.n_per ? 0 : 1;
            break;
        case SyntheticSpec::Kind::Sbm: {
            n = spec.n;
            communities = spec.communities;
            community.resize(std::size_t(n));
            // contiguous blocks of near-equal size
            for (std::int64_t u = 0; u < n; ++u) {
                community[std::size_t(u)] = std::int32_t((u * communities) / n);
            }
            edges = gen_sbm(n, community, communities, spec.edges, spec.intra_frac, rng);
            break;
        }
    }

    // labels: community id folded into at most 7 classes
    std::optional<std::vector<std::int32_t>> labels;
    if (communities > 0) {
        const std::int32_t num_labels = std::int32_t(std::min<std::int64_t>(communities, 7));
        std::vector<std::int32_t> lab(std::size_t(n));
        for (std::size_t u = 0; u < lab.size(); ++u) lab[u] = community[u] % num_labels;
        labels = std::move(lab);
    }

    Graph g = Graph::build(NodeId(n), std::move(edges), Matrix(std::size_t(n), 1), labels);

    switch (spec.features) {
        case SyntheticSpec::Features::DegreeBuckets:
            g = g.with_features(degree_bucket_features(g, spec.feature_dim));
            break;
        case SyntheticSpec::Features::Identity: {
            if (n > 5000) throw ConfigError("identity features capped at 5000 nodes");
            Matrix eye(std::size_t(n), std::size_t(n));
            for (std::size_t u = 0; u < std::size_t(n); ++u) eye.at(u, u) = 1.0;
            g = g.with_features(std::move(eye));
            break;
        }
        case SyntheticSpec::Features::CommunityCode: {
            if (communities == 0) {
                throw ConfigError("community features need a community-structured generator");
            }
            g = g.with_features(community_code_features(community, communities, spec.feature_dim,
                                                        spec.feature_noise, rng));
            break;
        }
    }
    g.validate();
    return g;
}

Graph generate_synthetic(const std::string& spec_text, std::uint64_t seed) {
    return generate_synthetic(SyntheticSpec::parse(spec_text), seed);
}

}  // namespace gnnd
