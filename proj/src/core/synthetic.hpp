#pragma once

#include <string>

#include "graph.hpp"

namespace gnnd {

// Generator spec, parsed from strings like:
//   erdos_renyi(100,0.05)
//   barabasi_albert(200,3)
//   two_cliques(20,1)
//   sbm(500,20,2000,0.9)
// with optional ';key=value' suffixes: features=degree16|identity|community,
// dim=<feature dim>, noise=<feature noise sigma>.
struct SyntheticSpec {
    enum class Kind { ErdosRenyi, BarabasiAlbert, TwoCliques, Sbm };
    enum class Features { DegreeBuckets, Identity, CommunityCode };

    Kind kind = Kind::ErdosRenyi;
    std::int64_t n = 0;             // erdos_renyi / sbm node count
    double p = 0.0;                 // erdos_renyi edge probability
    std::int64_t ba_m = 0;          // barabasi_albert attachments per node
    std::int64_t n_per = 0;         // two_cliques clique size
    std::int64_t bridges = 0;       // two_cliques bridge count
    std::int64_t communities = 0;   // sbm blocks
    std::int64_t edges = 0;         // sbm exact edge count
    double intra_frac = 0.9;        // sbm fraction of intra-community edges

    Features features = Features::DegreeBuckets;
    std::size_t feature_dim = 16;
    double feature_noise = 0.3;

    static SyntheticSpec parse(const std::string& text);
    std::string canonical() const;
};

// Deterministic per (spec, seed). Community-structured graphs (two_cliques,
// sbm) carry block labels; identity features require n <= 5000.
Graph generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);
Graph generate_synthetic(const std::string& spec_text, std::uint64_t seed);

}  // namespace gnnd
