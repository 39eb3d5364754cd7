#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace gnnd {

namespace {

void check_binary(std::span<const double> scores, std::span<const int> labels, const char* op) {
    if (scores.size() != labels.size()) {
        throw DataError(std::string(op) + ": score/label length mismatch");
    }
    std::size_t pos = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw DataError(std::string(op) + ": labels must be 0/1");
        pos += std::size_t(l);
    }
    if (pos == 0 || pos == labels.size()) {
        throw DataError(std::string(op) + ": undefined metric, both classes required");
    }
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
    check_binary(scores, labels, "auroc");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // average ranks over tie groups, then the Mann-Whitney statistic
    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * double(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) {
                rank_sum_pos += avg_rank;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    const double u = rank_sum_pos - double(n_pos) * double(n_pos + 1) / 2.0;
    return u / (double(n_pos) * double(n_neg));
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
    check_binary(scores, labels, "auprc");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::size_t total_pos = 0;
    for (int l : labels) total_pos += std::size_t(l);

    double area = 0.0;
    double recall_prev = 0.0;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) ++tp;
            else ++fp;
        }
        const double precision = double(tp) / double(tp + fp);
        const double recall = double(tp) / double(total_pos);
        area += (recall - recall_prev) * precision;
        recall_prev = recall;
        i = j;
    }
    return area;
}

std::pair<double, double> eval_deleted(const NodeEmbeddings& emb, const EdgeList& remaining,
                                       const EdgeList& deleted, std::uint64_t seed) {
    if (deleted.empty()) throw DataError("eval_deleted: empty deleted set, metric undefined");
    if (remaining.size() < deleted.size()) {
        throw DataError("eval_deleted: need at least |deleted| remaining edges");
    }
    EdgeList pool = remaining;
    Rng rng(derive_seed(seed, 0xed));
    for (std::size_t i = 0; i < deleted.size(); ++i) {
        const std::size_t j = i + std::size_t(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(deleted.size());

    std::vector<double> scores = decode_edges(emb, deleted);
    std::vector<int> labels(deleted.size(), 0);
    const std::vector<double> kept = decode_edges(emb, pool);
    scores.insert(scores.end(), kept.begin(), kept.end());
    labels.insert(labels.end(), kept.size(), 1);
    return {auroc(scores, labels), auprc(scores, labels)};
}

double mi_ratio(const NodeEmbeddings& before, const NodeEmbeddings& after,
                const EdgeList& deleted) {
    if (deleted.empty()) throw DataError("mi_ratio: empty deleted set");
    double mean_before = 0.0, mean_after = 0.0;
    for (const Edge& e : deleted) {
        mean_before += decode_edge(before, e.u, e.v);
        mean_after += decode_edge(after, e.u, e.v);
    }
    mean_before /= double(deleted.size());
    mean_after /= double(deleted.size());
    return mean_before / std::max(mean_after, 1e-9);
}

double mi_ratio(const GnnModel& model_before, const GnnModel& model_after, const Graph& g,
                const Graph& g_r, const EdgeList& deleted) {
    const NodeEmbeddings before = forward(g, model_before);
    const NodeEmbeddings after = forward(g_r, model_after);
    return mi_ratio(before, after, deleted);
}

double spectral_norm(const Matrix& w, int iters, double tol) {
    if (w.rows == 0 || w.cols == 0) return 0.0;
    Rng rng(0x5eed);
    std::vector<double> v(w.cols);
    for (double& x : v) x = rng.normal();
    auto normalize = [](std::vector<double>& x) {
        double s = 0.0;
        for (double e : x) s += e * e;
        s = std::sqrt(s);
        if (s > 0.0) {
            for (double& e : x) e /= s;
        }
        return s;
    };
    normalize(v);

    std::vector<double> wv(w.rows), wtwv(w.cols);
    double sigma = 0.0;
    for (int it = 0; it < iters; ++it) {
        for (std::size_t r = 0; r < w.rows; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < w.cols; ++c) s += w.at(r, c) * v[c];
            wv[r] = s;
        }
        double norm_wv = 0.0;
        for (double e : wv) norm_wv += e * e;
        norm_wv = std::sqrt(norm_wv);
        if (norm_wv == 0.0) return 0.0;
        const double prev = sigma;
        sigma = norm_wv;
        std::fill(wtwv.begin(), wtwv.end(), 0.0);
        for (std::size_t r = 0; r < w.rows; ++r) {
            for (std::size_t c = 0; c < w.cols; ++c) wtwv[c] += w.at(r, c) * wv[r];
        }
        v = wtwv;
        normalize(v);
        if (it > 0 && std::abs(sigma - prev) < tol) break;
    }
    return sigma;
}

Theorem1Result theorem1_check(std::span<const double> z_u, std::span<const double> z_v,
                              const Matrix& w_d) {
    if (z_u.size() != z_v.size() || z_u.size() != w_d.cols || w_d.rows != w_d.cols) {
        throw DataError("theorem1_check: dimension mismatch");
    }
    auto unit = [](std::span<const double> z) {
        double s = 0.0;
        for (double e : z) s += e * e;
        s = std::sqrt(s);
        if (s == 0.0) throw DataError("theorem1_check: cannot normalize a zero vector");
        std::vector<double> out(z.begin(), z.end());
        for (double& e : out) e /= s;
        return out;
    };
    const std::vector<double> zu = unit(z_u);
    const std::vector<double> zv = unit(z_v);

    auto transform = [&](const std::vector<double>& z) {
        std::vector<double> out(w_d.rows, 0.0);
        for (std::size_t r = 0; r < w_d.rows; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < w_d.cols; ++c) s += w_d.at(r, c) * z[c];
            out[r] = 1.0 / (1.0 + std::exp(-s));
        }
        return unit(out);
    };
    const std::vector<double> zu2 = transform(zu);
    const std::vector<double> zv2 = transform(zv);

    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    double dist2 = 0.0;
    for (std::size_t i = 0; i < zu.size(); ++i) {
        const double d = zu[i] - zv[i];
        dist2 += d * d;
    }

    Theorem1Result r;
    r.lhs = dot(zu, zv) - dot(zu2, zv2);
    const double norm = spectral_norm(w_d);
    r.rhs = -0.5 * (1.0 + norm * norm) * dist2;
    r.holds = r.lhs >= r.rhs - 1e-9;
    return r;
}

std::pair<double, double> node_scores(std::span<const std::int32_t> preds,
                                      std::span<const std::int32_t> truth) {
    if (preds.size() != truth.size() || preds.empty()) {
        throw DataError("node_scores: prediction/truth length mismatch");
    }
    std::int32_t num_classes = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        num_classes = std::max({num_classes, preds[i] + 1, truth[i] + 1});
    }
    std::size_t correct = 0;
    std::vector<std::size_t> tp(std::size_t(num_classes), 0), fp(std::size_t(num_classes), 0),
        fn(std::size_t(num_classes), 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] == truth[i]) {
            ++correct;
            ++tp[std::size_t(truth[i])];
        } else {
            ++fp[std::size_t(preds[i])];
            ++fn[std::size_t(truth[i])];
        }
    }
    double f1_sum = 0.0;
    for (std::size_t c = 0; c < std::size_t(num_classes); ++c) {
        const double denom = double(2 * tp[c] + fp[c] + fn[c]);
        f1_sum += denom > 0.0 ? 2.0 * double(tp[c]) / denom : 0.0;
    }
    return {double(correct) / double(preds.size()), f1_sum / double(num_classes)};
}

std::string EvalReport::to_json() const {
    nlohmann::ordered_json j;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("auroc_test", auroc_test);
    put("auprc_test", auprc_test);
    put("auroc_deleted", auroc_deleted);
    put("auprc_deleted", auprc_deleted);
    put("mi_ratio", mi_ratio);
    put("node_accuracy", node_accuracy);
    put("node_f1", node_f1);
    j["wall_time_seconds"] = wall_time_seconds;
    j["delop_params"] = delop_params;
    return j.dump();
}

EvalReport EvalReport::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    EvalReport r;
    auto get = [&](const char* key) -> std::optional<double> {
        if (j.contains(key)) return j[key].get<double>();
        return std::nullopt;
    };
    r.auroc_test = get("auroc_test");
    r.auprc_test = get("auprc_test");
    r.auroc_deleted = get("auroc_deleted");
    r.auprc_deleted = get("auprc_deleted");
    r.mi_ratio = get("mi_ratio");
    r.node_accuracy = get("node_accuracy");
    r.node_f1 = get("node_f1");
    r.wall_time_seconds = j.value("wall_time_seconds", 0.0);
    r.delop_params = j.value("delop_params", std::int64_t(0));
    return r;
}

}  // namespace gnnd
