#include "delete_op.hpp"

namespace gnnd {

std::int64_t DeletionOperator::param_count() const {
    std::int64_t total = 0;
    for (std::size_t d : dims) total += std::int64_t(d) * std::int64_t(d);
    return total;
}

DeletionOperator DeletionOperator::clone() const {
    DeletionOperator op;
    op.dims = dims;
    op.masks = masks;
    op.mode = mode;
    op.activation = activation;
    op.w_d.reserve(w_d.size());
    for (const Tensor& w : w_d) op.w_d.push_back(w.clone());
    return op;
}

void DeletionOperator::validate() const {
    if (w_d.size() != dims.size()) throw ConfigError("deletion operator: dims/weights mismatch");
    for (std::size_t i = 0; i < w_d.size(); ++i) {
        if (w_d[i].rows() != dims[i] || w_d[i].cols() != dims[i]) {
            throw ConfigError("deletion operator: weight " + std::to_string(i) + " not square");
        }
    }
    if (!masks.empty() && masks.size() != w_d.size()) {
        throw ConfigError("deletion operator: mask count != active layers");
    }
}

DeletionOperator identity_operator(const GnnModel& model, DelMode mode,
                                   DelActivation activation) {
    DeletionOperator op;
    op.mode = mode;
    op.activation = activation;
    const std::size_t L = model.layer_weights.size();
    const std::size_t first = mode == DelMode::LastLayerOnly ? L - 1 : 0;
    for (std::size_t l = first; l < L; ++l) {
        const std::size_t d = model.layer_dims[l + 1];
        Tensor w({d, d});
        for (std::size_t i = 0; i < d; ++i) w.data()[i * d + i] = 1.0;
        op.w_d.push_back(std::move(w));
        op.dims.push_back(d);
    }
    return op;
}

LayerMasks build_masks(const Graph& g, const NodeSet& seeds, int num_layers, DelMode mode) {
    if (num_layers < 1) throw ConfigError("build_masks: need at least one layer");
    LayerMasks masks;
    const int first = mode == DelMode::LastLayerOnly ? num_layers : 1;
    for (int l = first; l <= num_layers; ++l) {
        const NodeSet hood = khop_nodes(g, seeds, l);
        std::vector<std::uint8_t> mask(std::size_t(g.num_nodes()), 0);
        for (NodeId u : hood.ids) mask[std::size_t(u)] = 1;
        masks.push_back(std::move(mask));
    }
    return masks;
}

LayerMasks build_masks(const Graph& g, const EdgeList& deleted, int num_layers, DelMode mode) {
    if (deleted.empty()) throw DataError("build_masks: empty deletion set");
    return build_masks(g, endpoints(deleted), num_layers, mode);
}

Tensor del_forward(const Tensor& h, const std::vector<std::uint8_t>& mask, const Tensor& w_d,
                   DelActivation activation) {
    return masked_row_map(h, mask, w_d,
                          activation == DelActivation::Sigmoid ? RowMapActivation::Sigmoid
                                                               : RowMapActivation::Linear);
}

NodeEmbeddings unlearned_forward(const SparseMatrix& adj, const Tensor& x, const GnnModel& base,
                                 const DeletionOperator& op, const std::vector<Tensor>* taped_wd) {
    op.validate();
    const std::size_t L = base.layer_weights.size();
    if (op.masks.size() != op.w_d.size()) {
        throw ConfigError("unlearned_forward: operator has no masks built");
    }
    if (taped_wd && taped_wd->size() != op.w_d.size()) {
        throw ConfigError("unlearned_forward: taped weight count mismatch");
    }
    const std::size_t first_active = op.mode == DelMode::LastLayerOnly ? L - 1 : 0;

    NodeEmbeddings emb;
    emb.h.reserve(L + 1);
    emb.h.push_back(x);
    Tensor h = x;
    for (std::size_t l = 0; l < L; ++l) {
        // gradient isolation: each layer consumes a detached input so a loss
        // on layer l's output reaches only W_D^l
        Tensor z = spmm(adj, matmul(h.detached(), base.layer_weights[l].detached()));
        if (l + 1 < L) z = relu(z);
        if (l >= first_active) {
            const std::size_t i = l - first_active;
            const Tensor& w = taped_wd ? (*taped_wd)[i] : op.w_d[i];
            z = del_forward(z, op.masks[i], w, op.activation);
        }
        emb.h.push_back(z);
        h = z;
    }
    return emb;
}

NodeEmbeddings unlearned_forward(const UnlearnedModel& um) {
    const SparseMatrix adj = normalized_adjacency(um.graph_r);
    return unlearned_forward(adj, Tensor::from_matrix(um.graph_r.features()), um.base, um.op);
}

}  // namespace gnnd
