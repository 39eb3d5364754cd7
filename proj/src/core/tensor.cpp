#include "tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gnnd {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

using Storage = std::shared_ptr<const std::vector<double>>;

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t(1), std::multiplies<>());
}

void check_finite(std::span<const double> v, const char* op) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NumericError(std::string(op) + ": produced a non-finite value");
        }
    }
}

void require_2d(const Tensor& t, const char* op) {
    if (t.shape().size() != 2) throw DataError(std::string(op) + ": expected a 2-d tensor");
}

Tape* common_tape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.tape() && b.tape() && a.tape() != b.tape()) {
        throw ConfigError(std::string(op) + ": operands live on different tapes");
    }
    return a.tape() ? a.tape() : b.tape();
}

bool taped_needs_grad(const Tensor& t) {
    return t.tape() && t.tape()->node_needs_grad(t.node_id());
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Registers `out` on the tape (when present) with the given backward rule.
Tensor record(Tape* tape, Tensor out, bool needs_grad,
              std::function<void(Tape&, const std::vector<double>&)> backward) {
    if (!tape) return out;
    const int node = tape->add_node(out.shape(), needs_grad,
                                    needs_grad ? std::move(backward) : nullptr);
    return tape->adopt(std::move(out), node);
}

void accumulate(Tape& tp, int node, const std::function<void(std::vector<double>&)>& fn) {
    if (node < 0 || !tp.node_needs_grad(node)) return;
    fn(tp.grad_buffer(node));
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : values_(std::make_shared<std::vector<double>>(shape_product(shape), 0.0)),
      shape_(std::move(shape)) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : values_(std::make_shared<std::vector<double>>(std::move(values))), shape_(std::move(shape)) {
    if (values_->size() != shape_product(shape_)) {
        throw DataError("tensor: value count does not match shape");
    }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::from_matrix(const Matrix& m) { return Tensor({m.rows, m.cols}, m.data); }

double Tensor::item() const {
    if (size() != 1) throw DataError("item(): tensor is not scalar");
    return (*values_)[0];
}

Matrix Tensor::to_matrix() const {
    Matrix m(rows(), cols());
    m.data.assign(values_->begin(), values_->end());
    return m;
}

Tensor Tensor::detached() const {
    Tensor t = *this;
    t.tape_ = nullptr;
    t.node_ = -1;
    return t;
}

Tensor Tensor::clone() const {
    Tensor t;
    t.values_ = std::make_shared<std::vector<double>>(*values_);
    t.shape_ = shape_;
    return t;
}

std::span<const double> Tensor::grad() const {
    if (!tape_ || node_ < 0) return {};
    return tape_->grad(*this);
}

void SparseMatrix::validate() const {
    if (offsets.size() != rows + 1 || offsets.front() != 0 ||
        offsets.back() != std::int64_t(indices.size()) || indices.size() != values.size()) {
        throw DataError("sparse matrix: inconsistent CSR arrays");
    }
    for (std::size_t r = 0; r < rows; ++r) {
        if (offsets[r + 1] < offsets[r]) throw DataError("sparse matrix: offsets not monotone");
    }
    for (std::int32_t c : indices) {
        if (c < 0 || std::size_t(c) >= cols) throw DataError("sparse matrix: column out of range");
    }
}

Tensor Tape::watch(const Tensor& t, bool requires_grad) {
    if (!t.defined()) throw ConfigError("watch: undefined tensor");
    const int node = add_node(t.shape(), requires_grad, nullptr);
    return adopt(t, node);
}

int Tape::add_node(std::vector<std::size_t> shape, bool needs_grad,
                   std::function<void(Tape&, const std::vector<double>&)> backward) {
    nodes_.push_back(Node{std::move(shape), {}, needs_grad, std::move(backward)});
    return int(nodes_.size()) - 1;
}

std::vector<double>& Tape::grad_buffer(int node) {
    Node& n = nodes_[std::size_t(node)];
    if (n.grad.empty()) n.grad.assign(shape_product(n.shape), 0.0);
    return n.grad;
}

Tensor Tape::adopt(Tensor t, int node) {
    t.tape_ = this;
    t.node_ = node;
    return t;
}

void Tape::backward(const Tensor& loss) {
    if (loss.tape() != this || loss.node_id() < 0) {
        throw ConfigError("backward: loss is not on this tape");
    }
    if (loss.size() != 1) throw ConfigError("backward: loss must be scalar");
    for (Node& n : nodes_) n.grad.clear();
    grad_buffer(loss.node_id())[0] = 1.0;
    for (int i = loss.node_id(); i >= 0; --i) {
        Node& n = nodes_[std::size_t(i)];
        if (!n.needs_grad || n.grad.empty() || !n.backward) continue;
        n.backward(*this, n.grad);
    }
}

std::span<const double> Tape::grad(const Tensor& t) const {
    if (t.tape() != this || t.node_id() < 0) throw ConfigError("grad: tensor not on this tape");
    const Node& n = nodes_[std::size_t(t.node_id())];
    return {n.grad.data(), n.grad.size()};
}

bool Tape::requires_grad(const Tensor& t) const {
    return t.tape() == this && t.node_id() >= 0 && nodes_[std::size_t(t.node_id())].needs_grad;
}

// ---------------------------------------------------------------------------
// ops
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul");
    require_2d(b, "matmul");
    if (a.cols() != b.rows()) {
        throw DataError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                        std::to_string(b.rows()) + " differ");
    }
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    Tensor out({n, m});
    {
        ConstMap A(a.data().data(), n, k), B(b.data().data(), k, m);
        MutMap O(out.data().data(), n, m);
        O.noalias() = A * B;
    }
    check_finite(out.data(), "matmul");

    Tape* tape = common_tape(a, b, "matmul");
    const bool needs = taped_needs_grad(a) || taped_needs_grad(b);
    Storage as = a.storage(), bs = b.storage();
    const int an = a.node_id(), bn = b.node_id();
    return record(tape, std::move(out), needs, [=](Tape& tp, const std::vector<double>& g) {
        ConstMap A(as->data(), n, k), B(bs->data(), k, m), G(g.data(), n, m);
        accumulate(tp, an, [&](std::vector<double>& ga) {
            MutMap(ga.data(), n, k).noalias() += G * B.transpose();
        });
        accumulate(tp, bn, [&](std::vector<double>& gb) {
            MutMap(gb.data(), k, m).noalias() += A.transpose() * G;
        });
    });
}

Tensor spmm(const SparseMatrix& s, const Tensor& d) {
    require_2d(d, "spmm");
    if (s.cols != d.rows()) {
        throw DataError("spmm: sparse cols " + std::to_string(s.cols) + " != dense rows " +
                        std::to_string(d.rows()));
    }
    const std::size_t m = d.cols();
    Tensor out({s.rows, m});
    {
        auto dv = d.data();
        auto ov = out.data();
        for (std::size_t r = 0; r < s.rows; ++r) {
            double* orow = ov.data() + r * m;
            for (std::int64_t i = s.offsets[r]; i < s.offsets[r + 1]; ++i) {
                const double w = s.values[std::size_t(i)];
                const double* drow = dv.data() + std::size_t(s.indices[std::size_t(i)]) * m;
                for (std::size_t c = 0; c < m; ++c) orow[c] += w * drow[c];
            }
        }
    }
    check_finite(out.data(), "spmm");

    const bool needs = taped_needs_grad(d);
    const int dn = d.node_id();
    const SparseMatrix* sp = &s;
    // backward is s^T * g, done by scattering each output row's gradient
    return record(d.tape(), std::move(out), needs, [=](Tape& tp, const std::vector<double>& g) {
        accumulate(tp, dn, [&](std::vector<double>& gd) {
            for (std::size_t r = 0; r < sp->rows; ++r) {
                const double* grow = g.data() + r * m;
                for (std::int64_t i = sp->offsets[r]; i < sp->offsets[r + 1]; ++i) {
                    const double w = sp->values[std::size_t(i)];
                    double* gdrow = gd.data() + std::size_t(sp->indices[std::size_t(i)]) * m;
                    for (std::size_t c = 0; c < m; ++c) gdrow[c] += w * grow[c];
                }
            }
        });
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw DataError("add: shape mismatch");
    Tensor out(a.shape());
    auto ov = out.data();
    auto av = a.data(), bv = b.data();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
    check_finite(out.data(), "add");

    Tape* tape = common_tape(a, b, "add");
    const bool needs = taped_needs_grad(a) || taped_needs_grad(b);
    const int an = a.node_id(), bn = b.node_id();
    return record(tape, std::move(out), needs, [=](Tape& tp, const std::vector<double>& g) {
        accumulate(tp, an, [&](std::vector<double>& ga) {
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        });
        accumulate(tp, bn, [&](std::vector<double>& gb) {
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
        });
    });
}

Tensor scale(const Tensor& a, double c) {
    Tensor out(a.shape());
    auto ov = out.data();
    auto av = a.data();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = c * av[i];
    check_finite(out.data(), "scale");

    const bool needs = taped_needs_grad(a);
    const int an = a.node_id();
    return record(a.tape(), std::move(out), needs, [=](Tape& tp, const std::vector<double>& g) {
        accumulate(tp, an, [&](std::vector<double>& ga) {
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
        });
    });
}

Tensor sigmoid(const Tensor& x) {
    Tensor out(x.shape());
    auto ov = out.data();
    auto xv = x.data();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = stable_sigmoid(xv[i]);
    check_finite(out.data(), "sigmoid");

    const bool needs = taped_needs_grad(x);
    const int xn = x.node_id();
    Storage os = out.storage();
    return record(x.tape(), std::move(out), needs, [=](Tape& tp, const std::vector<double>& g) {
        accumulate(tp, xn, [&](std::vector<double>& gx) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double o = (*os)[i];
                gx[i] += g[i] * o * (1.0 - o);
            }
        });
    });
}

Tensor relu(const Tensor& x) {
    Tensor out(x.shape());
    auto ov = out.data();
    auto xv = x.data();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = xv[i] > 0.0 ? xv[i] : 0.0;
    check_finite(out.data(), "relu");

    const bool needs = taped_needs_grad(x);
    const int xn = x.node_id();
    Storage xs = x.storage();
    return record(x.tape(), std::move(out), needs, [=](Tape& tp, const std::vector<double>& g) {
        accumulate(tp, xn, [&](std::vector<double>& gx) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                if ((*xs)[i] > 0.0) gx[i] += g[i];
            }
        });
    });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    require_2d(a, "concat_cols");
    require_2d(b, "concat_cols");
    if (a.rows() != b.rows()) throw DataError("concat_cols: row counts differ");
    const std::size_t n = a.rows(), ca = a.cols(), cb = b.cols();
    Tensor out({n, ca + cb});
    auto ov = out.data();
    auto av = a.data(), bv = b.data();
    for (std::size_t r = 0; r < n; ++r) {
        std::copy_n(av.data() + r * ca, ca, ov.data() + r * (ca + cb));
        std::copy_n(bv.data() + r * cb, cb, ov.data() + r * (ca + cb) + ca);
    }

    Tape* tape = common_tape(a, b, "concat_cols");
    const bool needs = taped_needs_grad(a) || taped_needs_grad(b);
    const int an = a.node_id(), bn = b.node_id();
    return record(tape, std::move(out), needs, [=](Tape& tp, const std::vector<double>& g) {
        accumulate(tp, an, [&](std::vector<double>& ga) {
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < ca; ++c) ga[r * ca + c] += g[r * (ca + cb) + c];
        });
        accumulate(tp, bn, [&](std::vector<double>& gb) {
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < cb; ++c) gb[r * cb + c] += g[r * (ca + cb) + ca + c];
        });
    });
}

Tensor gather_rows(const Tensor& x, const std::vector<std::int32_t>& ids) {
    require_2d(x, "gather_rows");
    const std::size_t n = x.rows(), c = x.cols(), m = ids.size();
    for (std::int32_t id : ids) {
        if (id < 0 || std::size_t(id) >= n) {
            throw DataError("gather_rows: row id out of range: " + std::to_string(id));
        }
    }
    Tensor out({m, c});
    auto ov = out.data();
    auto xv = x.data();
    for (std::size_t i = 0; i < m; ++i) {
        std::copy_n(xv.data() + std::size_t(ids[i]) * c, c, ov.data() + i * c);
    }

    const bool needs = taped_needs_grad(x);
    const int xn = x.node_id();
    return record(x.tape(), std::move(out), needs,
                  [=, ids = ids](Tape& tp, const std::vector<double>& g) {
                      accumulate(tp, xn, [&](std::vector<double>& gx) {
                          for (std::size_t i = 0; i < m; ++i) {
                              double* row = gx.data() + std::size_t(ids[i]) * c;
                              const double* grow = g.data() + i * c;
                              for (std::size_t j = 0; j < c; ++j) row[j] += grow[j];
                          }
                      });
                  });
}

Tensor rowwise_dot(const Tensor& a, const Tensor& b) {
    require_2d(a, "rowwise_dot");
    require_2d(b, "rowwise_dot");
    if (a.shape() != b.shape()) throw DataError("rowwise_dot: shape mismatch");
    const std::size_t n = a.rows(), c = a.cols();
    Tensor out({n});
    auto ov = out.data();
    auto av = a.data(), bv = b.data();
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += av[r * c + j] * bv[r * c + j];
        ov[r] = s;
    }
    check_finite(out.data(), "rowwise_dot");

    Tape* tape = common_tape(a, b, "rowwise_dot");
    const bool needs = taped_needs_grad(a) || taped_needs_grad(b);
    Storage as = a.storage(), bs = b.storage();
    const int an = a.node_id(), bn = b.node_id();
    return record(tape, std::move(out), needs, [=](Tape& tp, const std::vector<double>& g) {
        accumulate(tp, an, [&](std::vector<double>& ga) {
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t j = 0; j < c; ++j) ga[r * c + j] += g[r] * (*bs)[r * c + j];
        });
        accumulate(tp, bn, [&](std::vector<double>& gb) {
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t j = 0; j < c; ++j) gb[r * c + j] += g[r] * (*as)[r * c + j];
        });
    });
}

Tensor mse(const Tensor& pred, const Tensor& target) {
    if (pred.shape() != target.shape()) throw DataError("mse: shape mismatch");
    const std::size_t n = pred.size();
    if (n == 0) return Tensor::scalar(0.0);
    auto pv = pred.data(), tv = target.data();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pv[i] - tv[i];
        s += d * d;
    }
    Tensor out = Tensor::scalar(s / double(n));
    check_finite(out.data(), "mse");

    Tape* tape = common_tape(pred, target, "mse");
    const bool needs = taped_needs_grad(pred) || taped_needs_grad(target);
    Storage ps = pred.storage(), ts = target.storage();
    const int pn = pred.node_id(), tn = target.node_id();
    return record(tape, std::move(out), needs, [=](Tape& tp, const std::vector<double>& g) {
        const double c = 2.0 * g[0] / double(n);
        accumulate(tp, pn, [&](std::vector<double>& gp) {
            for (std::size_t i = 0; i < n; ++i) gp[i] += c * ((*ps)[i] - (*ts)[i]);
        });
        accumulate(tp, tn, [&](std::vector<double>& gt) {
            for (std::size_t i = 0; i < n; ++i) gt[i] -= c * ((*ps)[i] - (*ts)[i]);
        });
    });
}

Tensor bce_with_logits(const Tensor& logits, const Tensor& labels) {
    if (logits.shape() != labels.shape()) throw DataError("bce_with_logits: shape mismatch");
    const std::size_t n = logits.size();
    if (n == 0) return Tensor::scalar(0.0);
    auto xv = logits.data(), yv = labels.data();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = xv[i], y = yv[i];
        s += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
    }
    Tensor out = Tensor::scalar(s / double(n));
    check_finite(out.data(), "bce_with_logits");

    // labels are a constant target; gradient flows to logits only
    const bool needs = taped_needs_grad(logits);
    Storage xs = logits.storage(), ys = labels.storage();
    const int xn = logits.node_id();
    return record(logits.tape(), std::move(out), needs,
                  [=](Tape& tp, const std::vector<double>& g) {
                      const double c = g[0] / double(n);
                      accumulate(tp, xn, [&](std::vector<double>& gx) {
                          for (std::size_t i = 0; i < n; ++i) {
                              gx[i] += c * (stable_sigmoid((*xs)[i]) - (*ys)[i]);
                          }
                      });
                  });
}

Tensor masked_row_map(const Tensor& h, const std::vector<std::uint8_t>& mask, const Tensor& w,
                      RowMapActivation act) {
    require_2d(h, "masked_row_map");
    require_2d(w, "masked_row_map");
    const std::size_t n = h.rows(), d = h.cols();
    if (w.rows() != d || w.cols() != d) {
        throw DataError("masked_row_map: weight must be " + std::to_string(d) + "x" +
                        std::to_string(d));
    }
    if (mask.size() != n) throw DataError("masked_row_map: mask length != rows");

    auto active = std::make_shared<std::vector<std::int32_t>>();
    for (std::size_t r = 0; r < n; ++r) {
        if (mask[r]) active->push_back(std::int32_t(r));
    }
    const std::size_t k = active->size();

    Tensor out(h.shape());
    std::copy_n(h.data().data(), h.size(), out.data().data());
    // pack active rows, transform once, scatter back
    auto packed = std::make_shared<std::vector<double>>(k * d);
    auto mapped = std::make_shared<std::vector<double>>(k * d);
    {
        auto hv = h.data();
        for (std::size_t i = 0; i < k; ++i) {
            std::copy_n(hv.data() + std::size_t((*active)[i]) * d, d, packed->data() + i * d);
        }
        if (k > 0) {
            ConstMap P(packed->data(), k, d), W(w.data().data(), d, d);
            MutMap M(mapped->data(), k, d);
            M.noalias() = P * W;
        }
        auto ov = out.data();
        for (std::size_t i = 0; i < k; ++i) {
            double* row = ov.data() + std::size_t((*active)[i]) * d;
            const double* src = mapped->data() + i * d;
            if (act == RowMapActivation::Sigmoid) {
                for (std::size_t j = 0; j < d; ++j) row[j] = stable_sigmoid(src[j]);
            } else {
                std::copy_n(src, d, row);
            }
        }
    }
    check_finite(out.data(), "masked_row_map");

    Tape* tape = common_tape(h, w, "masked_row_map");
    const bool needs = taped_needs_grad(h) || taped_needs_grad(w);
    const int hn = h.node_id(), wn = w.node_id();
    Storage ws = w.storage();
    auto mask_copy = std::make_shared<std::vector<std::uint8_t>>(mask);
    return record(tape, std::move(out), needs, [=](Tape& tp, const std::vector<double>& g) {
        // da = act'(mapped) .* g on active rows
        std::vector<double> da(k * d);
        for (std::size_t i = 0; i < k; ++i) {
            const double* grow = g.data() + std::size_t((*active)[i]) * d;
            for (std::size_t j = 0; j < d; ++j) {
                double deriv = 1.0;
                if (act == RowMapActivation::Sigmoid) {
                    const double o = stable_sigmoid((*mapped)[i * d + j]);
                    deriv = o * (1.0 - o);
                }
                da[i * d + j] = deriv * grow[j];
            }
        }
        accumulate(tp, hn, [&](std::vector<double>& gh) {
            for (std::size_t r = 0; r < n; ++r) {
                if ((*mask_copy)[r]) continue;
                const double* grow = g.data() + r * d;
                double* dst = gh.data() + r * d;
                for (std::size_t j = 0; j < d; ++j) dst[j] += grow[j];
            }
            if (k > 0) {
                std::vector<double> gp(k * d);
                ConstMap DA(da.data(), k, d), W(ws->data(), d, d);
                MutMap(gp.data(), k, d).noalias() = DA * W.transpose();
                for (std::size_t i = 0; i < k; ++i) {
                    double* dst = gh.data() + std::size_t((*active)[i]) * d;
                    for (std::size_t j = 0; j < d; ++j) dst[j] += gp[i * d + j];
                }
            }
        });
        accumulate(tp, wn, [&](std::vector<double>& gw) {
            if (k > 0) {
                ConstMap P(packed->data(), k, d), DA(da.data(), k, d);
                MutMap(gw.data(), d, d).noalias() += P.transpose() * DA;
            }
        });
    });
}

Tensor weighted_row_mse(const Tensor& a, const Tensor& b, const std::vector<double>& weights) {
    require_2d(a, "weighted_row_mse");
    require_2d(b, "weighted_row_mse");
    if (a.shape() != b.shape()) throw DataError("weighted_row_mse: shape mismatch");
    const std::size_t n = a.rows(), d = a.cols();
    if (weights.size() != n) throw DataError("weighted_row_mse: weight length != rows");

    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw DataError("weighted_row_mse: negative weight");
        wsum += w;
    }
    if (wsum == 0.0) return Tensor::scalar(0.0);
    const double denom = wsum * double(d);

    auto av = a.data(), bv = b.data();
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        if (weights[r] == 0.0) continue;
        double rs = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = av[r * d + j] - bv[r * d + j];
            rs += diff * diff;
        }
        s += weights[r] * rs;
    }
    Tensor out = Tensor::scalar(s / denom);
    check_finite(out.data(), "weighted_row_mse");

    Tape* tape = common_tape(a, b, "weighted_row_mse");
    const bool needs = taped_needs_grad(a) || taped_needs_grad(b);
    Storage as = a.storage(), bs = b.storage();
    const int an = a.node_id(), bn = b.node_id();
    auto wcopy = std::make_shared<std::vector<double>>(weights);
    return record(tape, std::move(out), needs, [=](Tape& tp, const std::vector<double>& g) {
        const double c = 2.0 * g[0] / denom;
        accumulate(tp, an, [&](std::vector<double>& ga) {
            for (std::size_t r = 0; r < n; ++r) {
                const double w = (*wcopy)[r];
                if (w == 0.0) continue;
                for (std::size_t j = 0; j < d; ++j) {
                    ga[r * d + j] += c * w * ((*as)[r * d + j] - (*bs)[r * d + j]);
                }
            }
        });
        accumulate(tp, bn, [&](std::vector<double>& gb) {
            for (std::size_t r = 0; r < n; ++r) {
                const double w = (*wcopy)[r];
                if (w == 0.0) continue;
                for (std::size_t j = 0; j < d; ++j) {
                    gb[r * d + j] -= c * w * ((*as)[r * d + j] - (*bs)[r * d + j]);
                }
            }
        });
    });
}

// ---------------------------------------------------------------------------
// optimizers
// ---------------------------------------------------------------------------

void adam_step(std::vector<Tensor>& params, AdamState& state, double lr, double beta1,
               double beta2, double eps) {
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), {});
        state.v.assign(params.size(), {});
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.m[i].assign(params[i].size(), 0.0);
            state.v[i].assign(params[i].size(), 0.0);
        }
        state.t = 0;
    }
    ++state.t;
    const double bc1 = 1.0 - std::pow(beta1, double(state.t));
    const double bc2 = 1.0 - std::pow(beta2, double(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto g = params[i].grad();
        auto p = params[i].data();
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double gj = j < g.size() ? g[j] : 0.0;
            m[j] = beta1 * m[j] + (1.0 - beta1) * gj;
            v[j] = beta2 * v[j] + (1.0 - beta2) * gj * gj;
            p[j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps);
        }
    }
}

void sgd_step(std::vector<Tensor>& params, double lr) {
    for (Tensor& t : params) {
        auto g = t.grad();
        auto p = t.data();
        for (std::size_t j = 0; j < p.size() && j < g.size(); ++j) p[j] -= lr * g[j];
    }
}

// ---------------------------------------------------------------------------
// gradient check oracle
// ---------------------------------------------------------------------------

double finite_diff_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                         double eps) {
    Tensor base = x.clone();
    std::vector<double> analytic(base.size(), 0.0);
    {
        Tape tape;
        Tensor xt = tape.watch(base);
        Tensor y = f(xt);
        if (y.size() != 1) throw ConfigError("finite_diff_check: f must return a scalar");
        tape.backward(y);
        auto g = tape.grad(xt);
        std::copy(g.begin(), g.end(), analytic.begin());
    }

    Tensor probe = x.clone();
    auto pv = probe.data();
    double max_rel = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        const double orig = pv[i];
        pv[i] = orig + eps;
        const double f_plus = f(probe).item();
        pv[i] = orig - eps;
        const double f_minus = f(probe).item();
        pv[i] = orig;
        const double numeric = (f_plus - f_minus) / (2.0 * eps);
        const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
        max_rel = std::max(max_rel, std::abs(analytic[i] - numeric) / denom);
    }
    return max_rel;
}

}  // namespace gnnd
