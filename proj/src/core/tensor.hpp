#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "common.hpp"

namespace gnnd {

class Tape;

// Dense row-major f64 tensor. Copies share the underlying buffer; a tensor
// becomes differentiable once registered on a tape via Tape::watch or by
// being produced by an op with a taped operand.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);
    static Tensor scalar(double v);
    static Tensor from_matrix(const Matrix& m);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return values_ ? values_->size() : 0; }
    std::size_t rows() const { return shape_.empty() ? 1 : shape_[0]; }
    std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }
    bool defined() const { return values_ != nullptr; }

    std::span<double> data() { return {values_->data(), values_->size()}; }
    std::span<const double> data() const { return {values_->data(), values_->size()}; }
    double at(std::size_t r, std::size_t c) const { return (*values_)[r * cols() + c]; }
    double item() const;

    Matrix to_matrix() const;
    Tensor detached() const;  // same buffer, no tape participation
    Tensor clone() const;     // deep copy, no tape participation

    Tape* tape() const { return tape_; }
    int node_id() const { return node_; }

    // Shared ownership of the value buffer; backward rules capture this so
    // operands stay alive until the tape is dropped.
    std::shared_ptr<const std::vector<double>> storage() const { return values_; }

    // Gradient from the last backward() on this tensor's tape.
    std::span<const double> grad() const;

private:
    friend class Tape;
    std::shared_ptr<std::vector<double>> values_;
    std::vector<std::size_t> shape_;
    Tape* tape_ = nullptr;
    int node_ = -1;
};

// Constant CSR matrix used as a non-differentiated operand.
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int64_t> offsets;   // length rows + 1
    std::vector<std::int32_t> indices;
    std::vector<double> values;

    void validate() const;
};

// Reverse-mode tape. One tape per optimization step, confined to one thread;
// freeing the tape releases all recorded state.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Registers t as a leaf; requires_grad leaves receive gradients.
    Tensor watch(const Tensor& t, bool requires_grad = true);

    // Propagates d loss / d node for every recorded node, loss must be a
    // scalar on this tape. Deterministic: single-threaded reverse sweep.
    void backward(const Tensor& loss);

    std::span<const double> grad(const Tensor& t) const;
    bool requires_grad(const Tensor& t) const;
    std::size_t num_nodes() const { return nodes_.size(); }

    // --- internal (used by ops) ---
    struct Node {
        std::vector<std::size_t> shape;
        std::vector<double> grad;
        bool needs_grad = false;
        std::function<void(Tape&, const std::vector<double>&)> backward;
    };
    int add_node(std::vector<std::size_t> shape, bool needs_grad,
                 std::function<void(Tape&, const std::vector<double>&)> backward);
    std::vector<double>& grad_buffer(int node);
    bool node_needs_grad(int node) const { return node >= 0 && nodes_[std::size_t(node)].needs_grad; }
    Tensor adopt(Tensor t, int node);

private:
    std::vector<Node> nodes_;
};

// --- ops ---
// Each op validates shapes, checks outputs for NaN/Inf (NumericError), and
// records its backward rule when an operand is on a tape.

Tensor matmul(const Tensor& a, const Tensor& b);
// The sparse operand is captured by pointer: the caller must keep it alive
// until the tape it was recorded on is dropped.
Tensor spmm(const SparseMatrix& s, const Tensor& d);
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor gather_rows(const Tensor& x, const std::vector<std::int32_t>& ids);
Tensor rowwise_dot(const Tensor& a, const Tensor& b);
Tensor mse(const Tensor& pred, const Tensor& target);
Tensor bce_with_logits(const Tensor& logits, const Tensor& labels);

// Rows with mask true become act(row * w); rows with mask false pass through
// bit-identically. mask length = h.rows, w square with dim = h.cols.
enum class RowMapActivation { Linear, Sigmoid };
Tensor masked_row_map(const Tensor& h, const std::vector<std::uint8_t>& mask,
                      const Tensor& w, RowMapActivation act);

// sum_r weight[r] * ||a_r - b_r||^2 / (cols * sum_r weight[r]); b and
// weights are treated as constants. Rows with zero weight do not contribute.
Tensor weighted_row_mse(const Tensor& a, const Tensor& b, const std::vector<double>& weights);

// --- optimizers ---

struct AdamState {
    std::vector<std::vector<double>> m, v;
    std::int64_t t = 0;
};

// params are taped handles from the current tape; their grads must be
// populated by backward(). Updates the shared value buffers in place.
void adam_step(std::vector<Tensor>& params, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
void sgd_step(std::vector<Tensor>& params, double lr);

// --- verification oracle ---

// Central-difference check of d f / d x against the tape gradient. f must
// map a tensor to a scalar tensor and be evaluable both on and off tape.
// Returns the max relative error over all coordinates.
double finite_diff_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                         double eps = 1e-5);

}  // namespace gnnd
