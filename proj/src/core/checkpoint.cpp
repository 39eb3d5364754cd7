#include "checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace gnnd {

namespace {

constexpr std::uint16_t kVersion = 1;
constexpr std::uint16_t kKindModel = 0;
constexpr std::uint16_t kKindOperator = 1;

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw DataError("cannot write checkpoint: " + path);
    }
    void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), std::streamsize(n)); }
    template <class T>
    void le(T v) {
        static_assert(std::is_integral_v<T>);
        unsigned char buf[sizeof(T)];
        for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = (std::uint64_t(v) >> (8 * i)) & 0xff;
        bytes(buf, sizeof(T));
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        le<std::uint64_t>(bits);
    }
    void f64s(std::span<const double> v) {
        for (double x : v) f64(x);
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw DataError("cannot open checkpoint: " + path);
    }
    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), std::streamsize(n));
        if (in_.gcount() != std::streamsize(n)) throw DataError("truncated checkpoint: " + path_);
    }
    template <class T>
    T le() {
        unsigned char buf[sizeof(T)];
        bytes(buf, sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t(buf[i]) << (8 * i);
        return T(v);
    }
    double f64() {
        const std::uint64_t bits = le<std::uint64_t>();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void f64s(std::span<double> out) {
        for (double& x : out) x = f64();
    }

private:
    std::ifstream in_;
    std::string path_;
};

std::uint16_t read_header(Reader& r, const std::string& path) {
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, "GNND", 4) != 0) throw DataError("bad checkpoint magic: " + path);
    const auto version = r.le<std::uint16_t>();
    if (version != kVersion) {
        throw DataError("unsupported checkpoint version " + std::to_string(version));
    }
    return r.le<std::uint16_t>();
}

}  // namespace

void save_model(const GnnModel& model, const std::string& path) {
    model.validate();
    Writer w(path);
    w.bytes("GNND", 4);
    w.le<std::uint16_t>(kVersion);
    w.le<std::uint16_t>(kKindModel);
    w.le<std::uint32_t>(std::uint32_t(model.layer_weights.size()));
    for (std::size_t d : model.layer_dims) w.le<std::uint32_t>(std::uint32_t(d));
    for (const Tensor& t : model.layer_weights) w.f64s(t.data());
    w.le<std::uint8_t>(model.has_cls_head() ? 1 : 0);
    if (model.has_cls_head()) {
        w.le<std::uint32_t>(std::uint32_t(model.cls_head.cols()));
        w.f64s(model.cls_head.data());
    }
}

GnnModel load_model(const std::string& path) {
    Reader r(path);
    if (read_header(r, path) != kKindModel) throw DataError("not a model checkpoint: " + path);
    const auto L = r.le<std::uint32_t>();
    GnnModel m;
    m.layer_dims.resize(L + 1);
    for (auto& d : m.layer_dims) d = r.le<std::uint32_t>();
    for (std::uint32_t l = 0; l < L; ++l) {
        Tensor t({m.layer_dims[l], m.layer_dims[l + 1]});
        r.f64s(t.data());
        m.layer_weights.push_back(std::move(t));
    }
    if (r.le<std::uint8_t>()) {
        const auto classes = r.le<std::uint32_t>();
        Tensor head({m.layer_dims.back(), classes});
        r.f64s(head.data());
        m.cls_head = std::move(head);
    }
    m.validate();
    return m;
}

void save_operator(const DeletionOperator& op, const std::string& path) {
    op.validate();
    Writer w(path);
    w.bytes("GNND", 4);
    w.le<std::uint16_t>(kVersion);
    w.le<std::uint16_t>(kKindOperator);
    w.le<std::uint32_t>(std::uint32_t(op.w_d.size()));
    for (std::size_t d : op.dims) w.le<std::uint32_t>(std::uint32_t(d));
    for (const Tensor& t : op.w_d) w.f64s(t.data());
    w.le<std::uint8_t>(op.mode == DelMode::LastLayerOnly ? 1 : 0);
    w.le<std::uint8_t>(op.activation == DelActivation::Sigmoid ? 1 : 0);
    w.le<std::uint32_t>(std::uint32_t(op.masks.size()));
    const std::uint64_t n = op.masks.empty() ? 0 : op.masks.front().size();
    w.le<std::uint64_t>(n);
    for (const auto& mask : op.masks) {
        if (mask.size() != n) throw DataError("operator checkpoint: ragged masks");
        std::vector<std::uint8_t> bits((n + 7) / 8, 0);
        for (std::uint64_t i = 0; i < n; ++i) {
            if (mask[i]) bits[i / 8] |= std::uint8_t(1u << (i % 8));
        }
        w.bytes(bits.data(), bits.size());
    }
}

DeletionOperator load_operator(const std::string& path) {
    Reader r(path);
    if (read_header(r, path) != kKindOperator) {
        throw DataError("not an operator checkpoint: " + path);
    }
    const auto A = r.le<std::uint32_t>();
    DeletionOperator op;
    op.dims.resize(A);
    for (auto& d : op.dims) d = r.le<std::uint32_t>();
    for (std::uint32_t i = 0; i < A; ++i) {
        Tensor t({op.dims[i], op.dims[i]});
        r.f64s(t.data());
        op.w_d.push_back(std::move(t));
    }
    op.mode = r.le<std::uint8_t>() ? DelMode::LastLayerOnly : DelMode::LayerWise;
    op.activation = r.le<std::uint8_t>() ? DelActivation::Sigmoid : DelActivation::Linear;
    const auto mask_count = r.le<std::uint32_t>();
    const auto n = r.le<std::uint64_t>();
    for (std::uint32_t m = 0; m < mask_count; ++m) {
        std::vector<std::uint8_t> bits((n + 7) / 8);
        r.bytes(bits.data(), bits.size());
        std::vector<std::uint8_t> mask(n, 0);
        for (std::uint64_t i = 0; i < n; ++i) mask[i] = (bits[i / 8] >> (i % 8)) & 1u;
        op.masks.push_back(std::move(mask));
    }
    op.validate();
    return op;
}

}  // namespace gnnd
