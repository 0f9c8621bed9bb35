#include "hanforge/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace hanforge {

Tensor Tensor::vector(std::size_t n, double fill) {
    Tensor t;
    t.rank_ = 1;
    t.rows_ = n;
    t.cols_ = 1;
    t.data_.assign(n, fill);
    return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, double fill) {
    Tensor t;
    t.rank_ = 2;
    t.rows_ = rows;
    t.cols_ = cols;
    t.data_.assign(rows * cols, fill);
    return t;
}

std::vector<std::size_t> Tensor::shape() const {
    if (rank_ == 1) return {rows_};
    if (rank_ == 2) return {rows_, cols_};
    return {};
}

std::string Tensor::shape_str() const {
    if (rank_ == 1) return "[" + std::to_string(rows_) + "]";
    if (rank_ == 2) return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
    return "[]";
}

bool Tensor::same_shape(const Tensor& other) const {
    return rank_ == other.rank_ && rows_ == other.rows_ && cols_ == other.cols_;
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tensor::add_scaled(const Tensor& other, double scale) {
    if (!same_shape(other))
        throw DimensionError("add_scaled: shape mismatch " + shape_str() + " vs " +
                             other.shape_str());
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
}

void Tensor::scale(double s) {
    for (double& v : data_) v *= s;
}

void Tensor::fill(double v) {
    std::fill(data_.begin(), data_.end(), v);
}

std::uint64_t RngState::next_u64() {
    // splitmix64; fixed algorithm, platform independent
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double RngState::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngState::next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
}

std::uint64_t RngState::next_below(std::uint64_t n) {
    if (n == 0) throw DomainError("next_below: n must be positive");
    // rejection sampling keeps the distribution exactly uniform
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

RngState RngState::fork(std::uint64_t stream) const {
    RngState spawn(seed_ ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL));
    return spawn;
}

Tensor matvec(const Tensor& m, const Tensor& v) {
    if (m.rank() != 2 || v.rank() != 1 || m.cols() != v.size())
        throw DimensionError("matvec: shape mismatch " + m.shape_str() + " vs " + v.shape_str());
    Tensor out = Tensor::vector(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) acc += row[c] * v[c];
        out[r] = acc;
    }
    return out;
}

Tensor matvec_transposed(const Tensor& m, const Tensor& v) {
    if (m.rank() != 2 || v.rank() != 1 || m.rows() != v.size())
        throw DimensionError("matvec_transposed: shape mismatch " + m.shape_str() + " vs " +
                             v.shape_str());
    Tensor out = Tensor::vector(m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row(r);
        double vr = v[r];
        for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c] * vr;
    }
    return out;
}

Tensor outer(const Tensor& a, const Tensor& b) {
    if (a.rank() != 1 || b.rank() != 1)
        throw DimensionError("outer: expects two vectors, got " + a.shape_str() + " and " +
                             b.shape_str());
    Tensor out = Tensor::matrix(a.size(), b.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
        double ar = a[r];
        double* row = out.row(r);
        for (std::size_t c = 0; c < b.size(); ++c) row[c] = ar * b[c];
    }
    return out;
}

double dot(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size())
        throw DimensionError("dot: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw DimensionError("hadamard: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw DimensionError("add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw DimensionError("sub: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

Tensor softmax(const Tensor& v) {
    if (v.size() == 0) throw DomainError("softmax: empty input");
    double mx = v[0];
    for (std::size_t i = 1; i < v.size(); ++i) mx = std::max(mx, v[i]);
    Tensor out = Tensor::vector(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        sum += out[i];
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= sum;
    return out;
}

Tensor tanh_elem(const Tensor& v) {
    Tensor out = v;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
    return out;
}

Tensor sigmoid_elem(const Tensor& v) {
    Tensor out = v;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
    return out;
}

Tensor glorot_init(std::size_t rows, std::size_t cols, RngState& rng) {
    if (rows == 0 || cols == 0)
        throw DomainError("glorot_init: dimensions must be positive, got " +
                          std::to_string(rows) + "x" + std::to_string(cols));
    double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Tensor out = Tensor::matrix(rows, cols);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.next_uniform(-a, a);
    return out;
}

Tensor dropout_mask(std::size_t n, double rate, RngState& rng) {
    if (rate < 0.0 || rate >= 1.0)
        throw DomainError("dropout_mask: rate must be in [0, 1), got " + std::to_string(rate));
    Tensor out = Tensor::vector(n);
    double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < n; ++i) out[i] = rng.next_unit() < rate ? 0.0 : keep_scale;
    return out;
}

}  // namespace hanforge
