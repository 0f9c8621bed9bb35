#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hanforge/errors.hpp"

namespace hanforge {

// Dense row-major array of doubles, rank 1 or 2. The value type for all
// layer math in this project.
class Tensor {
public:
    Tensor() = default;

    static Tensor vector(std::size_t n, double fill = 0.0);
    static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    std::size_t rank() const { return rank_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<std::size_t> shape() const;
    std::string shape_str() const;
    bool same_shape(const Tensor& other) const;

    bool all_finite() const;

    // Elementwise accumulation; shapes must match.
    void add_scaled(const Tensor& other, double scale);
    void scale(double s);
    void fill(double v);

    bool operator==(const Tensor& other) const {
        return rank_ == other.rank_ && rows_ == other.rows_ && cols_ == other.cols_ &&
               data_ == other.data_;
    }

private:
    std::size_t rank_ = 0;
    std::size_t rows_ = 0;  // rank 1: rows_ == size, cols_ == 1
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Deterministic random source. Draw sequences depend only on the seed; the
// engine (std::mt19937_64) and the uniform mapping below are both fixed by
// definition, so sequences are identical across platforms.
class RngState {
public:
    explicit RngState(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();
    // Uniform in [0, 1), derived from the top 53 bits of next_u64().
    double next_unit();
    // Uniform in [lo, hi).
    double next_uniform(double lo, double hi);
    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

    // Derive an independent stream, e.g. one per epoch or per worker.
    RngState fork(std::uint64_t stream) const;

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

// m[r x c] * v[c] -> [r]
Tensor matvec(const Tensor& m, const Tensor& v);
// m^T * v, i.e. mtv(m[r x c], v[r]) -> [c]; the adjoint of matvec.
Tensor matvec_transposed(const Tensor& m, const Tensor& v);
// a[r] outer b[c] -> [r x c]
Tensor outer(const Tensor& a, const Tensor& b);
double dot(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);

// Max-subtracted softmax over a rank-1 tensor. Entries positive, sum 1.
Tensor softmax(const Tensor& v);
Tensor tanh_elem(const Tensor& v);
Tensor sigmoid_elem(const Tensor& v);

// Uniform draws in [-a, a] with a = sqrt(6 / (rows + cols)).
Tensor glorot_init(std::size_t rows, std::size_t cols, RngState& rng);

// Inverted dropout: entries are 0 with probability rate, else 1/(1-rate).
Tensor dropout_mask(std::size_t n, double rate, RngState& rng);

}  // namespace hanforge
