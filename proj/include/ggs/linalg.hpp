#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ggs {

/// Row-major dense matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    bool same_shape(const DenseMatrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    std::string shape_string() const;

    bool all_finite() const noexcept;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Compressed sparse row matrix. Column indices are strictly increasing within
/// each row; construction validates the full structure.
class SparseMatrixCSR {
public:
    struct Triplet {
        std::size_t row;
        std::size_t col;
        double value;
    };

    SparseMatrixCSR() : row_ptr_{0} {}
    SparseMatrixCSR(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                    std::vector<std::size_t> col_idx, std::vector<double> values);

    /// Builds from unordered triplets. Duplicate (row, col) pairs are rejected.
    static SparseMatrixCSR from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
    static SparseMatrixCSR identity(std::size_t n);
    static SparseMatrixCSR from_dense(const DenseMatrix& d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
    const std::vector<std::size_t>& col_idx() const noexcept { return col_idx_; }
    const std::vector<double>& values() const noexcept { return values_; }

    /// Entry (i, j), zero when not stored. Binary search within the row.
    double at(std::size_t i, std::size_t j) const;

    std::string shape_string() const;

    friend bool operator==(const SparseMatrixCSR&, const SparseMatrixCSR&) = default;

private:
    void validate() const;

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);

/// s * d
DenseMatrix spmm(const SparseMatrixCSR& s, const DenseMatrix& d);
/// transpose(s) * d without materializing the transpose.
DenseMatrix spmm_transposed(const SparseMatrixCSR& s, const DenseMatrix& d);

SparseMatrixCSR transpose(const SparseMatrixCSR& s);
DenseMatrix densify(const SparseMatrixCSR& s);

/// Entrywise max(0, x).
DenseMatrix relu(const DenseMatrix& a);

/// xoshiro256** seeded through splitmix64. The algorithm is fixed so that a
/// seed reproduces the same stream on every platform.
class Rng {
public:
    static constexpr double kUniformEpsilon = 1e-12;

    explicit Rng(std::uint64_t seed);

    /// Independent stream derived from (seed, stream) by hashing both.
    static Rng derive(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64() noexcept;

    /// Uniform on [1e-12, 1 - 1e-12]; never exactly 0 or 1.
    double uniform() noexcept;

    /// Uniform on [lo, hi), unclamped 53-bit resolution.
    double uniform_range(double lo, double hi) noexcept;

    /// Standard Gumbel(0, 1): -log(-log(u)).
    double gumbel() noexcept;

private:
    std::uint64_t s_[4];
};

inline double sample_uniform(Rng& rng) noexcept { return rng.uniform(); }
inline double sample_gumbel(Rng& rng) noexcept { return rng.gumbel(); }

/// -log(-log(u)); exposed for the inverse-transform examples.
double gumbel_from_uniform(double u) noexcept;

}  // namespace ggs
