#include "ggs/linalg.hpp"

#include "ggs/error.hpp"

#include <algorithm>
#include <cmath>

namespace ggs {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("DenseMatrix: data length " + std::to_string(data_.size()) + " does not match " +
                         shape_string());
    }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("DenseMatrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::string DenseMatrix::shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool DenseMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

SparseMatrixCSR::SparseMatrixCSR(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                                 std::vector<std::size_t> col_idx, std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
    validate();
}

void SparseMatrixCSR::validate() const {
    if (row_ptr_.size() != rows_ + 1) throw ShapeError("CSR: row_ptr length must be rows+1");
    if (row_ptr_.front() != 0) throw ShapeError("CSR: row_ptr[0] must be 0");
    if (row_ptr_.back() != col_idx_.size() || col_idx_.size() != values_.size()) {
        throw ShapeError("CSR: row_ptr[rows], col_idx and values lengths disagree");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        if (row_ptr_[i] > row_ptr_[i + 1]) throw ShapeError("CSR: row_ptr is not nondecreasing");
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            if (col_idx_[p] >= cols_) {
                throw ShapeError("CSR: column index " + std::to_string(col_idx_[p]) + " out of range in row " +
                                 std::to_string(i));
            }
            if (p > row_ptr_[i] && col_idx_[p] <= col_idx_[p - 1]) {
                throw ShapeError("CSR: column indices unsorted or duplicated in row " + std::to_string(i));
            }
        }
    }
}

SparseMatrixCSR SparseMatrixCSR::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> row_ptr(rows + 1, 0);
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    col_idx.reserve(triplets.size());
    values.reserve(triplets.size());
    for (const auto& t : triplets) {
        if (t.row >= rows || t.col >= cols) {
            throw ShapeError("CSR: triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                             ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
        }
        ++row_ptr[t.row + 1];
        col_idx.push_back(t.col);
        values.push_back(t.value);
    }
    for (std::size_t i = 0; i < rows; ++i) row_ptr[i + 1] += row_ptr[i];
    return SparseMatrixCSR(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrixCSR SparseMatrixCSR::identity(std::size_t n) {
    std::vector<std::size_t> row_ptr(n + 1);
    std::vector<std::size_t> col_idx(n);
    for (std::size_t i = 0; i <= n; ++i) row_ptr[i] = i;
    for (std::size_t i = 0; i < n; ++i) col_idx[i] = i;
    return SparseMatrixCSR(n, n, std::move(row_ptr), std::move(col_idx), std::vector<double>(n, 1.0));
}

SparseMatrixCSR SparseMatrixCSR::from_dense(const DenseMatrix& d) {
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        for (std::size_t j = 0; j < d.cols(); ++j) {
            if (d(i, j) != 0.0) {
                col_idx.push_back(j);
                values.push_back(d(i, j));
            }
        }
        row_ptr.push_back(col_idx.size());
    }
    return SparseMatrixCSR(d.rows(), d.cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

double SparseMatrixCSR::at(std::size_t i, std::size_t j) const {
    const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

std::string SparseMatrixCSR::shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: cannot multiply " + a.shape_string() + " by " + b.shape_string());
    }
    DenseMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto dst = out.row(i);
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const double av = a(i, p);
            if (av == 0.0) continue;
            const auto src = b.row(p);
            for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += av * src[j];
        }
    }
    return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    }
    return out;
}

DenseMatrix spmm(const SparseMatrixCSR& s, const DenseMatrix& d) {
    if (s.cols() != d.rows()) {
        throw ShapeError("spmm: cannot multiply sparse " + s.shape_string() + " by " + d.shape_string());
    }
    DenseMatrix out(s.rows(), d.cols());
    const auto& rp = s.row_ptr();
    const auto& ci = s.col_idx();
    const auto& v = s.values();
    for (std::size_t i = 0; i < s.rows(); ++i) {
        auto dst = out.row(i);
        for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) {
            const auto src = d.row(ci[p]);
            const double w = v[p];
            for (std::size_t j = 0; j < d.cols(); ++j) dst[j] += w * src[j];
        }
    }
    return out;
}

DenseMatrix spmm_transposed(const SparseMatrixCSR& s, const DenseMatrix& d) {
    if (s.rows() != d.rows()) {
        throw ShapeError("spmm_transposed: cannot multiply transpose of sparse " + s.shape_string() + " by " +
                         d.shape_string());
    }
    DenseMatrix out(s.cols(), d.cols());
    const auto& rp = s.row_ptr();
    const auto& ci = s.col_idx();
    const auto& v = s.values();
    for (std::size_t i = 0; i < s.rows(); ++i) {
        const auto src = d.row(i);
        for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) {
            auto dst = out.row(ci[p]);
            const double w = v[p];
            for (std::size_t j = 0; j < d.cols(); ++j) dst[j] += w * src[j];
        }
    }
    return out;
}

SparseMatrixCSR transpose(const SparseMatrixCSR& s) {
    std::vector<SparseMatrixCSR::Triplet> t;
    t.reserve(s.nnz());
    for (std::size_t i = 0; i < s.rows(); ++i) {
        for (std::size_t p = s.row_ptr()[i]; p < s.row_ptr()[i + 1]; ++p) {
            t.push_back({s.col_idx()[p], i, s.values()[p]});
        }
    }
    return SparseMatrixCSR::from_triplets(s.cols(), s.rows(), std::move(t));
}

DenseMatrix densify(const SparseMatrixCSR& s) {
    DenseMatrix out(s.rows(), s.cols());
    for (std::size_t i = 0; i < s.rows(); ++i) {
        for (std::size_t p = s.row_ptr()[i]; p < s.row_ptr()[i + 1]; ++p) out(i, s.col_idx()[p]) = s.values()[p];
    }
    return out;
}

DenseMatrix relu(const DenseMatrix& a) {
    DenseMatrix out = a;
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : s_) word = splitmix64(x);
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed;
    std::uint64_t mixed = splitmix64(x);
    x = stream ^ mixed;
    return Rng(splitmix64(x));
}

std::uint64_t Rng::next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() noexcept {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return std::clamp(u, kUniformEpsilon, 1.0 - kUniformEpsilon);
}

double Rng::uniform_range(double lo, double hi) noexcept {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

double gumbel_from_uniform(double u) noexcept { return -std::log(-std::log(u)); }

double Rng::gumbel() noexcept { return gumbel_from_uniform(uniform()); }

}  // namespace ggs
