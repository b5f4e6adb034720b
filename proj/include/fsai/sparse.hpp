#pragma once

#include "fsai/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fsai {

/// Index type used for CSR row starts and column indices. Four bytes, which is
/// also what `memory_occupancy` assumes.
using index_t = std::int32_t;

template <class T>
using Vector = std::vector<T>;

template <class T>
struct CooEntry {
    index_t row;
    index_t col;
    T value;
};

/// Square or rectangular sparse matrix in Compressed Sparse Row form.
///
/// `row_start` holds, for each row, the address of its first stored element
/// (length rows+1, last entry = nnz). Column indices are strictly increasing
/// within each row. The constructor validates these invariants; once built the
/// matrix is immutable.
template <class T>
class CsrMatrix {
public:
    using value_type = T;

    CsrMatrix() : row_start_(1, 0) {}

    CsrMatrix(index_t n_rows, index_t n_cols, std::vector<index_t> row_start,
              std::vector<index_t> col_index, std::vector<T> values);

    static CsrMatrix identity(index_t n);

    index_t rows() const noexcept { return n_rows_; }
    index_t cols() const noexcept { return n_cols_; }
    index_t nnz() const noexcept { return static_cast<index_t>(values_.size()); }
    bool square() const noexcept { return n_rows_ == n_cols_; }

    std::span<const index_t> row_start() const noexcept { return row_start_; }
    std::span<const index_t> col_index() const noexcept { return col_index_; }
    std::span<const T> values() const noexcept { return values_; }

    std::span<const index_t> row_cols(index_t i) const noexcept {
        return {col_index_.data() + row_start_[i], col_index_.data() + row_start_[i + 1]};
    }
    std::span<const T> row_values(index_t i) const noexcept {
        return {values_.data() + row_start_[i], values_.data() + row_start_[i + 1]};
    }

    /// Stored value at (i, j), or zero when (i, j) is not in the pattern.
    T at(index_t i, index_t j) const;

    /// Diagonal entries (zero where the diagonal is not stored).
    std::vector<T> diagonal() const;

    template <class U>
    CsrMatrix<U> cast() const {
        std::vector<U> v(values_.begin(), values_.end());
        return CsrMatrix<U>(n_rows_, n_cols_, row_start_, col_index_, std::move(v));
    }

    /// Exact structural and value symmetry.
    bool is_symmetric() const;

    bool operator==(const CsrMatrix& other) const = default;

private:
    index_t n_rows_ = 0;
    index_t n_cols_ = 0;
    std::vector<index_t> row_start_;
    std::vector<index_t> col_index_;
    std::vector<T> values_;
};

/// Builds canonical CSR from coordinate entries. Duplicated coordinates are
/// rejected (DuplicateEntryError), out-of-range ones raise StructureError.
template <class T>
CsrMatrix<T> csr_from_coo(std::vector<CooEntry<T>> entries, index_t n_rows, index_t n_cols);

template <class T>
CsrMatrix<T> transpose_csr(const CsrMatrix<T>& a);

// ---------------------------------------------------------------------------
// Kernels. The OpenMP versions parallelize over rows or elements only, so
// every output element is computed in the same order as the serial reference
// and the results are bit-identical. Reductions (dot, nrm2) are sequential.

namespace detail {
inline void check_len(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": length " + std::to_string(a) + " vs " +
                             std::to_string(b));
    }
}
constexpr std::ptrdiff_t omp_threshold = 8192;
} // namespace detail

namespace serial {

template <class T, class V>
void spmv(const CsrMatrix<T>& a, std::span<const V> x, std::span<V> y) {
    detail::check_len(static_cast<std::size_t>(a.cols()), x.size(), "spmv x");
    detail::check_len(static_cast<std::size_t>(a.rows()), y.size(), "spmv y");
    const auto rs = a.row_start();
    const auto ci = a.col_index();
    const auto va = a.values();
    for (index_t i = 0; i < a.rows(); ++i) {
        V sum = 0;
        for (index_t k = rs[i]; k < rs[i + 1]; ++k) sum += static_cast<V>(va[k]) * x[ci[k]];
        y[i] = sum;
    }
}

template <class T>
void axpy(T alpha, std::span<const T> x, std::span<T> y) {
    detail::check_len(x.size(), y.size(), "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

template <class T>
void scal(T alpha, std::span<T> x) {
    for (auto& v : x) v *= alpha;
}

/// y = x + beta * y
template <class T>
void xpby(std::span<const T> x, T beta, std::span<T> y) {
    detail::check_len(x.size(), y.size(), "xpby");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * y[i];
}

} // namespace serial

template <class T, class V>
void spmv(const CsrMatrix<T>& a, std::span<const V> x, std::span<V> y) {
    detail::check_len(static_cast<std::size_t>(a.cols()), x.size(), "spmv x");
    detail::check_len(static_cast<std::size_t>(a.rows()), y.size(), "spmv y");
    const index_t* rs = a.row_start().data();
    const index_t* ci = a.col_index().data();
    const T* va = a.values().data();
    const V* xp = x.data();
    V* yp = y.data();
    const index_t n = a.rows();
#pragma omp parallel for schedule(static) if (n > detail::omp_threshold)
    for (index_t i = 0; i < n; ++i) {
        V sum = 0;
        for (index_t k = rs[i]; k < rs[i + 1]; ++k) sum += static_cast<V>(va[k]) * xp[ci[k]];
        yp[i] = sum;
    }
}

template <class T, class V>
std::vector<V> spmv(const CsrMatrix<T>& a, std::span<const V> x) {
    std::vector<V> y(static_cast<std::size_t>(a.rows()));
    spmv<T, V>(a, x, y);
    return y;
}

template <class T>
std::vector<T> spmv(const CsrMatrix<T>& a, const std::vector<T>& x) {
    return spmv<T, T>(a, std::span<const T>(x));
}

namespace blas {

template <class T>
T dot(std::span<const T> x, std::span<const T> y) {
    detail::check_len(x.size(), y.size(), "dot");
    T sum = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
    return sum;
}

template <class T>
T nrm2(std::span<const T> x) {
    T sum = 0;
    for (const T v : x) sum += v * v;
    return std::sqrt(sum);
}

/// y += alpha * x
template <class T>
void axpy(T alpha, std::span<const T> x, std::span<T> y) {
    detail::check_len(x.size(), y.size(), "axpy");
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const T* xp = x.data();
    T* yp = y.data();
#pragma omp parallel for schedule(static) if (n > detail::omp_threshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) yp[i] += alpha * xp[i];
}

template <class T>
void scal(T alpha, std::span<T> x) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    T* xp = x.data();
#pragma omp parallel for schedule(static) if (n > detail::omp_threshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) xp[i] *= alpha;
}

/// y = x + beta * y
template <class T>
void xpby(std::span<const T> x, T beta, std::span<T> y) {
    detail::check_len(x.size(), y.size(), "xpby");
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const T* xp = x.data();
    T* yp = y.data();
#pragma omp parallel for schedule(static) if (n > detail::omp_threshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) yp[i] = xp[i] + beta * yp[i];
}

// Convenience overloads for std::vector arguments.
template <class T>
T dot(const std::vector<T>& x, const std::vector<T>& y) {
    return dot(std::span<const T>(x), std::span<const T>(y));
}
template <class T>
T nrm2(const std::vector<T>& x) {
    return nrm2(std::span<const T>(x));
}
template <class T>
void axpy(T alpha, const std::vector<T>& x, std::vector<T>& y) {
    axpy(alpha, std::span<const T>(x), std::span<T>(y));
}
template <class T>
void scal(T alpha, std::vector<T>& x) {
    scal(alpha, std::span<T>(x));
}

} // namespace blas

} // namespace fsai
