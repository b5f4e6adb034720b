#include "fsai/sparse.hpp"

#include <numeric>

namespace fsai {

template <class T>
CsrMatrix<T>::CsrMatrix(index_t n_rows, index_t n_cols, std::vector<index_t> row_start,
                        std::vector<index_t> col_index, std::vector<T> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_start_(std::move(row_start)),
      col_index_(std::move(col_index)),
      values_(std::move(values)) {
    if (n_rows < 0 || n_cols < 0) throw StructureError("negative matrix dimension");
    if (row_start_.size() != static_cast<std::size_t>(n_rows) + 1)
        throw StructureError("row_start must have rows+1 entries");
    if (col_index_.size() != values_.size())
        throw StructureError("col_index and values lengths differ");
    if (row_start_.front() != 0) throw StructureError("row_start[0] must be 0");
    if (static_cast<std::size_t>(row_start_.back()) != values_.size())
        throw StructureError("row_start[rows] must equal nnz");
    for (index_t i = 0; i < n_rows; ++i) {
        if (row_start_[i + 1] < row_start_[i])
            throw StructureError("row_start decreases at row " + std::to_string(i));
        for (index_t k = row_start_[i]; k < row_start_[i + 1]; ++k) {
            const index_t c = col_index_[k];
            if (c < 0 || c >= n_cols)
                throw StructureError("column index out of range in row " + std::to_string(i));
            if (k > row_start_[i] && col_index_[k - 1] >= c)
                throw StructureError("columns not strictly increasing in row " + std::to_string(i));
        }
    }
}

template <class T>
CsrMatrix<T> CsrMatrix<T>::identity(index_t n) {
    std::vector<index_t> rs(static_cast<std::size_t>(n) + 1);
    std::iota(rs.begin(), rs.end(), 0);
    std::vector<index_t> ci(static_cast<std::size_t>(n));
    std::iota(ci.begin(), ci.end(), 0);
    return CsrMatrix(n, n, std::move(rs), std::move(ci), std::vector<T>(static_cast<std::size_t>(n), T(1)));
}

template <class T>
T CsrMatrix<T>::at(index_t i, index_t j) const {
    const auto cols = row_cols(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return T(0);
    return values_[static_cast<std::size_t>(row_start_[i] + (it - cols.begin()))];
}

template <class T>
std::vector<T> CsrMatrix<T>::diagonal() const {
    const index_t n = std::min(n_rows_, n_cols_);
    std::vector<T> d(static_cast<std::size_t>(n), T(0));
    for (index_t i = 0; i < n; ++i) d[i] = at(i, i);
    return d;
}

template <class T>
bool CsrMatrix<T>::is_symmetric() const {
    if (!square()) return false;
    for (index_t i = 0; i < n_rows_; ++i) {
        const auto cols = row_cols(i);
        const auto vals = row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const index_t j = cols[k];
            if (j == i) continue;
            const auto other = row_cols(j);
            const auto it = std::lower_bound(other.begin(), other.end(), i);
            if (it == other.end() || *it != i) return false;
            if (row_values(j)[static_cast<std::size_t>(it - other.begin())] != vals[k]) return false;
        }
    }
    return true;
}

template <class T>
CsrMatrix<T> csr_from_coo(std::vector<CooEntry<T>> entries, index_t n_rows, index_t n_cols) {
    for (const auto& e : entries) {
        if (e.row < 0 || e.row >= n_rows || e.col < 0 || e.col >= n_cols) {
            throw StructureError("coordinate (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                                 ") outside " + std::to_string(n_rows) + "x" + std::to_string(n_cols));
        }
    }
    std::sort(entries.begin(), entries.end(), [](const CooEntry<T>& a, const CooEntry<T>& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<index_t> rs(static_cast<std::size_t>(n_rows) + 1, 0);
    std::vector<index_t> ci;
    std::vector<T> va;
    ci.reserve(entries.size());
    va.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& e = entries[k];
        if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
            throw DuplicateEntryError("duplicate coordinate (" + std::to_string(e.row) + ", " +
                                      std::to_string(e.col) + ")");
        }
        ++rs[static_cast<std::size_t>(e.row) + 1];
        ci.push_back(e.col);
        va.push_back(e.value);
    }
    std::partial_sum(rs.begin(), rs.end(), rs.begin());
    return CsrMatrix<T>(n_rows, n_cols, std::move(rs), std::move(ci), std::move(va));
}

template <class T>
CsrMatrix<T> transpose_csr(const CsrMatrix<T>& a) {
    const index_t m = a.rows();
    const index_t n = a.cols();
    const auto rs = a.row_start();
    const auto ci = a.col_index();
    const auto va = a.values();
    std::vector<index_t> trs(static_cast<std::size_t>(n) + 1, 0);
    for (const index_t c : ci) ++trs[static_cast<std::size_t>(c) + 1];
    std::partial_sum(trs.begin(), trs.end(), trs.begin());
    std::vector<index_t> next(trs.begin(), trs.end() - 1);
    std::vector<index_t> tci(ci.size());
    std::vector<T> tva(va.size());
    // Rows are visited in increasing order, so each transposed row comes out sorted.
    for (index_t i = 0; i < m; ++i) {
        for (index_t k = rs[i]; k < rs[i + 1]; ++k) {
            const index_t dst = next[ci[k]]++;
            tci[dst] = i;
            tva[dst] = va[k];
        }
    }
    return CsrMatrix<T>(n, m, std::move(trs), std::move(tci), std::move(tva));
}

template class CsrMatrix<float>;
template class CsrMatrix<double>;
template CsrMatrix<float> csr_from_coo(std::vector<CooEntry<float>>, index_t, index_t);
template CsrMatrix<double> csr_from_coo(std::vector<CooEntry<double>>, index_t, index_t);
template CsrMatrix<float> transpose_csr(const CsrMatrix<float>&);
template CsrMatrix<double> transpose_csr(const CsrMatrix<double>&);

} // namespace fsai
