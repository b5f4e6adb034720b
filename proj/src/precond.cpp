#include "fsai/precond.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace fsai {
namespace {

void require_square(const CsrMatrix<double>& a, const char* what) {
    if (!a.square())
        throw DimensionError(std::string(what) + ": matrix is " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()));
}

struct Tridiagonal {
    std::vector<double> diag; // t(k,k)
    std::vector<double> off;  // off[k] = t(k-1,k) = t(k,k-1); off[0] = 0
};

Tridiagonal tridiagonal_arrays(const CsrMatrix<double>& t) {
    require_square(t, "tridiagonal");
    const index_t n = t.rows();
    Tridiagonal out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (index_t i = 0; i < n; ++i) {
        const auto cols = t.row_cols(i);
        const auto vals = t.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const index_t j = cols[k];
            if (j == i) {
                out.diag[i] = vals[k];
            } else if (j == i - 1) {
                out.off[i] = vals[k];
            } else if (j == i + 1) {
                if (t.at(i + 1, i) != vals[k])
                    throw StructureError("tridiagonal matrix is not symmetric at row " + std::to_string(i));
            } else {
                throw StructureError("entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                     ") outside the tridiagonal band");
            }
        }
        if (i > 0 && out.off[i] != 0.0 && t.at(i - 1, i) != out.off[i])
            throw StructureError("tridiagonal matrix is not symmetric at row " + std::to_string(i));
    }
    return out;
}

// Column k of an upper-triangular factor, rows ascending.
struct SparseColumn {
    std::vector<index_t> rows;
    std::vector<double> vals;
};

FactoredInverse<double> from_columns(const std::vector<SparseColumn>& columns, std::uint64_t flops) {
    const auto n = static_cast<index_t>(columns.size());
    std::vector<index_t> rs(static_cast<std::size_t>(n) + 1, 0);
    std::vector<index_t> ci;
    std::vector<double> va;
    index_t q = 0;
    for (index_t k = 0; k < n; ++k) {
        const auto& c = columns[k];
        for (std::size_t e = 0; e < c.rows.size(); ++e) {
            if (c.vals[e] == 0.0 && c.rows[e] != k) continue;
            ci.push_back(c.rows[e]);
            va.push_back(c.vals[e]);
            q = std::max(q, k - c.rows[e]);
        }
        rs[k + 1] = static_cast<index_t>(ci.size());
    }
    CsrMatrix<double> z_t(n, n, std::move(rs), std::move(ci), std::move(va));
    CsrMatrix<double> z = transpose_csr(z_t);
    return {std::move(z), std::move(z_t), q, flops};
}

} // namespace

DiagonalPrecond<double> diagonal_precond(const CsrMatrix<double>& a) {
    require_square(a, "diagonal preconditioner");
    const auto d = a.diagonal();
    DiagonalPrecond<double> p{std::vector<double>(d.size())};
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(d[i] > 0.0)) throw SingularError("non-positive diagonal entry", i);
        p.inv_diag[i] = 1.0 / d[i];
    }
    return p;
}

CsrMatrix<double> extract_tridiagonal(const CsrMatrix<double>& a) {
    require_square(a, "extract_tridiagonal");
    const index_t n = a.rows();
    std::vector<index_t> rs(static_cast<std::size_t>(n) + 1, 0);
    std::vector<index_t> ci;
    std::vector<double> va;
    ci.reserve(3 * static_cast<std::size_t>(n));
    va.reserve(3 * static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] >= i - 1 && cols[k] <= i + 1) {
                ci.push_back(cols[k]);
                va.push_back(vals[k]);
            }
        }
        rs[i + 1] = static_cast<index_t>(ci.size());
    }
    return {n, n, std::move(rs), std::move(ci), std::move(va)};
}

CsrMatrix<double> cholesky_bidiagonal(const CsrMatrix<double>& t) {
    const auto tri = tridiagonal_arrays(t);
    const index_t n = t.rows();
    std::vector<index_t> rs(static_cast<std::size_t>(n) + 1, 0);
    std::vector<index_t> ci;
    std::vector<double> va;
    double prev_sup = 0.0;
    for (index_t k = 0; k < n; ++k) {
        const double pivot = tri.diag[k] - prev_sup * prev_sup;
        if (!(pivot > 0.0)) throw NotSpdError("non-positive pivot in bidiagonal Cholesky", k);
        const double ukk = std::sqrt(pivot);
        ci.push_back(k);
        va.push_back(ukk);
        if (k + 1 < n) {
            prev_sup = tri.off[k + 1] / ukk;
            if (prev_sup != 0.0) {
                ci.push_back(k + 1);
                va.push_back(prev_sup);
            }
        }
        rs[k + 1] = static_cast<index_t>(ci.size());
    }
    return {n, n, std::move(rs), std::move(ci), std::move(va)};
}

CsrMatrix<double> truncated_inverse_factor(const CsrMatrix<double>& u, index_t q) {
    require_square(u, "truncated_inverse_factor");
    if (q < 0) throw DomainError("bandwidth q must be non-negative");
    const index_t n = u.rows();
    std::vector<double> d(n), sup(n, 0.0); // sup[k] = u(k, k+1)
    for (index_t i = 0; i < n; ++i) {
        const auto cols = u.row_cols(i);
        const auto vals = u.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] == i)
                d[i] = vals[k];
            else if (cols[k] == i + 1)
                sup[i] = vals[k];
            else
                throw StructureError("matrix is not upper bidiagonal at row " + std::to_string(i));
        }
        if (!(d[i] > 0.0)) throw SingularError("non-positive diagonal in bidiagonal factor", i);
    }
    std::vector<SparseColumn> columns(n);
    for (index_t k = 0; k < n; ++k) {
        const index_t lo = std::max<index_t>(0, k - q);
        auto& c = columns[k];
        c.rows.resize(k - lo + 1);
        c.vals.resize(k - lo + 1);
        double z = 1.0 / d[k];
        c.rows.back() = k;
        c.vals.back() = z;
        for (index_t r = k - 1; r >= lo; --r) {
            z = -(sup[r] / d[r]) * z;
            c.rows[r - lo] = r;
            c.vals[r - lo] = z;
        }
    }
    return from_columns(columns, 0).z;
}

FactoredInverse<double> t_orthogonalize(const CsrMatrix<double>& t, index_t q) {
    if (q < 0) throw DomainError("bandwidth q must be non-negative");
    const auto tri = tridiagonal_arrays(t);
    const index_t n = t.rows();
    const index_t qe = std::min<index_t>(q, std::max<index_t>(n - 1, 0));
    const std::size_t width = static_cast<std::size_t>(qe) + 1;

    // band[k * width + (r - (k - qe))] holds z(r, k) for r in [k - qe, k].
    std::vector<double> band(width * static_cast<std::size_t>(n), 0.0);
    auto zval = [&](index_t r, index_t k) -> double {
        if (r < 0 || r > k || r < k - qe) return 0.0;
        return band[static_cast<std::size_t>(k) * width + static_cast<std::size_t>(r - (k - qe))];
    };
    auto tdiag = [&](index_t r) { return tri.diag[r]; };
    auto toff = [&](index_t r) { return (r > 0 && r < n) ? tri.off[r] : 0.0; };

    std::vector<double> z(width + 2), zj(width + 2), y(width);
    std::uint64_t flops = 0;
    for (index_t k = 0; k < n; ++k) {
        const index_t lo = std::max<index_t>(0, k - qe);
        const auto w = static_cast<std::size_t>(k - lo + 1);
        // z and zj are padded by one slot on each side: slot s <-> row lo - 1 + s.
        std::fill(z.begin(), z.end(), 0.0);
        z[w] = 1.0;
        for (index_t j = k - 1; j >= lo; --j) {
            for (std::size_t s = 0; s < w + 2; ++s) zj[s] = zval(lo - 1 + static_cast<index_t>(s), j);
            // c = (T z_j)^t z over the window
            double c = 0.0;
            for (std::size_t s = 1; s <= w; ++s) {
                const index_t r = lo - 1 + static_cast<index_t>(s);
                y[s - 1] = toff(r) * zj[s - 1] + tdiag(r) * zj[s] + toff(r + 1) * zj[s + 1];
            }
            for (std::size_t s = 1; s <= w; ++s) c += y[s - 1] * z[s];
            for (std::size_t s = 1; s <= w; ++s) z[s] -= c * zj[s];
            flops += 9 * w;
        }
        double nrm = 0.0;
        for (std::size_t s = 1; s <= w; ++s) {
            const index_t r = lo - 1 + static_cast<index_t>(s);
            const double tz = toff(r) * z[s - 1] + tdiag(r) * z[s] + toff(r + 1) * z[s + 1];
            nrm += z[s] * tz;
        }
        if (!(nrm > 0.0) || !std::isfinite(nrm)) throw BreakdownError("non-positive T-norm", k);
        const double scale = 1.0 / std::sqrt(nrm);
        double* col = band.data() + static_cast<std::size_t>(k) * width;
        const std::size_t offset = width - w; // rows below 0 stay zero
        for (std::size_t s = 1; s <= w; ++s) col[offset + s - 1] = z[s] * scale;
        flops += 8 * w + 1;
    }

    std::vector<SparseColumn> columns(n);
    for (index_t k = 0; k < n; ++k) {
        const index_t lo = std::max<index_t>(0, k - qe);
        for (index_t r = lo; r <= k; ++r) {
            columns[k].rows.push_back(r);
            columns[k].vals.push_back(zval(r, k));
        }
    }
    auto f = from_columns(columns, flops);
    f.q = q;
    return f;
}

FactoredInverse<double> fsai_banded(const CsrMatrix<double>& a, index_t q) {
    return t_orthogonalize(extract_tridiagonal(a), q);
}

std::vector<double> apply_fsai(const FactoredInverse<double>& p, std::span<const double> r) {
    std::vector<double> s(r.size()), work(r.size());
    p.apply(r, s, work);
    return s;
}

namespace {

enum class DropRule { tolerance, fixed_count };

// Stabilized A-orthogonalization. Columns z_j (j > i) that see a nonzero
// (A z_i)^t z_j are updated z_j -= (p_j / p_i) z_i right after z_i is final.
FactoredInverse<double> ainv(const CsrMatrix<double>& a, DropRule rule, double tau, index_t m) {
    require_square(a, "ainv");
    const index_t n = a.rows();
    std::vector<SparseColumn> z(n);
    for (index_t j = 0; j < n; ++j) {
        z[j].rows = {j};
        z[j].vals = {1.0};
    }
    // holders[r]: columns that may contain row r (may be stale after drops).
    std::vector<std::vector<index_t>> holders(n);
    for (index_t j = 0; j < n; ++j) holders[j].push_back(j);

    std::vector<double> u(n, 0.0);
    std::vector<char> in_u(n, 0);
    std::vector<index_t> u_rows;
    std::vector<index_t> mark(n, -1);
    std::vector<index_t> cand;
    std::vector<double> p(n);
    std::uint64_t flops = 0;

    SparseColumn merged;
    std::vector<std::size_t> order;

    auto apply_drop = [&](SparseColumn& c, index_t diag_row) {
        if (rule == DropRule::tolerance) {
            std::size_t out = 0;
            for (std::size_t e = 0; e < c.rows.size(); ++e) {
                if (c.rows[e] == diag_row || std::abs(c.vals[e]) >= tau) {
                    c.rows[out] = c.rows[e];
                    c.vals[out] = c.vals[e];
                    ++out;
                }
            }
            c.rows.resize(out);
            c.vals.resize(out);
            return;
        }
        if (static_cast<index_t>(c.rows.size()) <= m) return;
        order.resize(c.rows.size());
        for (std::size_t e = 0; e < order.size(); ++e) order[e] = e;
        // diagonal first, then by magnitude, ties to the smaller row
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            const bool dx = c.rows[x] == diag_row, dy = c.rows[y] == diag_row;
            if (dx != dy) return dx;
            const double ax = std::abs(c.vals[x]), ay = std::abs(c.vals[y]);
            if (ax != ay) return ax > ay;
            return c.rows[x] < c.rows[y];
        });
        order.resize(static_cast<std::size_t>(std::max<index_t>(m, 1)));
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return c.rows[x] < c.rows[y]; });
        SparseColumn kept;
        kept.rows.reserve(order.size());
        kept.vals.reserve(order.size());
        for (const auto e : order) {
            kept.rows.push_back(c.rows[e]);
            kept.vals.push_back(c.vals[e]);
        }
        c = std::move(kept);
    };

    for (index_t i = 0; i < n; ++i) {
        // u = A z_i
        u_rows.clear();
        const auto& zi = z[i];
        for (std::size_t e = 0; e < zi.rows.size(); ++e) {
            const index_t r = zi.rows[e];
            const double v = zi.vals[e];
            // A symmetric: column r of A equals row r.
            const auto cols = a.row_cols(r);
            const auto vals = a.row_values(r);
            for (std::size_t t = 0; t < cols.size(); ++t) {
                const index_t row = cols[t];
                if (!in_u[row]) {
                    in_u[row] = 1;
                    u[row] = 0.0;
                    u_rows.push_back(row);
                }
                u[row] += vals[t] * v;
            }
            flops += 2 * cols.size();
        }
        double pi = 0.0;
        for (std::size_t e = 0; e < zi.rows.size(); ++e) pi += zi.vals[e] * (in_u[zi.rows[e]] ? u[zi.rows[e]] : 0.0);
        flops += 2 * zi.rows.size();
        if (!(pi > 0.0) || !std::isfinite(pi)) throw BreakdownError("non-positive A-norm in AINV", i);
        p[i] = pi;

        cand.clear();
        for (const index_t r : u_rows)
            for (const index_t j : holders[r])
                if (j > i && mark[j] != i) {
                    mark[j] = i;
                    cand.push_back(j);
                }
        std::sort(cand.begin(), cand.end());

        for (const index_t j : cand) {
            auto& zj = z[j];
            double pj = 0.0;
            for (std::size_t e = 0; e < zj.rows.size(); ++e)
                if (in_u[zj.rows[e]]) pj += u[zj.rows[e]] * zj.vals[e];
            flops += 2 * zj.rows.size();
            if (pj == 0.0) continue;
            const double f = pj / pi;
            // zj -= f * zi, both sorted by row
            merged.rows.clear();
            merged.vals.clear();
            std::size_t x = 0, y = 0;
            while (x < zj.rows.size() || y < zi.rows.size()) {
                if (y == zi.rows.size() || (x < zj.rows.size() && zj.rows[x] < zi.rows[y])) {
                    merged.rows.push_back(zj.rows[x]);
                    merged.vals.push_back(zj.vals[x]);
                    ++x;
                } else if (x == zj.rows.size() || zi.rows[y] < zj.rows[x]) {
                    merged.rows.push_back(zi.rows[y]);
                    merged.vals.push_back(-f * zi.vals[y]);
                    holders[zi.rows[y]].push_back(j);
                    ++y;
                } else {
                    merged.rows.push_back(zj.rows[x]);
                    merged.vals.push_back(zj.vals[x] - f * zi.vals[y]);
                    ++x;
                    ++y;
                }
            }
            flops += 2 * zi.rows.size() + 1;
            std::swap(zj, merged);
            apply_drop(zj, j);
        }
        for (const index_t r : u_rows) in_u[r] = 0;
    }

    for (index_t i = 0; i < n; ++i) {
        const double s = 1.0 / std::sqrt(p[i]);
        for (auto& v : z[i].vals) v *= s;
        flops += z[i].vals.size() + 1;
    }
    return from_columns(z, flops);
}

} // namespace

FactoredInverse<double> ainv_drop_tolerance(const CsrMatrix<double>& a, double tau) {
    if (!(tau >= 0.0)) throw DomainError("drop tolerance must be non-negative");
    return ainv(a, DropRule::tolerance, tau, 0);
}

FactoredInverse<double> ainv_fixed_nnz(const CsrMatrix<double>& a, index_t m) {
    if (m < 1) throw DomainError("entries per column must be at least 1");
    return ainv(a, DropRule::fixed_count, 0.0, m);
}

template <class T>
void Preconditioner<T>::apply(std::span<const T> r, std::span<T> s, std::span<T> work) const {
    detail::check_len(r.size(), s.size(), "preconditioner apply");
    if (const auto* d = diagonal()) {
        d->apply(r, s);
    } else if (const auto* f = factored()) {
        detail::check_len(work.size(), r.size(), "preconditioner workspace");
        f->apply(r, s, work);
    } else {
        std::copy(r.begin(), r.end(), s.begin());
    }
}

template <class T>
std::uint64_t Preconditioner<T>::apply_flops() const {
    if (const auto* d = diagonal()) return d->inv_diag.size();
    if (const auto* f = factored())
        return 2 * static_cast<std::uint64_t>(f->z.nnz()) + 2 * static_cast<std::uint64_t>(f->z_t.nnz());
    return 0;
}

template <class T>
std::uint64_t Preconditioner<T>::build_flops() const {
    if (const auto* d = diagonal()) return d->inv_diag.size();
    if (const auto* f = factored()) return f->build_flops;
    return 0;
}

template class Preconditioner<float>;
template class Preconditioner<double>;

} // namespace fsai

namespace fsai {

std::string PrecondSpec::label() const {
    char buf[64];
    switch (kind) {
    case PrecondKind::none: return "none";
    case PrecondKind::diagonal: return "diagonal";
    case PrecondKind::fsai: return "fsai:" + std::to_string(q);
    case PrecondKind::ainv_drop: std::snprintf(buf, sizeof buf, "ainv-drop:%g", tau); return buf;
    case PrecondKind::ainv_nnz: return "ainv-nnz:" + std::to_string(nnz_per_col);
    }
    return "?";
}

void PrecondSpec::validate() const {
    if (q < 0) throw ConfigError("fsai bandwidth must be non-negative");
    if (!(tau >= 0.0)) throw ConfigError("ainv-drop tolerance must be non-negative");
    if (nnz_per_col < 1) throw ConfigError("ainv-nnz needs at least one entry per column");
}

PrecondSpec parse_precond(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const bool has_arg = colon != std::string::npos;
    const std::string arg = has_arg ? text.substr(colon + 1) : std::string();
    PrecondSpec spec;
    auto whole = [&](auto parse) {
        std::size_t used = 0;
        try {
            const auto v = parse(arg, &used);
            if (used != arg.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("bad parameter '" + arg + "' in preconditioner '" + text + "'");
        }
    };
    auto as_int = [&] { return whole([](const std::string& s, std::size_t* u) { return std::stoi(s, u); }); };
    auto as_double = [&] { return whole([](const std::string& s, std::size_t* u) { return std::stod(s, u); }); };

    if (name == "none" || name == "diagonal") {
        if (has_arg) throw ConfigError("preconditioner '" + name + "' takes no parameter");
        spec.kind = name == "none" ? PrecondKind::none : PrecondKind::diagonal;
    } else if (name == "fsai") {
        spec.kind = PrecondKind::fsai;
        if (has_arg) spec.q = as_int();
    } else if (name == "ainv-drop") {
        spec.kind = PrecondKind::ainv_drop;
        if (has_arg) spec.tau = as_double();
    } else if (name == "ainv-nnz") {
        spec.kind = PrecondKind::ainv_nnz;
        if (has_arg) spec.nnz_per_col = as_int();
    } else {
        throw ConfigError("unknown preconditioner '" + text + "'");
    }
    spec.validate();
    return spec;
}

Preconditioner<double> make_preconditioner(const CsrMatrix<double>& a, const PrecondSpec& spec) {
    switch (spec.kind) {
    case PrecondKind::none: return {IdentityPrecond{}, spec.label()};
    case PrecondKind::diagonal: return {diagonal_precond(a), spec.label()};
    case PrecondKind::fsai: return {fsai_banded(a, spec.q), spec.label()};
    case PrecondKind::ainv_drop: return {ainv_drop_tolerance(a, spec.tau), spec.label()};
    case PrecondKind::ainv_nnz: return {ainv_fixed_nnz(a, spec.nnz_per_col), spec.label()};
    }
    throw ConfigError("unknown preconditioner kind");
}

} // namespace fsai
