#pragma once

#include "fsai/sparse.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fsai {

template <class T>
struct DiagonalPrecond {
    std::vector<T> inv_diag;

    void apply(std::span<const T> r, std::span<T> s) const {
        detail::check_len(r.size(), inv_diag.size(), "diagonal apply");
        detail::check_len(s.size(), inv_diag.size(), "diagonal apply");
        const auto n = static_cast<std::ptrdiff_t>(r.size());
        const T* d = inv_diag.data();
#pragma omp parallel for schedule(static) if (n > detail::omp_threshold)
        for (std::ptrdiff_t i = 0; i < n; ++i) s[i] = d[i] * r[i];
    }

    template <class U>
    DiagonalPrecond<U> cast() const {
        return {std::vector<U>(inv_diag.begin(), inv_diag.end())};
    }
};

/// Factored approximate inverse P = Z Z^t with Z upper triangular. `z_t` is
/// stored so both products run as plain row-wise CSR kernels.
template <class T>
struct FactoredInverse {
    CsrMatrix<T> z;
    CsrMatrix<T> z_t;
    index_t q = 0;                 ///< upper bandwidth of z
    std::uint64_t build_flops = 0; ///< operations spent constructing z

    index_t size() const noexcept { return z.rows(); }

    /// s = Z (Z^t r). `work` needs size() entries.
    void apply(std::span<const T> r, std::span<T> s, std::span<T> work) const {
        spmv<T, T>(z_t, r, work);
        spmv<T, T>(z, std::span<const T>(work.data(), work.size()), s);
    }

    template <class U>
    FactoredInverse<U> cast() const {
        return {z.template cast<U>(), z_t.template cast<U>(), q, build_flops};
    }
};

/// inv_diag[i] = 1 / a_ii. Throws SingularError naming the first row whose
/// diagonal is zero, negative or missing.
DiagonalPrecond<double> diagonal_precond(const CsrMatrix<double>& a);

/// Entries with |j - i| <= 1.
CsrMatrix<double> extract_tridiagonal(const CsrMatrix<double>& a);

/// Upper bidiagonal U with U^t U = T for a symmetric tridiagonal SPD T.
/// Throws NotSpdError with the pivot index on a non-positive pivot.
CsrMatrix<double> cholesky_bidiagonal(const CsrMatrix<double>& t);

/// Inverse of an upper bidiagonal U by backward substitution, keeping only
/// entries with j - i <= q:
///   z(k,k)   = 1 / u(k,k)
///   z(k-i,k) = -u(k-i,k-i+1) / u(k-i,k-i) * z(k-i+1,k)
CsrMatrix<double> truncated_inverse_factor(const CsrMatrix<double>& u, index_t q);

/// Banded inverse factor of a symmetric tridiagonal T by T-orthogonalization
/// of the unit vectors. Each column starts as e_k, is conjugated against the
/// previous q columns (nearest first) with entries beyond the band dropped as
/// it goes, and is finally scaled to unit T-norm. `build_flops` receives the
/// operation count. Throws BreakdownError on a non-positive T-norm.
FactoredInverse<double> t_orthogonalize(const CsrMatrix<double>& t, index_t q);

/// FSAI of the tridiagonal part of A: t_orthogonalize(extract_tridiagonal(a), q).
FactoredInverse<double> fsai_banded(const CsrMatrix<double>& a, index_t q);

/// Shorthand for P.apply with its own workspace.
std::vector<double> apply_fsai(const FactoredInverse<double>& p, std::span<const double> r);

/// Bridson-style comparators: A-orthogonalization of the unit vectors
/// (stabilized right-looking form) with a drop rule applied after every
/// column update. The unit diagonal of each column is never dropped.
/// Columns are scaled to unit A-norm on completion.
FactoredInverse<double> ainv_drop_tolerance(const CsrMatrix<double>& a, double tau);

/// Keeps the m largest-magnitude entries per column (diagonal always kept,
/// ties go to the smaller row index).
FactoredInverse<double> ainv_fixed_nnz(const CsrMatrix<double>& a, index_t m);

inline constexpr double default_ainv_tau = 0.1;
inline constexpr index_t default_ainv_nnz = 5;
inline constexpr index_t default_fsai_q = 4;

struct IdentityPrecond {};

/// Value-semantic handle around any of the preconditioners above. The solver
/// only ever calls apply().
template <class T>
class Preconditioner {
public:
    using Impl = std::variant<IdentityPrecond, DiagonalPrecond<T>, FactoredInverse<T>>;

    Preconditioner() : impl_(IdentityPrecond{}), label_("none") {}
    Preconditioner(Impl impl, std::string label) : impl_(std::move(impl)), label_(std::move(label)) {}

    const std::string& label() const noexcept { return label_; }
    const Impl& impl() const noexcept { return impl_; }

    bool is_identity() const noexcept { return std::holds_alternative<IdentityPrecond>(impl_); }
    const DiagonalPrecond<T>* diagonal() const noexcept { return std::get_if<DiagonalPrecond<T>>(&impl_); }
    const FactoredInverse<T>* factored() const noexcept { return std::get_if<FactoredInverse<T>>(&impl_); }

    void apply(std::span<const T> r, std::span<T> s, std::span<T> work) const;

    std::vector<T> apply(std::span<const T> r) const {
        std::vector<T> s(r.size()), work(r.size());
        apply(r, s, work);
        return s;
    }

    /// Operations per application: 2 nnz(Z) + 2 nnz(Z^t), n for diagonal, 0 for identity.
    std::uint64_t apply_flops() const;
    std::uint64_t build_flops() const;

    template <class U>
    Preconditioner<U> cast() const {
        return std::visit(
            [&](const auto& p) -> Preconditioner<U> {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, IdentityPrecond>)
                    return Preconditioner<U>(IdentityPrecond{}, label_);
                else
                    return Preconditioner<U>(p.template cast<U>(), label_);
            },
            impl_);
    }

private:
    Impl impl_;
    std::string label_;
};

enum class PrecondKind { none, diagonal, fsai, ainv_drop, ainv_nnz };

struct PrecondSpec {
    PrecondKind kind = PrecondKind::fsai;
    index_t q = default_fsai_q;          ///< fsai
    double tau = default_ainv_tau;       ///< ainv-drop
    index_t nnz_per_col = default_ainv_nnz; ///< ainv-nnz

    /// "none", "diagonal", "fsai:4", "ainv-drop:0.1", "ainv-nnz:5"
    std::string label() const;
    /// Throws ConfigError on an out-of-range parameter.
    void validate() const;
};

/// Parses the label syntax above; the parameter after ':' is optional.
/// Throws ConfigError on anything else.
PrecondSpec parse_precond(const std::string& text);

/// Built in double; use Preconditioner::cast for single-precision solves.
Preconditioner<double> make_preconditioner(const CsrMatrix<double>& a, const PrecondSpec& spec);

} // namespace fsai
