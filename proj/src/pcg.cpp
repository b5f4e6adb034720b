#include "fsai/pcg.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

namespace fsai {
namespace {

double nrm2_double(std::span<const double> v) { return blas::nrm2(v); }

template <class T>
double nrm2_as_double(std::span<const T> v) {
    double s = 0.0;
    for (const T x : v) s += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(s);
}

template <class T>
void check_finite(T v, const char* what, index_t iteration) {
    if (!std::isfinite(static_cast<double>(v)))
        throw NumericalBreakdown(std::string(what) + " is not finite at iteration " + std::to_string(iteration));
}

// r = b - A x in double.
template <class T>
void true_residual(const CsrMatrix<T>& a, std::span<const double> b, std::span<const double> x,
                   std::span<double> r) {
    spmv<T, double>(a, x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
}

} // namespace

template <class T>
SolveReport pcg_solve(const CsrMatrix<T>& a, std::span<const T> b, const Preconditioner<T>& m,
                      std::span<const double> x0, const SolverConfig& config) {
    if (!a.square()) throw DimensionError("pcg: matrix is not square");
    const auto n = static_cast<std::size_t>(a.rows());
    detail::check_len(b.size(), n, "pcg rhs");
    if (!x0.empty()) detail::check_len(x0.size(), n, "pcg initial guess");
    if (!(config.epsilon > 0.0)) throw DomainError("pcg: epsilon must be positive");
    if (config.max_iter < 0) throw DomainError("pcg: max_iter must be non-negative");
    const index_t max_iter = config.max_iter == 0 ? a.rows() : config.max_iter;
    const index_t interval = std::max<index_t>(config.check_interval, 1);

    const auto start = std::chrono::steady_clock::now();
    SolveReport rep;
    rep.solution.assign(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), rep.solution.begin());
    auto& x = rep.solution;

    std::vector<double> bd(b.begin(), b.end());
    std::vector<double> rd(n);
    const double bnorm = nrm2_double(bd);
    auto finish = [&](double rel) {
        rep.final_rel_residual = rel;
        rep.converged = rel <= config.epsilon;
        rep.flops = flop_model(a, m, rep.iterations);
        rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return rep;
    };
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        if (config.record_history) rep.residual_history.push_back(0.0);
        return finish(0.0);
    }

    true_residual(a, std::span<const double>(bd), std::span<const double>(x), std::span<double>(rd));
    double true_rel = nrm2_double(rd) / bnorm;
    if (config.record_history) rep.residual_history.push_back(true_rel);
    if (true_rel <= config.epsilon) return finish(true_rel);

    std::vector<T> r(rd.begin(), rd.end()), s(n), d(n), q(n), work(n);
    const std::span<const T> rc(r), sc(s), dc(d), qc(q);
    m.apply(rc, s, work);
    T sr = blas::dot(sc, rc);
    check_finite(sr, "(s, r)", 0);
    if (config.raw_residual_update)
        std::copy(r.begin(), r.end(), d.begin());
    else
        std::copy(s.begin(), s.end(), d.begin());

    bool have_true = true;
    for (index_t it = 1; it <= max_iter; ++it) {
        spmv<T, T>(a, dc, q);
        const T dq = blas::dot(dc, qc);
        check_finite(dq, "(d, A d)", it);
        if (!(dq > T(0)))
            throw NumericalBreakdown("non-positive curvature (d, A d) at iteration " + std::to_string(it));
        const T alpha = sr / dq;
        check_finite(alpha, "alpha", it);
        const double alpha_d = static_cast<double>(alpha);
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha_d * static_cast<double>(d[i]);
        blas::axpy(T(-alpha), qc, std::span<T>(r));
        m.apply(rc, s, work);
        T sr_new = blas::dot(sc, rc);
        check_finite(sr_new, "(s, r)", it);
        rep.iterations = it;

        const double rec = nrm2_as_double(rc) / bnorm;
        if (config.record_history) rep.residual_history.push_back(rec);
        have_true = false;
        if (rec <= config.epsilon || it % interval == 0 || it == max_iter) {
            true_residual(a, std::span<const double>(bd), std::span<const double>(x), std::span<double>(rd));
            true_rel = nrm2_double(rd) / bnorm;
            have_true = true;
            if (true_rel <= config.epsilon || it == max_iter) break;
            std::copy(rd.begin(), rd.end(), r.begin());
            m.apply(rc, s, work);
            sr_new = blas::dot(sc, rc);
            check_finite(sr_new, "(s, r)", it);
        }
        const T beta = sr_new / sr;
        sr = sr_new;
        if (config.raw_residual_update)
            blas::xpby(rc, beta, std::span<T>(d));
        else
            blas::xpby(sc, beta, std::span<T>(d));
    }
    if (!have_true) {
        true_residual(a, std::span<const double>(bd), std::span<const double>(x), std::span<double>(rd));
        true_rel = nrm2_double(rd) / bnorm;
    }
    return finish(true_rel);
}

template SolveReport pcg_solve<float>(const CsrMatrix<float>&, std::span<const float>, const Preconditioner<float>&,
                                      std::span<const double>, const SolverConfig&);
template SolveReport pcg_solve<double>(const CsrMatrix<double>&, std::span<const double>,
                                       const Preconditioner<double>&, std::span<const double>, const SolverConfig&);

double convergence_bound(double mu2, index_t m) {
    if (!(mu2 >= 1.0)) throw DomainError("condition number must be at least 1");
    if (m < 1) throw DomainError("iteration index must be at least 1");
    const double s = std::sqrt(mu2);
    return 2.0 * std::pow((s - 1.0) / (s + 1.0), static_cast<double>(m - 1));
}

template <class T>
std::uint64_t flops_per_iteration(const CsrMatrix<T>& a, const Preconditioner<T>& m) {
    return 2 * static_cast<std::uint64_t>(a.nnz()) + m.apply_flops() + 10 * static_cast<std::uint64_t>(a.rows());
}

template <class T>
std::uint64_t flop_model(const CsrMatrix<T>& a, const Preconditioner<T>& m, index_t iterations) {
    return m.build_flops() + static_cast<std::uint64_t>(iterations) * flops_per_iteration(a, m);
}

template std::uint64_t flops_per_iteration<float>(const CsrMatrix<float>&, const Preconditioner<float>&);
template std::uint64_t flops_per_iteration<double>(const CsrMatrix<double>&, const Preconditioner<double>&);
template std::uint64_t flop_model<float>(const CsrMatrix<float>&, const Preconditioner<float>&, index_t);
template std::uint64_t flop_model<double>(const CsrMatrix<double>&, const Preconditioner<double>&, index_t);

std::pair<double, double> tridiagonal_extreme_eigs(std::span<const double> alpha, std::span<const double> beta) {
    const std::size_t m = alpha.size();
    if (m == 0) throw DimensionError("empty tridiagonal matrix");
    detail::check_len(beta.size() + 1, m, "tridiagonal off-diagonal");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < m; ++i) {
        const double rad = (i > 0 ? std::abs(beta[i - 1]) : 0.0) + (i + 1 < m ? std::abs(beta[i]) : 0.0);
        lo = std::min(lo, alpha[i] - rad);
        hi = std::max(hi, alpha[i] + rad);
    }
    const double scale = std::max(std::abs(lo), std::abs(hi));
    const double tiny = std::numeric_limits<double>::min() + std::numeric_limits<double>::epsilon() * scale * 1e-10;
    // number of eigenvalues strictly below x
    auto count_below = [&](double x) {
        std::size_t c = 0;
        double d = alpha[0] - x;
        if (d == 0.0) d = -tiny;
        if (d < 0.0) ++c;
        for (std::size_t i = 1; i < m; ++i) {
            d = alpha[i] - x - beta[i - 1] * beta[i - 1] / d;
            if (d == 0.0) d = -tiny;
            if (d < 0.0) ++c;
        }
        return c;
    };
    auto kth = [&](std::size_t k) { // smallest x with count_below(x) >= k
        double a = lo, b = hi;
        for (int step = 0; step < 300; ++step) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            if (count_below(mid) >= k)
                b = mid;
            else
                a = mid;
        }
        return 0.5 * (a + b);
    };
    return {kth(1), kth(m)};
}

EigenEstimate estimate_extreme_eigs(const LinearOperator& op, index_t n, index_t iters, std::uint64_t seed) {
    if (n <= 0) throw DimensionError("operator size must be positive");
    if (iters <= 0) throw DomainError("Lanczos needs at least one iteration");
    const auto nz = static_cast<std::size_t>(n);
    const index_t kmax = std::min(iters, n);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<std::vector<double>> basis;
    basis.reserve(static_cast<std::size_t>(kmax));
    std::vector<double> v(nz);
    for (auto& e : v) e = gauss(rng);
    blas::scal(1.0 / blas::nrm2(v), v);

    std::vector<double> alpha, beta;
    std::vector<double> w(nz);
    EigenEstimate est;
    for (index_t k = 0; k < kmax; ++k) {
        basis.push_back(v);
        op(std::span<const double>(basis.back()), std::span<double>(w));
        const double a = blas::dot(w, basis.back());
        alpha.push_back(a);
        // full reorthogonalization, two passes
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : basis) blas::axpy(-blas::dot(w, u), u, w);
        const double b = blas::nrm2(w);
        est.iterations = k + 1;
        double scale = 0.0;
        for (const double x : alpha) scale = std::max(scale, std::abs(x));
        for (const double x : beta) scale = std::max(scale, std::abs(x));
        if (b <= 1e-10 * scale || k + 1 == kmax) {
            est.early_terminated = b <= 1e-10 * scale && k + 1 < n;
            break;
        }
        beta.push_back(b);
        for (std::size_t i = 0; i < nz; ++i) v[i] = w[i] / b;
    }
    beta.resize(alpha.size() - 1);
    const auto [lmin, lmax] = tridiagonal_extreme_eigs(alpha, beta);
    est.lambda_min = lmin;
    est.lambda_max = lmax;
    return est;
}

LinearOperator preconditioned_operator(const CsrMatrix<double>& a, const Preconditioner<double>& m) {
    auto mat = std::make_shared<const CsrMatrix<double>>(a);
    const auto n = static_cast<std::size_t>(a.rows());
    if (const auto* d = m.diagonal()) {
        auto scale = std::make_shared<std::vector<double>>(d->inv_diag.size());
        for (std::size_t i = 0; i < scale->size(); ++i) (*scale)[i] = std::sqrt(d->inv_diag[i]);
        return [mat, scale, n](std::span<const double> x, std::span<double> y) {
            std::vector<double> t(n);
            for (std::size_t i = 0; i < n; ++i) t[i] = (*scale)[i] * x[i];
            spmv<double, double>(*mat, t, y);
            for (std::size_t i = 0; i < n; ++i) y[i] *= (*scale)[i];
        };
    }
    if (const auto* f = m.factored()) {
        auto fi = std::make_shared<const FactoredInverse<double>>(*f);
        return [mat, fi, n](std::span<const double> x, std::span<double> y) {
            std::vector<double> t(n), u(n);
            spmv<double, double>(fi->z, x, t);
            spmv<double, double>(*mat, t, u);
            spmv<double, double>(fi->z_t, u, y);
        };
    }
    return [mat](std::span<const double> x, std::span<double> y) { spmv<double, double>(*mat, x, y); };
}

} // namespace fsai
