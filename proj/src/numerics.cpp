#include "epsense/numerics.hpp"
#include "epsense/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <random>

namespace epsense {

namespace {
constexpr double kPivotTol = 1e-14;
constexpr double kPowerTol = 1e-13;
constexpr int kPowerCap = 10000;
constexpr int kQrSweepsPerEig = 64;

unsigned long long g_power_seed = 0x5eed5eedULL;
} // namespace

void set_power_iteration_seed(unsigned long long seed) { g_power_seed = seed; }
unsigned long long power_iteration_seed() { return g_power_seed; }

CMat CMat::identity(std::size_t n) {
    CMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMat operator*(const CMat& a, const CMat& b) {
    assert(a.cols() == b.rows());
    CMat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

CMat operator+(const CMat& a, const CMat& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    CMat c = a;
    for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] += b.data()[i];
    return c;
}

CMat operator-(const CMat& a, const CMat& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    CMat c = a;
    for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] -= b.data()[i];
    return c;
}

CMat operator*(cplx s, const CMat& a) {
    CMat c = a;
    for (auto& x : c.data()) x *= s;
    return c;
}

CVec operator*(const CMat& a, const CVec& v) {
    assert(a.cols() == v.size());
    CVec w(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
        w[i] = s;
    }
    return w;
}

CMat adjoint(const CMat& a) {
    CMat c(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(j, i) = std::conj(a(i, j));
    return c;
}

double max_abs(const CMat& a) {
    double m = 0.0;
    for (const auto& x : a.data()) m = std::max(m, std::abs(x));
    return m;
}

double frobenius_norm(const CMat& a) {
    double s = 0.0;
    for (const auto& x : a.data()) s += std::norm(x);
    return std::sqrt(s);
}

bool is_hermitian(const CMat& a, double tol) {
    if (a.rows() != a.cols()) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i; j < a.cols(); ++j)
            if (std::abs(a(i, j) - std::conj(a(j, i))) > tol) return false;
    return true;
}

double two_norm(const CVec& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

cplx dot(const CVec& a, const CVec& b) {
    assert(a.size() == b.size());
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

void normalize(CVec& v) {
    const double n = two_norm(v);
    if (n > 0.0)
        for (auto& x : v) x /= n;
}

CMat inverse(const CMat& a) {
    if (a.rows() != a.cols()) throw SingularMatrix("inverse: matrix not square");
    const std::size_t n = a.rows();
    const double scale = max_abs(a);
    if (scale == 0.0) throw SingularMatrix("inverse: zero matrix");

    CMat w = a;
    CMat inv = CMat::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(w(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(w(r, col));
            if (v > best) { best = v; piv = r; }
        }
        if (best < kPivotTol * scale)
            throw SingularMatrix("inverse: pivot below threshold");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(w(piv, j), w(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        }
        const cplx d = w(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            w(col, j) /= d;
            inv(col, j) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const cplx f = w(r, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                w(r, j) -= f * w(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

namespace {

// Householder reduction to upper Hessenberg form; accumulates the unitary Q.
void hessenberg(CMat& h, CMat& q) {
    const std::size_t n = h.rows();
    q = CMat::identity(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double colnorm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) colnorm += std::norm(h(i, k));
        colnorm = std::sqrt(colnorm);
        if (colnorm == 0.0) continue;

        CVec v(n, 0.0);
        const cplx x0 = h(k + 1, k);
        const cplx phase = (x0 != 0.0) ? x0 / std::abs(x0) : cplx(1.0);
        v[k + 1] = x0 + phase * colnorm;
        for (std::size_t i = k + 2; i < n; ++i) v[i] = h(i, k);
        double vn = two_norm(v);
        if (vn == 0.0) continue;
        for (auto& e : v) e /= vn;

        // H <- (I - 2vv^dag) H (I - 2vv^dag), Q <- Q (I - 2vv^dag)
        for (std::size_t j = 0; j < n; ++j) {
            cplx s = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) s += std::conj(v[i]) * h(i, j);
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= 2.0 * v[i] * s;
        }
        for (std::size_t i = 0; i < n; ++i) {
            cplx s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += h(i, j) * v[j];
            for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= 2.0 * s * std::conj(v[j]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            cplx s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += q(i, j) * v[j];
            for (std::size_t j = k + 1; j < n; ++j) q(i, j) -= 2.0 * s * std::conj(v[j]);
        }
    }
}

// Shifted QR on a Hessenberg matrix via Givens rotations; h converges to
// upper triangular (complex Schur form), z accumulates the Schur vectors.
void schur_qr(CMat& h, CMat& z) {
    const std::size_t n = h.rows();
    const double hnorm = std::max(frobenius_norm(h), 1e-300);
    std::size_t hi = n - 1;
    int iter_total = 0;
    const int cap = kQrSweepsPerEig * static_cast<int>(n);

    while (hi > 0) {
        // deflation scan
        std::size_t lo = hi;
        while (lo > 0) {
            const double sub = std::abs(h(lo, lo - 1));
            const double diag = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
            if (sub <= 1e-16 * std::max(diag, 1e-3 * hnorm)) {
                h(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) { --hi; continue; }

        if (++iter_total > cap)
            throw NoConvergence("eig: QR iteration cap reached");

        // Wilkinson shift from the trailing 2x2 of the active block
        const cplx a = h(hi - 1, hi - 1), b = h(hi - 1, hi);
        const cplx c = h(hi, hi - 1), d = h(hi, hi);
        const cplx tr = a + d;
        const cplx det = a * d - b * c;
        const cplx disc = std::sqrt(tr * tr - 4.0 * det);
        const cplx l1 = 0.5 * (tr + disc), l2 = 0.5 * (tr - disc);
        cplx mu = (std::abs(l1 - d) < std::abs(l2 - d)) ? l1 : l2;
        if (iter_total % 16 == 15) mu = d + cplx(0.0, 1e-3) * std::abs(c); // ad-hoc kick

        // explicit QR step on the active block: Givens sweep of H - mu I
        std::vector<cplx> cs(hi), sn(hi);
        for (std::size_t k = lo; k <= hi; ++k) h(k, k) -= mu;
        for (std::size_t k = lo; k < hi; ++k) {
            const cplx f = h(k, k);
            const cplx g = h(k + 1, k);
            const double r = std::hypot(std::abs(f), std::abs(g));
            if (r == 0.0) { cs[k] = 1.0; sn[k] = 0.0; continue; }
            cs[k] = f / r;
            sn[k] = g / r;
            for (std::size_t j = k; j < n; ++j) {
                const cplx t1 = h(k, j), t2 = h(k + 1, j);
                h(k, j) = std::conj(cs[k]) * t1 + std::conj(sn[k]) * t2;
                h(k + 1, j) = -sn[k] * t1 + cs[k] * t2;
            }
        }
        // multiply R by the rotations from the right; accumulate in z
        for (std::size_t k = lo; k < hi; ++k) {
            for (std::size_t i = 0; i <= std::min(k + 1, hi); ++i) {
                const cplx t1 = h(i, k), t2 = h(i, k + 1);
                h(i, k) = t1 * cs[k] + t2 * sn[k];
                h(i, k + 1) = -t1 * std::conj(sn[k]) + t2 * std::conj(cs[k]);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const cplx t1 = z(i, k), t2 = z(i, k + 1);
                z(i, k) = t1 * cs[k] + t2 * sn[k];
                z(i, k + 1) = -t1 * std::conj(sn[k]) + t2 * std::conj(cs[k]);
            }
        }
        for (std::size_t k = lo; k <= hi; ++k) h(k, k) += mu;
    }
}

// Right eigenvectors of an upper triangular T by guarded back substitution,
// mapped back through the Schur basis.
CMat triangular_eigenvectors(const CMat& t, const CMat& z) {
    const std::size_t n = t.rows();
    const double tnorm = std::max(frobenius_norm(t), 1e-300);
    CMat vecs(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx lam = t(k, k);
        CVec y(n, 0.0);
        y[k] = 1.0;
        for (std::size_t jj = k; jj-- > 0;) {
            cplx s = 0.0;
            for (std::size_t m = jj + 1; m <= k; ++m) s += t(jj, m) * y[m];
            cplx den = t(jj, jj) - lam;
            if (std::abs(den) < 1e-15 * tnorm) den = cplx(1e-15 * tnorm, 0.0);
            y[jj] = -s / den;
        }
        CVec v = z * y;
        normalize(v);
        for (std::size_t i = 0; i < n; ++i) vecs(i, k) = v[i];
    }
    return vecs;
}

struct SchurResult {
    std::vector<cplx> values;
    CMat vectors;
};

SchurResult right_eig(const CMat& a) {
    const std::size_t n = a.rows();
    SchurResult r;
    if (n == 1) {
        r.values = {a(0, 0)};
        r.vectors = CMat::identity(1);
        return r;
    }
    if (n == 2) {
        const cplx tr = a(0, 0) + a(1, 1);
        const cplx det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        const cplx disc = std::sqrt(tr * tr - 4.0 * det);
        cplx s = disc;
        if (std::real(std::conj(tr) * s) < 0.0) s = -s; // avoid cancellation
        const cplx l1 = 0.5 * (tr + s);
        const cplx l2 = (std::abs(l1) > 0.0 && std::abs(s) > 0.0) ? det / l1 : 0.5 * (tr - s);
        r.values = {l1, l2};
        r.vectors = CMat(2, 2);
        for (int k = 0; k < 2; ++k) {
            const cplx lam = r.values[static_cast<std::size_t>(k)];
            // (A - lam) v = 0: pick the numerically larger row construction
            CVec v1 = {a(0, 1), lam - a(0, 0)};
            CVec v2 = {lam - a(1, 1), a(1, 0)};
            CVec v = (two_norm(v1) >= two_norm(v2)) ? v1 : v2;
            if (two_norm(v) == 0.0) v = {(k == 0) ? cplx(1.0) : cplx(0.0),
                                         (k == 0) ? cplx(0.0) : cplx(1.0)};
            normalize(v);
            r.vectors(0, static_cast<std::size_t>(k)) = v[0];
            r.vectors(1, static_cast<std::size_t>(k)) = v[1];
        }
        return r;
    }

    CMat h = a, q;
    hessenberg(h, q);
    schur_qr(h, q);
    r.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.values[i] = h(i, i);
    r.vectors = triangular_eigenvectors(h, q);
    return r;
}

} // namespace

Eigensystem eig(const CMat& a) {
    if (a.rows() != a.cols()) throw NoConvergence("eig: matrix not square");
    const std::size_t n = a.rows();
    SchurResult rt = right_eig(a);
    SchurResult lt = right_eig(adjoint(a));

    // Pair left eigenvectors (right eigenvectors of A^dag, eigenvalues are
    // the conjugates) with the right ones: greedy nearest match, ties by index.
    Eigensystem out;
    out.values = rt.values;
    out.right = rt.vectors;
    out.left = CMat(n, n);
    std::vector<bool> used(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t best = n;
        double bestd = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            if (used[m]) continue;
            const double d = std::abs(std::conj(lt.values[m]) - rt.values[k]);
            if (best == n || d < bestd) { best = m; bestd = d; }
        }
        used[best] = true;
        for (std::size_t i = 0; i < n; ++i) out.left(i, k) = lt.vectors(i, best);
    }
    return out;
}

namespace {

double power_iteration(const CMat& b, const CVec& start, CVec* out_vec) {
    const std::size_t n = b.rows();
    CVec v = start;
    normalize(v);
    double theta = 0.0;
    double prev = -1.0;
    for (int it = 0; it < kPowerCap; ++it) {
        CVec w = b * v;
        theta = std::real(dot(v, w));
        const double wn = two_norm(w);
        if (wn == 0.0) { theta = 0.0; break; }
        // residual bound: |theta - lambda_max| <= ||Bv - theta v|| for Hermitian B
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) res += std::norm(w[i] - theta * v[i]);
        res = std::sqrt(res);
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
        const bool small_change = prev >= 0.0 && std::abs(theta - prev) <= kPowerTol * std::abs(theta);
        if (small_change && res <= 1e-12 * std::max(std::abs(theta), 1e-300)) break;
        prev = theta;
    }
    if (out_vec) *out_vec = v;
    return theta;
}

double hermitian_max_eig_2x2(const CMat& b) {
    const double p = std::real(b(0, 0));
    const double q = std::real(b(1, 1));
    const double off = std::abs(b(0, 1));
    return 0.5 * (p + q) + std::hypot(0.5 * (p - q), off);
}

} // namespace

DominantEig dominant_hermitian_eig(const CMat& b) {
    const std::size_t n = b.rows();
    DominantEig r;
    if (max_abs(b) == 0.0) {
        r.vector = CVec(n, 0.0);
        if (n > 0) r.vector[0] = 1.0;
        return r;
    }
    CVec ones(n, cplx(1.0, 0.0));
    CVec v1, v2;
    const double t1 = power_iteration(b, ones, &v1);

    std::mt19937_64 rng(g_power_seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CVec randv(n);
    for (auto& x : randv) x = cplx(u(rng), u(rng));
    const double t2 = power_iteration(b, randv, &v2);

    if (t1 >= t2) { r.value = t1; r.vector = v1; }
    else { r.value = t2; r.vector = v2; }

    // Gauge: make the largest-magnitude entry real positive.
    std::size_t imax = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(r.vector[i]) > std::abs(r.vector[imax])) imax = i;
    if (std::abs(r.vector[imax]) > 0.0) {
        const cplx ph = r.vector[imax] / std::abs(r.vector[imax]);
        for (auto& x : r.vector) x /= ph;
    }
    return r;
}

double spectral_norm(const CMat& a) {
    if (max_abs(a) == 0.0) return 0.0;
    const CMat b = adjoint(a) * a;
    const std::size_t n = b.rows();
    // Work on a scaled copy so huge/tiny inputs stay in range.
    if (n == 1) return std::sqrt(std::real(b(0, 0)));
    if (n == 2) return std::sqrt(std::max(0.0, hermitian_max_eig_2x2(b)));
    const DominantEig d = dominant_hermitian_eig(b);
    return std::sqrt(std::max(0.0, d.value));
}

} // namespace epsense
