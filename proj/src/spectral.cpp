#include "epsense/spectral.hpp"
#include "epsense/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace epsense {

CMat greens_function(const CMat& h, double omega) {
    CMat a = cplx(-1.0, 0.0) * h;
    for (std::size_t i = 0; i < h.rows(); ++i) a(i, i) += omega;
    try {
        return inverse(a);
    } catch (const SingularMatrix&) {
        throw AtPole("greens_function: omega at a scattering pole");
    }
}

namespace {

cplx trace(const CMat& a) {
    cplx t = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
    return t;
}

// Newton-Schulz step toward idempotency; converges exactly (in finitely many
// steps up to rounding) because the iterate is a polynomial in H with
// eigenvalues 0 and 1.
void refine_projector(CMat& p) {
    const std::size_t n = p.rows();
    for (int it = 0; it < 12; ++it) {
        const CMat p2 = p * p;
        double err = 0.0;
        for (std::size_t i = 0; i < n * n; ++i)
            err = std::max(err, std::abs(p2.data()[i] - p.data()[i]));
        if (err <= 1e-14 * std::max(1.0, max_abs(p))) break;
        p = 3.0 * p2 - 2.0 * (p2 * p);
    }
}

} // namespace

KatoDecomposition kato_decompose(const CMat& h, double cluster_tol) {
    const std::size_t n = h.rows();
    const double hnorm = spectral_norm(h);
    const double scale = std::max(1.0, hnorm);
    const double tol = cluster_tol * scale;

    const Eigensystem es = eig(h);

    using Groups = std::vector<std::vector<std::size_t>>;

    auto group_by_parent = [&](const std::vector<std::size_t>& parent0) {
        std::vector<std::size_t> parent = parent0;
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        Groups groups;
        for (std::size_t i = 0; i < n; ++i) {
            if (find(i) != i) continue;
            std::vector<std::size_t> g;
            for (std::size_t j = 0; j < n; ++j)
                if (find(j) == find(i)) g.push_back(j);
            groups.push_back(std::move(g));
        }
        std::sort(groups.begin(), groups.end(),
                  [&](const auto& a, const auto& b) { return a.front() < b.front(); });
        return groups;
    };

    // Stage 1: union-find on pairwise eigenvalue distance <= tol.
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    {
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (std::abs(es.values[i] - es.values[j]) <= tol)
                    parent[find(i)] = find(j);
    }
    const Groups stage1 = group_by_parent(parent);

    auto group_gap = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
        double g = -1.0;
        for (auto i : a)
            for (auto j : b) {
                const double d = std::abs(es.values[i] - es.values[j]);
                if (g < 0.0 || d < g) g = d;
            }
        return g;
    };

    // Stage 2: a defective eigenvalue of order k computed in doubles splits by
    // roughly eps^(1/k) of the matrix scale, far beyond tol. Merge clusters
    // within that radius; a nilpotency certificate below rejects bad merges.
    constexpr double kEps = 2.220446049250313e-16;
    Groups groups = stage1;
    std::vector<Groups> pieces(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) pieces[i] = {groups[i]};
    // An order-m EP scatters its eigenvalues pairwise by ~eps^(1/m), so the
    // merge radius must assume the final multiplicity, not the running size.
    for (std::size_t m = 2; m <= n; ++m) {
        const double radius = 25.0 * std::pow(kEps, 1.0 / static_cast<double>(m)) * scale;
        for (bool merged = true; merged;) {
            merged = false;
            for (std::size_t a = 0; a < groups.size() && !merged; ++a)
                for (std::size_t b = a + 1; b < groups.size() && !merged; ++b) {
                    if (groups[a].size() + groups[b].size() > m) continue;
                    if (group_gap(groups[a], groups[b]) <= radius) {
                        groups[a].insert(groups[a].end(), groups[b].begin(), groups[b].end());
                        std::sort(groups[a].begin(), groups[a].end());
                        pieces[a].insert(pieces[a].end(), pieces[b].begin(), pieces[b].end());
                        groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(b));
                        pieces.erase(pieces.begin() + static_cast<std::ptrdiff_t>(b));
                        merged = true;
                    }
                }
        }
    }

    auto guard_gaps = [&](const Groups& gs) {
        for (std::size_t a = 0; a < gs.size(); ++a)
            for (std::size_t b = a + 1; b < gs.size(); ++b)
                if (group_gap(gs[a], gs[b]) < 10.0 * tol)
                    throw IllConditioned("kato_decompose: inter-cluster gap below 10x cluster tolerance");
    };

    auto build = [&](const Groups& gs) {
        KatoDecomposition kd;
        for (const auto& g : gs) {
            KatoCluster c;
            c.order = g.size();
            cplx mean = 0.0;
            for (auto i : g) mean += es.values[i];
            mean /= static_cast<double>(g.size());
            c.omega = mean;

            if (g.size() == n) {
                c.projector = CMat::identity(n);
                c.omega = trace(h) / static_cast<double>(n); // exact cluster mean
            } else {
                CMat p = CMat::identity(n);
                for (const auto& other : gs) {
                    if (&other == &g) continue;
                    for (auto k : other) {
                        CMat f = h;
                        for (std::size_t i = 0; i < n; ++i) f(i, i) -= es.values[k];
                        p = (cplx(1.0, 0.0) / (mean - es.values[k])) * (p * f);
                    }
                }
                refine_projector(p);
                c.projector = p;
                c.omega = trace(h * p) / static_cast<double>(g.size());
            }
            CMat shifted = h;
            for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= c.omega;
            c.nilpotent = shifted * c.projector;
            if (c.order >= 2) {
                CMat pw = c.nilpotent;
                for (std::size_t k = 2; k < c.order; ++k) pw = pw * c.nilpotent;
                const double thresh = 1e-8 * std::pow(scale, static_cast<double>(c.order - 1));
                c.is_ep = spectral_norm(pw) > thresh;
            }
            kd.clusters.push_back(std::move(c));
        }
        return kd;
    };

    guard_gaps(groups);
    KatoDecomposition kd = build(groups);

    // Certify stage-2 merges: N^order must vanish to rounding. If a merge fails,
    // fall back to its stage-1 pieces and rebuild.
    bool dirty = false;
    Groups reverted;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        bool ok = true;
        if (pieces[i].size() > 1) {
            const auto& c = kd.clusters[i];
            CMat pw = c.nilpotent;
            for (std::size_t k = 1; k < c.order; ++k) pw = pw * c.nilpotent;
            ok = spectral_norm(pw) <= 1e-8 * std::pow(hnorm, static_cast<double>(c.order));
        }
        if (ok) {
            reverted.push_back(groups[i]);
        } else {
            dirty = true;
            for (const auto& g : pieces[i]) reverted.push_back(g);
        }
    }
    if (dirty) {
        std::sort(reverted.begin(), reverted.end(),
                  [&](const auto& a, const auto& b) { return a.front() < b.front(); });
        guard_gaps(reverted);
        kd = build(reverted);
    }
    return kd;
}

double spectral_response_strength(const KatoDecomposition& k, std::size_t cluster) {
    const KatoCluster& c = k.clusters.at(cluster);
    if (c.order == 1) return spectral_norm(c.projector);
    CMat pw = c.nilpotent;
    for (std::size_t i = 2; i < c.order; ++i) pw = pw * c.nilpotent;
    return spectral_norm(pw);
}

double petermann_factor(const CMat& h, std::size_t mode) {
    const Eigensystem es = eig(h);
    const std::size_t n = h.rows();
    if (mode >= n) throw Error("petermann_factor: mode index out of range");

    CVec r(n), l(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = es.right(i, mode);
        l[i] = es.left(i, mode);
    }
    const double overlap = std::abs(dot(l, r));
    if (overlap < 1e-8)
        throw NearDefective("petermann_factor: |<L|R>| below 1e-8, use the spectral response strength");
    const double k_eig = 1.0 / (overlap * overlap);

    // Cross-check against ||P||^2 whenever the mode is comfortably simple.
    if (overlap > 1e-4) {
        double gap = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == mode) continue;
            const double d = std::abs(es.values[j] - es.values[mode]);
            if (gap < 0.0 || d < gap) gap = d;
        }
        const double scale = std::max(1.0, spectral_norm(h));
        if (gap > 1e-6 * scale) {
            const KatoDecomposition kd = kato_decompose(h);
            for (std::size_t ci = 0; ci < kd.clusters.size(); ++ci) {
                const auto& c = kd.clusters[ci];
                if (c.order != 1) continue;
                if (std::abs(c.omega - es.values[mode]) > 0.5 * gap) continue;
                const double pn = spectral_norm(c.projector);
                const double k_proj = pn * pn;
                if (std::abs(k_proj - k_eig) > 1e-6 * k_eig)
                    throw Error("petermann_factor: projector and eigenvector routes disagree");
                break;
            }
        }
    }
    return k_eig;
}

LdosSample ldos(const ScatteringModel& m, std::size_t site, double omega,
                bool with_modal_terms) {
    if (site >= m.n_modes) throw Error("ldos: site index out of range");
    const CMat h = effective_hamiltonian(m);
    const CMat g = greens_function(h, omega);

    LdosSample s;
    s.site = site;
    s.omega = omega;
    s.rho = -g(site, site).imag() / std::numbers::pi;

    if (with_modal_terms) {
        const Eigensystem es = eig(h);
        const std::size_t n = m.n_modes;
        std::vector<cplx> terms(n);
        for (std::size_t l = 0; l < n; ++l) {
            CVec r(n), lv(n);
            for (std::size_t i = 0; i < n; ++i) {
                r[i] = es.right(i, l);
                lv[i] = es.left(i, l);
            }
            const cplx lr = dot(lv, r);
            terms[l] = r[site] * std::conj(lv[site]) / lr / (omega - es.values[l]);
        }
        s.modal_terms = std::move(terms);
    }
    return s;
}

double qfi_bound_localized(const KatoDecomposition& k, std::size_t cluster, double omega) {
    const KatoCluster& c = k.clusters.at(cluster);
    const double dist = std::abs(cplx(omega, 0.0) - c.omega);
    if (c.order == 1) {
        const double pn = spectral_norm(c.projector);
        return 16.0 * pn * pn / (dist * dist);
    }
    const double xi = spectral_response_strength(k, cluster);
    return 16.0 * xi * xi / std::pow(dist, 2.0 * static_cast<double>(c.order));
}

double qfi_bound_general(const ScatteringModel& m, const Perturbation& pert,
                         const KatoDecomposition& k, std::size_t cluster, double omega) {
    const KatoCluster& c = k.clusters.at(cluster);
    const double dist = std::abs(cplx(omega, 0.0) - c.omega);
    const double h1n = spectral_norm(pert.h1);
    const double wn = spectral_norm(m.w);
    if (c.order == 1) {
        const double pn = spectral_norm(c.projector);
        const double kpf = pn * pn;
        return 16.0 * h1n * h1n * std::pow(wn, 4.0) * kpf * kpf / std::pow(dist, 4.0);
    }
    const double xi = spectral_response_strength(k, cluster);
    return 16.0 * h1n * h1n * std::pow(wn, 4.0) * std::pow(xi, 4.0) /
           std::pow(dist, 4.0 * static_cast<double>(c.order));
}

double enhancement_factor(double xi, double decay, std::size_t order) {
    if (decay <= 0.0 || order < 2)
        throw Error("enhancement_factor: need decay > 0 and order >= 2");
    return xi * xi / std::pow(decay, 2.0 * static_cast<double>(order - 1));
}

PassiveXiBound passive_xi_bound(double decay, std::size_t order) {
    if (decay < 0.0 || order < 2)
        throw Error("passive_xi_bound: need decay >= 0 and order >= 2");
    PassiveXiBound b;
    const double n = static_cast<double>(order);
    b.xi_bound = std::pow(std::sqrt(2.0 * n) * decay, n - 1.0);
    if (order == 3) b.xi_bound_tight = 4.0 * decay * decay;
    b.ef_cap = std::pow(2.0 * n, n - 1.0);
    return b;
}

} // namespace epsense
