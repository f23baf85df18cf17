#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epsense/errors.hpp"
#include "epsense/model.hpp"
#include "epsense/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace epsense;

namespace {

std::vector<cplx> sorted_values(const CMat& h) {
    auto v = eig(h).values;
    std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return v;
}

} // namespace

TEST_CASE("effective_hamiltonian: decoupled limit returns h_sys exactly") {
    ScatteringModel m;
    m.n_modes = 2;
    m.h_sys = CMat(2, 2);
    m.h_sys(0, 0) = 0.7;
    m.h_sys(1, 1) = 0.7;
    m.w = CMat::zero(2, 1);
    m.observed_channels = {0};
    const CMat h = effective_hamiltonian(m);
    for (std::size_t i = 0; i < 4; ++i) CHECK(h.data()[i] == m.h_sys.data()[i]);
}

TEST_CASE("effective_hamiltonian: two-ring structure with and without loss") {
    const double g = 1.0, v = 0.3;
    auto [m, pert] = build_two_ring({g, v, 0.0});
    const CMat h = effective_hamiltonian(m);
    CHECK(std::abs(h(0, 0) - cplx(0.0, -g / 2.0)) < 1e-15);
    CHECK(std::abs(h(0, 1) - cplx(v)) < 1e-15);
    CHECK(std::abs(h(1, 0) - cplx(v)) < 1e-15);
    CHECK(std::abs(h(1, 1)) < 1e-15);

    const double kappa = 0.2;
    auto [ml, pl] = build_two_ring({g, v, kappa});
    const CMat hl = effective_hamiltonian(ml);
    // Uniform-loss equivalence: lossless matrix minus i(kappa/2) I
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const cplx want = h(i, j) - (i == j ? cplx(0.0, kappa / 2.0) : cplx(0.0));
            CHECK(std::abs(hl(i, j) - want) < 1e-14);
        }
}

TEST_CASE("build_two_ring: EP, decoupled, and lossy spectra") {
    auto [m_ep, p1] = build_two_ring({1.0, two_ring_ep_coupling(1.0), 0.0});
    const auto v_ep = sorted_values(effective_hamiltonian(m_ep));
    CHECK(std::abs(v_ep[0] - cplx(0.0, -0.25)) < 1e-7);
    CHECK(std::abs(v_ep[1] - cplx(0.0, -0.25)) < 1e-7);

    auto [m0, p2] = build_two_ring({1.0, 0.0, 0.0});
    const auto v0 = sorted_values(effective_hamiltonian(m0));
    double d1 = 1e9, d2 = 1e9;
    for (const auto& v : v0) {
        d1 = std::min(d1, std::abs(v - cplx(0.0, -0.5)));
        d2 = std::min(d2, std::abs(v));
    }
    CHECK(d1 < 1e-12);
    CHECK(d2 < 1e-12);

    auto [mk, p3] = build_two_ring({1.0, 0.3, 0.4});
    for (const auto& v : eig(effective_hamiltonian(mk)).values)
        CHECK(v.imag() <= -0.2 + 1e-12);
    CHECK(mk.n_channels() == 3);
    CHECK(mk.observed_channels == std::vector<std::size_t>{0});
}

TEST_CASE("build_two_ring: perturbation is localized at the lower ring") {
    auto [m, pert] = build_two_ring({1.0, 0.25, 0.0});
    REQUIRE(pert.localized_site.has_value());
    CHECK(*pert.localized_site == 1);
    CHECK(std::abs(pert.h1(1, 1) - cplx(1.0)) < 1e-15);
    CHECK(std::abs(pert.h1(0, 0)) + std::abs(pert.h1(0, 1)) + std::abs(pert.h1(1, 0)) < 1e-15);
}

TEST_CASE("build_three_ring: EP3 spectrum and nilpotent strength") {
    auto [m, pert] = build_three_ring(three_ring_ep(1.0));
    const auto vals = eig(effective_hamiltonian(m)).values;
    for (const auto& v : vals) CHECK(std::abs(v - cplx(0.0, -1.0 / 6.0)) < 1e-5);
    CHECK(*pert.localized_site == 2);

    auto [m0, p0] = build_three_ring({1.0, 0.0, 0.0, 0.0});
    const auto v0 = sorted_values(effective_hamiltonian(m0));
    double dwg = 1e9;
    int zeros = 0;
    for (const auto& v : v0) {
        dwg = std::min(dwg, std::abs(v - cplx(0.0, -0.5)));
        if (std::abs(v) < 1e-12) ++zeros;
    }
    CHECK(dwg < 1e-12);
    CHECK(zeros == 2);

    // gamma = 2: ||N^2|| = gamma^2/9 = 4/9
    auto [m2, p2] = build_three_ring(three_ring_ep(2.0));
    const KatoDecomposition kd = kato_decompose(effective_hamiltonian(m2));
    REQUIRE(kd.clusters.size() == 1);
    CHECK(kd.clusters[0].order == 3);
    CHECK(spectral_response_strength(kd, 0) == doctest::Approx(4.0 / 9.0).epsilon(1e-9));
}

TEST_CASE("build_single_ring: eigenvalue -i(gamma_wg + kappa)/2") {
    auto [m, p] = build_single_ring({0.5, 0.0});
    CHECK(std::abs(effective_hamiltonian(m)(0, 0) - cplx(0.0, -0.25)) < 1e-15);
    auto [m6, p6] = build_single_ring({1.0 / 6.0, 0.0});
    CHECK(std::abs(effective_hamiltonian(m6)(0, 0) - cplx(0.0, -1.0 / 12.0)) < 1e-15);
    auto [mk, pk] = build_single_ring({0.5, 0.3});
    CHECK(std::abs(effective_hamiltonian(mk)(0, 0) - cplx(0.0, -0.4)) < 1e-14);
}

TEST_CASE("build_mirror_ring: DP at rho=0, EP for rho>0") {
    auto [m0, p0] = build_mirror_ring({1.0, 0.0, 0.0});
    const CMat h0 = effective_hamiltonian(m0);
    CHECK(std::abs(h0(0, 1)) < 1e-15);
    CHECK(std::abs(h0(1, 0)) < 1e-15);
    CHECK(std::abs(h0(0, 0) - cplx(0.0, -0.5)) < 1e-15);
    CHECK(std::abs(h0(1, 1) - cplx(0.0, -0.5)) < 1e-15);
    CHECK_FALSE(p0.localized_site.has_value());

    auto [m1, p1] = build_mirror_ring({1.0, 1.0, 0.0});
    const CMat h1 = effective_hamiltonian(m1);
    CHECK(std::abs(h1(1, 0) - cplx(0.0, -1.0)) < 1e-14);
    const KatoDecomposition kd1 = kato_decompose(h1);
    REQUIRE(kd1.clusters.size() == 1);
    CHECK(kd1.clusters[0].is_ep);
    CHECK(spectral_response_strength(kd1, 0) == doctest::Approx(1.0).epsilon(1e-10));

    for (double rho : {0.25, 0.6, 0.9}) {
        auto [m, p] = build_mirror_ring({1.0, rho, 0.7});
        for (const auto& v : eig(effective_hamiltonian(m)).values)
            CHECK(std::abs(v - cplx(0.0, -0.5)) < 1e-7);
    }
}

TEST_CASE("zoo invariants: Hermitian split, passivity, rank-1 decay") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.05, 1.5);
    for (int t = 0; t < 40; ++t) {
        std::vector<std::pair<ScatteringModel, Perturbation>> zoo;
        zoo.push_back(build_two_ring({u(rng), u(rng), 0.0}));
        zoo.push_back(build_three_ring({u(rng), u(rng), u(rng), 0.0}));
        zoo.push_back(build_single_ring({u(rng), 0.0}));
        zoo.push_back(build_mirror_ring({u(rng), std::min(1.0, u(rng)), u(rng)}));
        for (auto& [m, pert] : zoo) {
            validate(m);
            const CMat h = effective_hamiltonian(m);
            // h_sys reconstructs as the Hermitian part of H
            for (std::size_t i = 0; i < m.n_modes; ++i)
                for (std::size_t j = 0; j < m.n_modes; ++j) {
                    const cplx herm = 0.5 * (h(i, j) + std::conj(h(j, i)));
                    CHECK(std::abs(herm - m.h_sys(i, j)) < 1e-13);
                }
            for (const auto& v : eig(h).values) CHECK(v.imag() <= 1e-12);
            // decay operator PSD
            const CMat gam = decay_operator(m);
            for (const auto& v : eig(gam).values) CHECK(v.real() >= -1e-12);
        }
        // rank-1 decay for the lossless two- and three-ring models
        const CMat g2 = decay_operator(zoo[0].first);
        const auto ev2 = eig(g2).values;
        int nz = 0;
        for (const auto& v : ev2)
            if (std::abs(v) > 1e-10 * max_abs(g2)) ++nz;
        CHECK(nz == 1);
    }
}

TEST_CASE("validate: rejects broken models") {
    ScatteringModel m;
    m.n_modes = 2;
    m.h_sys = CMat(2, 2);
    m.h_sys(0, 1) = cplx(0.0, 1.0); // not Hermitian (should be -i on the other side)
    m.h_sys(1, 0) = cplx(0.0, 1.0);
    m.w = CMat(2, 1);
    m.w(0, 0) = 1.0;
    m.observed_channels = {0};
    CHECK_THROWS_AS(validate(m), InvalidModel);

    CHECK_THROWS_AS((void)build_two_ring({-1.0, 0.25, 0.0}), InvalidModel);
    CHECK_THROWS_AS((void)build_mirror_ring({1.0, 1.5, 0.0}), InvalidModel);
}
