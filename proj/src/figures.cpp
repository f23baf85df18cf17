#include "epsense/figures.hpp"
#include "epsense/errors.hpp"
#include "epsense/qfi.hpp"
#include "epsense/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace epsense {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = std::numbers::pi;

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i)
        xs[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return xs;
}

void stamp(SweepResult& r, const std::string& id) {
    r.metadata.emplace_back("artifact", "epsense 1.0");
    r.metadata.emplace_back("figure", id);
    r.metadata.emplace_back("units", "omega_0 = 0, per-unit-photon-flux QFI, gamma = 1");
    r.metadata.emplace_back("seed", std::to_string(power_iteration_seed()));
}

// Long-lived-mode summand of the LDOS at omega = 0: the modal term of the
// eigenvalue with the smallest |Im|. Returns {i_long, petermann_bound};
// NaN near a defective point where the mode pair is not separable.
std::pair<double, double> long_mode_contribution(const ScatteringModel& m, std::size_t site) {
    const CMat h = effective_hamiltonian(m);
    const Eigensystem es = eig(h);
    const std::size_t n = h.rows();
    std::size_t lm = 0;
    for (std::size_t l = 1; l < n; ++l)
        if (std::abs(es.values[l].imag()) < std::abs(es.values[lm].imag())) lm = l;

    CVec r(n), l(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = es.right(i, lm);
        l[i] = es.left(i, lm);
    }
    const cplx lr = dot(l, r);
    if (std::abs(lr) < 1e-6) return {kNaN, kNaN};

    const cplx term = r[site] * std::conj(l[site]) / lr / (cplx(0.0, 0.0) - es.values[lm]);
    const double rho_long = -term.imag() / kPi;
    const double i_long = 16.0 * kPi * kPi * rho_long * rho_long;

    const double k_pf = 1.0 / std::norm(lr);
    const double bound = 16.0 * k_pf / std::norm(es.values[lm]);
    return {i_long, bound};
}

double phase_slope(const ScatteringModel& m, const Perturbation& pert, double eps) {
    ScatteringModel pm = m;
    pm.h_sys = pm.h_sys + cplx(eps, 0.0) * pert.h1;
    const cplx s = scattering_matrix(pm, 0.0)(0, 0);
    const cplx ds = scattering_derivative(pm, pert, 0.0)(0, 0);
    return (std::conj(s) * ds).imag();
}

double reduced_at_resonance(const ScatteringModel& m, const Perturbation& pert) {
    return reduced_qfi(m, pert, 0.0, 0, 0);
}

SweepResult fig2() {
    SweepResult r;
    r.columns = {"v_over_gamma", "g2_i_max", "g2_i_long", "g2_bound_long", "g2_i_mod"};
    stamp(r, "fig2");
    for (double v : linspace(0.05, 0.6, 221)) {
        auto [m, pert] = build_two_ring({1.0, v, 0.0});
        const double imax = qfi_max(m, pert, 0.0).value;
        const auto [ilong, blong] = long_mode_contribution(m, 1);
        const double imod = decay_modified_qfi(m, pert, 0.0);
        r.rows.push_back({v, imax, ilong, blong, imod});
    }
    return r;
}

SweepResult fig3() {
    SweepResult r;
    r.columns = {"epsilon", "phi_ep", "phi_iso", "g2_qfi_ep", "g2_qfi_iso"};
    stamp(r, "fig3");
    auto [m_ep, p_ep] = build_two_ring({1.0, 0.25, 0.0});
    auto [m_iso, p_iso] = build_single_ring({0.5, 0.0});
    const std::vector<double> eps = linspace(-0.5, 0.5, 501);
    const PhaseResponse pr_ep = phase_response(m_ep, p_ep, 0.0, eps);
    const PhaseResponse pr_iso = phase_response(m_iso, p_iso, 0.0, eps);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double sl_ep = phase_slope(m_ep, p_ep, eps[i]);
        const double sl_iso = phase_slope(m_iso, p_iso, eps[i]);
        r.rows.push_back({eps[i], pr_ep.phase[i], pr_iso.phase[i],
                          4.0 * sl_ep * sl_ep, 4.0 * sl_iso * sl_iso});
    }
    return r;
}

std::array<double, 3> lossy_trio(double gamma, double kappa) {
    auto [m_ep, p_ep] = build_two_ring({gamma, gamma / 4.0, kappa});
    auto [m_iso, p_iso] = build_single_ring({gamma / 2.0, kappa});
    const double v_opt = std::sqrt((gamma + kappa) * kappa) / 2.0;
    auto [m_opt, p_opt] = build_two_ring({gamma, v_opt, kappa});
    return {reduced_at_resonance(m_ep, p_ep), reduced_at_resonance(m_iso, p_iso),
            reduced_at_resonance(m_opt, p_opt)};
}

SweepResult fig4a() {
    SweepResult r;
    r.columns = {"kappa_over_gamma", "g2_ired_ep", "g2_ired_iso", "g2_ired_opt"};
    stamp(r, "fig4a");
    for (double k : linspace(0.005, 1.0, 200)) {
        const auto t = lossy_trio(1.0, k);
        r.rows.push_back({k, t[0], t[1], t[2]});
    }
    return r;
}

SweepResult fig4b() {
    SweepResult r;
    r.columns = {"gamma_over_kappa", "k2_ired_ep", "k2_ired_iso", "k2_ired_opt"};
    stamp(r, "fig4b");
    // kappa = 1; the reduced QFI itself carries the kappa^2 scaling.
    for (double g : linspace(0.2, 12.0, 119)) {
        const auto t = lossy_trio(g, 1.0);
        r.rows.push_back({g, t[0], t[1], t[2]});
    }
    return r;
}

SweepResult fig5() {
    SweepResult r;
    r.columns = {"v_over_gamma", "g2_ired_kappa_low", "g2_ired_kappa_crit", "g2_ired_kappa_high"};
    stamp(r, "fig5");
    const double kc = (std::sqrt(2.0) - 1.0) / 2.0;
    const double kappas[3] = {0.05, kc, 0.5};
    for (double v : linspace(0.01, 0.6, 237)) {
        std::vector<double> row{v};
        for (double k : kappas) {
            auto [m, pert] = build_two_ring({1.0, v, k});
            row.push_back(reduced_at_resonance(m, pert));
        }
        r.rows.push_back(std::move(row));
    }
    return r;
}

SweepResult fig6() {
    SweepResult r;
    r.columns = {"kappa_over_gamma", "re_omega_1", "re_omega_2", "im_omega_1", "im_omega_2"};
    stamp(r, "fig6");
    for (double k : linspace(0.001, 0.5, 500)) {
        const double v_opt = std::sqrt((1.0 + k) * k) / 2.0;
        auto [m, pert] = build_two_ring({1.0, v_opt, k});
        (void)pert;
        Eigensystem es = eig(effective_hamiltonian(m));
        std::sort(es.values.begin(), es.values.end(), [](cplx a, cplx b) {
            if (a.imag() != b.imag()) return a.imag() < b.imag();
            return a.real() < b.real();
        });
        r.rows.push_back({k, es.values[0].real(), es.values[1].real(),
                          es.values[0].imag(), es.values[1].imag()});
    }
    return r;
}

} // namespace

std::vector<std::string> figure_ids() {
    return {"fig2", "fig3", "fig4a", "fig4b", "fig5", "fig6"};
}

SweepResult figure_data(const std::string& id) {
    if (id == "fig2") return fig2();
    if (id == "fig3") return fig3();
    if (id == "fig4a") return fig4a();
    if (id == "fig4b") return fig4b();
    if (id == "fig5") return fig5();
    if (id == "fig6") return fig6();
    throw Error("figure: unknown id '" + id + "'");
}

} // namespace epsense
