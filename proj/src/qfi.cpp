#include "epsense/qfi.hpp"
#include "epsense/errors.hpp"
#include "epsense/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace epsense {

namespace {
const cplx kI(0.0, 1.0);

CMat resolvent(const ScatteringModel& m, double omega) {
    return greens_function(effective_hamiltonian(m), omega);
}
} // namespace

CMat scattering_matrix(const ScatteringModel& m, double omega) {
    const CMat g = resolvent(m, omega);
    const std::size_t mm = m.n_channels();
    CMat s = cplx(-2.0, 0.0) * kI * (adjoint(m.w) * g * m.w);
    for (std::size_t i = 0; i < mm; ++i) s(i, i) += 1.0;
    return s;
}

CMat scattering_derivative(const ScatteringModel& m, const Perturbation& pert, double omega) {
    const CMat g = resolvent(m, omega);
    return cplx(-2.0, 0.0) * kI * (adjoint(m.w) * g * pert.h1 * g * m.w);
}

CMat wigner_smith(const ScatteringModel& m, const Perturbation& pert, double omega) {
    const CMat g = resolvent(m, omega);
    return cplx(-2.0, 0.0) * (adjoint(m.w) * adjoint(g) * pert.h1 * g * m.w);
}

double qfi_for_input(const ScatteringModel& m, const Perturbation& pert, double omega,
                     const CVec& u_in) {
    const double nin = two_norm(u_in);
    if (nin <= 0.0) throw Error("qfi_for_input: zero input state");
    const CVec out = scattering_derivative(m, pert, omega) * u_in;
    const double nout = two_norm(out);
    return 4.0 * nout * nout / (nin * nin);
}

QfiMax qfi_max(const ScatteringModel& m, const Perturbation& pert, double omega) {
    const CMat g = resolvent(m, omega);
    const CMat a = adjoint(m.w) * adjoint(g) * pert.h1 * g * m.w;
    QfiMax r;
    const double an = spectral_norm(a);
    r.value = 16.0 * an * an;

    const CMat ds = scattering_derivative(m, pert, omega);
    const DominantEig dom = dominant_hermitian_eig(adjoint(ds) * ds);
    r.optimal_input = dom.vector;
    return r;
}

double qfi_max_via_ldos(const ScatteringModel& m, const Perturbation& pert, double omega) {
    if (!pert.localized_site)
        throw NotLocalized("qfi_max_via_ldos: perturbation has no site tag");
    const LdosSample s = ldos(m, *pert.localized_site, omega);
    constexpr double pi = std::numbers::pi;
    return 16.0 * pi * pi * s.rho * s.rho;
}

double qfi_average(const ScatteringModel& m, const Perturbation& pert, double omega) {
    const CMat ds = scattering_derivative(m, pert, omega);
    // (1/M) sum_i 4 ||dS e_i||^2 = (4/M) ||dS||_F^2
    const double f = frobenius_norm(ds);
    return 4.0 * f * f / static_cast<double>(m.n_channels());
}

double reduced_qfi(const ScatteringModel& m, const Perturbation& pert, double omega,
                   std::size_t in_channel, std::size_t out_channel) {
    if (!pert.localized_site)
        throw NotLocalized("reduced_qfi: perturbation has no site tag");
    if (in_channel >= m.n_channels() || out_channel >= m.n_channels())
        throw Error("reduced_qfi: channel index out of range");
    const std::size_t j = *pert.localized_site;
    const CMat g = resolvent(m, omega);
    const CMat wg = adjoint(m.w) * g; // M x N
    const CMat gw = g * m.w;          // N x M
    const double a = std::abs(wg(out_channel, j));
    const double b = std::abs(gw(j, in_channel));
    const double value = 16.0 * a * a * b * b;

    // consistency with the S-matrix element route
    const CMat ds = scattering_derivative(m, pert, omega);
    const double via_s = 4.0 * std::norm(ds(out_channel, in_channel));
    if (std::abs(via_s - value) > 1e-10 * std::max(1.0, value))
        throw Error("reduced_qfi: factorized and S-matrix routes disagree");
    return value;
}

PhaseResponse phase_response(const ScatteringModel& m, const Perturbation& pert,
                             double omega, const std::vector<double>& epsilon_grid) {
    if (m.n_channels() != 1)
        throw MultiChannel("phase_response: single-channel models only");
    if (epsilon_grid.size() < 5)
        throw GridTooCoarse("phase_response: need at least 5 grid points");

    PhaseResponse r;
    r.epsilon_grid = epsilon_grid;
    r.phase.resize(epsilon_grid.size());

    double prev_arg = 0.0;
    double offset = 0.0;
    std::size_t zero_idx = epsilon_grid.size();
    for (std::size_t i = 0; i < epsilon_grid.size(); ++i) {
        const double eps = epsilon_grid[i];
        ScatteringModel pm = m;
        pm.h_sys = pm.h_sys + cplx(eps, 0.0) * pert.h1;
        const CMat s = scattering_matrix(pm, omega);
        if (std::abs(std::abs(s(0, 0)) - 1.0) > 1e-10)
            throw Error("phase_response: scattering amplitude not unimodular (lossy model?)");
        const double a = std::arg(s(0, 0));
        if (i > 0) {
            double step = a - prev_arg;
            while (step > std::numbers::pi) { step -= 2.0 * std::numbers::pi; offset -= 2.0 * std::numbers::pi; }
            while (step < -std::numbers::pi) { step += 2.0 * std::numbers::pi; offset += 2.0 * std::numbers::pi; }
            if (std::abs(step) > 3.0) // effectively a step of ~pi: unwrap ambiguous
                throw GridTooCoarse("phase_response: phase step exceeds pi, refine the grid");
        }
        prev_arg = a;
        r.phase[i] = a + offset;
        if (std::abs(eps) < 1e-12) zero_idx = i;
    }
    if (zero_idx == epsilon_grid.size())
        throw Error("phase_response: grid must contain eps = 0");

    const double gauge = r.phase[zero_idx];
    for (auto& p : r.phase) p -= gauge;

    // 5-point central difference at eps = 0 (uniform grid assumed there)
    if (zero_idx < 2 || zero_idx + 2 >= r.phase.size())
        throw GridTooCoarse("phase_response: eps = 0 needs two neighbors on each side");
    const double h = epsilon_grid[zero_idx + 1] - epsilon_grid[zero_idx];
    r.dphase_deps = (-r.phase[zero_idx + 2] + 8.0 * r.phase[zero_idx + 1] -
                     8.0 * r.phase[zero_idx - 1] + r.phase[zero_idx - 2]) /
                    (12.0 * h);
    return r;
}

double decay_modified_qfi(const ScatteringModel& m, const Perturbation& pert, double omega) {
    if (m.n_modes != 2 || m.n_channels() != 1)
        throw Error("decay_modified_qfi: lossless two-ring models only");
    // cluster means are far more accurate than raw eigenvalues near an EP
    const KatoDecomposition kd = kato_decompose(effective_hamiltonian(m));
    double dmin = std::abs(kd.clusters[0].omega.imag());
    for (const auto& c : kd.clusters) dmin = std::min(dmin, std::abs(c.omega.imag()));
    return qfi_max(m, pert, omega).value * 16.0 * dmin * dmin;
}

double cramer_rao(double delta_floor, std::size_t trials, double qfi) {
    if (qfi <= 0.0 || trials < 1)
        throw Error("cramer_rao: need qfi > 0 and trials >= 1");
    return std::max(delta_floor, 1.0 / std::sqrt(static_cast<double>(trials) * qfi));
}

QfiEvaluation evaluate(const ScatteringModel& m, const Perturbation& pert, double omega) {
    QfiEvaluation ev;
    ev.omega = omega;
    const QfiMax qm = qfi_max(m, pert, omega);
    ev.i_max = qm.value;
    ev.optimal_input = qm.optimal_input;
    ev.q_operator = wigner_smith(m, pert, omega);
    ev.i_avg = qfi_average(m, pert, omega);

    CVec e1(m.n_channels(), 0.0);
    e1[m.observed_channels.front()] = 1.0;
    ev.i_input = qfi_for_input(m, pert, omega, e1);

    if (pert.localized_site) {
        const std::size_t ch = m.observed_channels.front();
        ev.i_reduced = reduced_qfi(m, pert, omega, ch, ch);
    }

    const KatoDecomposition kd = kato_decompose(effective_hamiltonian(m));
    double best_loc = 0.0, best_gen = 0.0;
    for (std::size_t c = 0; c < kd.clusters.size(); ++c) {
        best_loc = std::max(best_loc, qfi_bound_localized(kd, c, omega));
        best_gen = std::max(best_gen, qfi_bound_general(m, pert, kd, c, omega));
    }
    ev.bounds.localized = best_loc;
    ev.bounds.general = best_gen;
    return ev;
}

} // namespace epsense
