#include "epsense/model.hpp"
#include "epsense/errors.hpp"

#include <cmath>

namespace epsense {

CMat effective_hamiltonian(const ScatteringModel& m) {
    if (max_abs(m.w) == 0.0) return m.h_sys;
    return m.h_sys - (cplx(0.0, 1.0) * (m.w * adjoint(m.w)));
}

CMat decay_operator(const ScatteringModel& m) {
    return 2.0 * (m.w * adjoint(m.w));
}

void validate(const ScatteringModel& m) {
    if (m.n_modes == 0 || m.h_sys.rows() != m.n_modes || m.h_sys.cols() != m.n_modes)
        throw InvalidModel("model: h_sys must be N x N with N >= 1");
    if (m.w.rows() != m.n_modes || m.w.cols() == 0)
        throw InvalidModel("model: coupling matrix must be N x M with M >= 1");
    if (m.observed_channels.empty())
        throw InvalidModel("model: observed channel set is empty");
    for (auto c : m.observed_channels)
        if (c >= m.w.cols()) throw InvalidModel("model: observed channel out of range");
    const double hscale = std::max(max_abs(m.h_sys), 1.0);
    if (!is_hermitian(m.h_sys, 1e-12 * hscale))
        throw InvalidModel("model: h_sys is not Hermitian");
    const Eigensystem es = eig(effective_hamiltonian(m));
    for (const auto& lam : es.values)
        if (lam.imag() > 1e-12 * hscale)
            throw InvalidModel("model: gain detected (eigenvalue in upper half plane)");
}

Perturbation localized_perturbation(std::size_t n, std::size_t site) {
    Perturbation p;
    p.h1 = CMat(n, n);
    p.h1(site, site) = 1.0;
    p.localized_site = site;
    return p;
}

namespace {

// Append one auxiliary loss channel of rate kappa per cavity.
void append_loss_channels(CMat& w, double kappa) {
    if (kappa <= 0.0) return;
    const std::size_t n = w.rows();
    const std::size_t m0 = w.cols();
    CMat wk(n, m0 + n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m0; ++j) wk(i, j) = w(i, j);
    for (std::size_t i = 0; i < n; ++i) wk(i, m0 + i) = std::sqrt(kappa / 2.0);
    w = wk;
}

} // namespace

std::pair<ScatteringModel, Perturbation> build_two_ring(const TwoRingParams& p) {
    if (p.gamma <= 0.0 || p.kappa < 0.0)
        throw InvalidModel("two-ring: need gamma > 0 and kappa >= 0");
    ScatteringModel m;
    m.n_modes = 2;
    m.h_sys = CMat(2, 2);
    m.h_sys(0, 1) = std::conj(p.v);
    m.h_sys(1, 0) = p.v;
    m.w = CMat(2, 1);
    m.w(0, 0) = std::sqrt(p.gamma / 2.0);
    append_loss_channels(m.w, p.kappa);
    m.observed_channels = {0};
    return {m, localized_perturbation(2, 1)};
}

std::pair<ScatteringModel, Perturbation> build_three_ring(const ThreeRingParams& p) {
    if (p.gamma <= 0.0 || p.kappa < 0.0)
        throw InvalidModel("three-ring: need gamma > 0 and kappa >= 0");
    ScatteringModel m;
    m.n_modes = 3;
    m.h_sys = CMat(3, 3);
    m.h_sys(0, 1) = std::conj(p.v1);
    m.h_sys(1, 0) = p.v1;
    m.h_sys(1, 2) = std::conj(p.v2);
    m.h_sys(2, 1) = p.v2;
    m.w = CMat(3, 1);
    m.w(0, 0) = std::sqrt(p.gamma / 2.0);
    append_loss_channels(m.w, p.kappa);
    m.observed_channels = {0};
    return {m, localized_perturbation(3, 2)};
}

ThreeRingParams three_ring_ep(double gamma, double kappa) {
    ThreeRingParams p;
    p.gamma = gamma;
    p.v1 = std::sqrt(2.0) * gamma / (3.0 * std::sqrt(3.0));
    p.v2 = gamma / (6.0 * std::sqrt(3.0));
    p.kappa = kappa;
    return p;
}

std::pair<ScatteringModel, Perturbation> build_single_ring(const SingleRingParams& p) {
    if (p.gamma_wg <= 0.0 || p.kappa < 0.0)
        throw InvalidModel("single-ring: need gamma_wg > 0 and kappa >= 0");
    ScatteringModel m;
    m.n_modes = 1;
    m.h_sys = CMat(1, 1);
    m.w = CMat(1, 1);
    m.w(0, 0) = std::sqrt(p.gamma_wg / 2.0);
    append_loss_channels(m.w, p.kappa);
    m.observed_channels = {0};
    return {m, localized_perturbation(1, 0)};
}

std::pair<ScatteringModel, Perturbation> build_mirror_ring(const MirrorRingParams& p) {
    if (p.gamma <= 0.0 || p.rho < 0.0 || p.rho > 1.0)
        throw InvalidModel("mirror-ring: need gamma > 0 and rho in [0, 1]");
    const double tau = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));
    const cplx e1 = std::polar(1.0, p.phi);
    const cplx e2 = std::polar(1.0, 2.0 * p.phi);
    ScatteringModel m;
    m.n_modes = 2;
    // Mirror-mediated CW/CCW coupling; chosen so that H = h_sys - i w w^dag
    // has no CW -> CCW backscattering.
    m.h_sys = CMat(2, 2);
    m.h_sys(0, 1) = cplx(0.0, 0.5 * p.gamma * p.rho) * std::conj(e2);
    m.h_sys(1, 0) = cplx(0.0, -0.5 * p.gamma * p.rho) * e2;
    m.w = CMat(2, 2);
    m.w(0, 0) = std::sqrt(p.gamma / 2.0);
    m.w(1, 0) = std::sqrt(p.gamma / 2.0) * p.rho * e2;
    m.w(1, 1) = std::sqrt(p.gamma / 2.0) * tau * e1;
    m.observed_channels = {0, 1};
    Perturbation pert;
    pert.h1 = CMat(2, 2);
    pert.h1(0, 1) = 1.0;
    pert.h1(1, 0) = 1.0;
    return {m, pert};
}

} // namespace epsense
