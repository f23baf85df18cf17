#pragma once

// Scattering-model construction: the microring model zoo and arbitrary
// user-defined systems. Internal loss enters as auxiliary scattering
// channels (one per cavity), which keeps the full S-matrix unitary.

#include "epsense/numerics.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace epsense {

struct ScatteringModel {
    std::size_t n_modes = 0;        // N
    CMat h_sys;                     // N x N Hermitian internal Hamiltonian
    CMat w;                         // N x M channel coupling amplitudes
    std::vector<std::size_t> observed_channels; // subset of 0..M-1
    double omega_ref = 0.0;

    std::size_t n_channels() const { return w.cols(); }
};

// Hermitian generator of the sensed parameter. The perturbation strength is
// the estimand itself and is never stored; QFI is evaluated at strength 0.
struct Perturbation {
    CMat h1;
    std::optional<std::size_t> localized_site;
};

struct TwoRingParams {
    double gamma = 1.0;
    cplx v = 0.25;
    double kappa = 0.0;
};

struct ThreeRingParams {
    double gamma = 1.0;
    cplx v1 = 0.0;
    cplx v2 = 0.0;
    double kappa = 0.0;
};

struct SingleRingParams {
    double gamma_wg = 0.5;
    double kappa = 0.0;
};

struct MirrorRingParams {
    double gamma = 1.0;
    double rho = 0.0;  // mirror reflection coefficient, in [0, 1]
    double phi = 0.0;  // propagation phase ring -> mirror
};

// H = h_sys - i w w^dag; equals h_sys exactly when w = 0.
CMat effective_hamiltonian(const ScatteringModel& m);

// Decay operator i (H - H^dag) = 2 w w^dag.
CMat decay_operator(const ScatteringModel& m);

// Throws InvalidModel when an invariant is violated (h_sys not Hermitian,
// no channels, gain present).
void validate(const ScatteringModel& m);

std::pair<ScatteringModel, Perturbation> build_two_ring(const TwoRingParams& p);
std::pair<ScatteringModel, Perturbation> build_three_ring(const ThreeRingParams& p);
std::pair<ScatteringModel, Perturbation> build_single_ring(const SingleRingParams& p);
std::pair<ScatteringModel, Perturbation> build_mirror_ring(const MirrorRingParams& p);

// EP parameter points of the zoo.
inline double two_ring_ep_coupling(double gamma) { return gamma / 4.0; }
ThreeRingParams three_ring_ep(double gamma, double kappa = 0.0);

// Localized site-j frequency perturbation |j><j|.
Perturbation localized_perturbation(std::size_t n, std::size_t site);

} // namespace epsense
