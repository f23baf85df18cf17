#pragma once

// Scattering matrix, its parameter derivative, the generalized Wigner-Smith
// operator, and the QFI figures of merit. All values are per unit incoming
// photon flux (hbar*omega = 1).

#include "epsense/model.hpp"
#include "epsense/numerics.hpp"

#include <optional>
#include <vector>

namespace epsense {

// S = I_M - 2i W^dag G(omega) W (Mahaux-Weidenmueller); unitary because all
// loss is represented as channels.
CMat scattering_matrix(const ScatteringModel& m, double omega);

// dS/deps = -2i W^dag G0 H1 G0 W.
CMat scattering_derivative(const ScatteringModel& m, const Perturbation& pert, double omega);

// Q = -2 W^dag G0^dag H1 G0 W; Hermitian, equals -i S^dag dS for unitary S.
CMat wigner_smith(const ScatteringModel& m, const Perturbation& pert, double omega);

// 4 ||dS u||^2 / ||u||^2.
double qfi_for_input(const ScatteringModel& m, const Perturbation& pert, double omega,
                     const CVec& u_in);

struct QfiMax {
    double value = 0.0;
    CVec optimal_input; // unit norm, largest-magnitude entry real positive
};

// 16 ||W^dag G0^dag H1 G0 W||^2 and the maximizing input (dominant
// eigenvector of (dS)^dag dS).
QfiMax qfi_max(const ScatteringModel& m, const Perturbation& pert, double omega);

// 16 pi^2 rho_j^2 for a localized perturbation. Throws NotLocalized.
double qfi_max_via_ldos(const ScatteringModel& m, const Perturbation& pert, double omega);

// Channel-averaged QFI (1/M) sum_i I(e_i).
double qfi_average(const ScatteringModel& m, const Perturbation& pert, double omega);

// QFI with one observed in/out channel pair: 4 |(dS)_{out,in}|^2. Localized
// perturbations only.
double reduced_qfi(const ScatteringModel& m, const Perturbation& pert, double omega,
                   std::size_t in_channel, std::size_t out_channel);

struct PhaseResponse {
    std::vector<double> epsilon_grid;
    std::vector<double> phase;  // radians, unwrapped, gauged to 0 at eps = 0
    double dphase_deps = 0.0;   // at eps = 0
};

// Single-channel lossless models only. Throws MultiChannel otherwise;
// GridTooCoarse if adjacent phase steps exceed pi.
PhaseResponse phase_response(const ScatteringModel& m, const Perturbation& pert,
                             double omega, const std::vector<double>& epsilon_grid);

// I_mod = I_max * 16 * (smallest decay rate)^2 for the lossless two-ring.
double decay_modified_qfi(const ScatteringModel& m, const Perturbation& pert, double omega);

// Cramer-Rao standard-deviation floor 1/sqrt(m * qfi).
double cramer_rao(double delta_floor, std::size_t trials, double qfi);

struct QfiBounds {
    double localized = 0.0;
    double general = 0.0;
};

struct QfiEvaluation {
    double omega = 0.0;
    double i_input = 0.0;  // for the channel-1 basis input
    double i_max = 0.0;
    double i_avg = 0.0;
    std::optional<double> i_reduced;
    CVec optimal_input;
    CMat q_operator;
    QfiBounds bounds;
};

// Aggregate evaluation at one frequency. The reduced QFI is filled for
// localized perturbations using the first observed channel in and out.
QfiEvaluation evaluate(const ScatteringModel& m, const Perturbation& pert, double omega);

} // namespace epsense
