#pragma once

// Resolvent/Kato machinery: Green's functions, eigenvalue clustering into
// generalized eigenspaces with projectors and nilpotents, LDOS, spectral
// response strength, Petermann factors, and the QFI upper bounds.

#include "epsense/model.hpp"
#include "epsense/numerics.hpp"

#include <optional>
#include <vector>

namespace epsense {

// G(omega) = (omega I - H)^{-1}. Throws AtPole at a numerical singularity.
CMat greens_function(const CMat& h, double omega);

struct KatoCluster {
    cplx omega;     // cluster mean eigenvalue
    std::size_t order = 1; // algebraic multiplicity n_l
    CMat projector; // P_l
    CMat nilpotent; // N_l = (H - omega I) P_l
    bool is_ep = false; // true when ||N^{n-1}|| is above the defectiveness tolerance
};

struct KatoDecomposition {
    std::vector<KatoCluster> clusters;
};

constexpr double kDefaultClusterTol = 1e-8;

// Groups eigenvalues into clusters of pairwise distance <= tol * scale with
// scale = max(1, ||H||). Projectors come from the cluster-wise polynomial
// product, refined to idempotency by a short Newton-Schulz iteration; the
// cluster mean is recomputed as tr(H P)/n. Throws IllConditioned when the
// inter-cluster gap is below 10 * tol * scale.
KatoDecomposition kato_decompose(const CMat& h, double cluster_tol = kDefaultClusterTol);

// xi = ||N^{n-1}|| for n >= 2; for an isolated mode (n = 1) returns
// sqrt(K) = ||P||.
double spectral_response_strength(const KatoDecomposition& k, std::size_t cluster);

// K = 1/|<L|R>|^2 for a simple eigenvalue, cross-checked against ||P||^2.
// Throws NearDefective when |<L|R>| < 1e-8.
double petermann_factor(const CMat& h, std::size_t mode);

struct LdosSample {
    std::size_t site = 0;
    double omega = 0.0;
    double rho = 0.0; // -(1/pi) Im <j|G|j>
    // Resolvent summands <j|R_l><L_l|j> / <L_l|R_l> / (omega - omega_l);
    // rho = -(1/pi) Im of their sum. Only filled when requested and all
    // eigenvalues are simple.
    std::optional<std::vector<cplx>> modal_terms;
};

LdosSample ldos(const ScatteringModel& m, std::size_t site, double omega,
                bool with_modal_terms = false);

// Per-flux localized-source bound: 16 K / |omega - omega_l|^2 for n = 1
// (K from ||P||^2), 16 xi^2 / |omega - omega_l|^{2n} for n >= 2.
double qfi_bound_localized(const KatoDecomposition& k, std::size_t cluster, double omega);

// General bound 16 ||H1||^2 ||W||^4 K^2 / |omega-omega_l|^4 (n = 1) or
// 16 ||H1||^2 ||W||^4 xi^4 / |omega-omega_l|^{4n} (n >= 2).
double qfi_bound_general(const ScatteringModel& m, const Perturbation& pert,
                         const KatoDecomposition& k, std::size_t cluster, double omega);

// EF = xi^2 / decay^{2(n-1)}.
double enhancement_factor(double xi, double decay, std::size_t order);

struct PassiveXiBound {
    double xi_bound = 0.0;               // (sqrt(2n) decay)^{n-1}
    std::optional<double> xi_bound_tight; // 4 decay^2, n = 3 only
    double ef_cap = 0.0;                 // (2n)^{n-1}
};

PassiveXiBound passive_xi_bound(double decay, std::size_t order);

} // namespace epsense
