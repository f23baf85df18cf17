#pragma once

// Dense complex linear algebra kernel for small matrices (N <= 16):
// products, adjoints, inverses, eigendecompositions, spectral norms.
// Everything here is a pure function of its inputs.

#include <complex>
#include <cstddef>
#include <vector>

namespace epsense {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

class CMat {
public:
    CMat() = default;
    CMat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    static CMat identity(std::size_t n);
    static CMat zero(std::size_t rows, std::size_t cols) { return CMat(rows, cols); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<cplx>& data() const { return data_; }
    std::vector<cplx>& data() { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

CMat operator*(const CMat& a, const CMat& b);
CMat operator+(const CMat& a, const CMat& b);
CMat operator-(const CMat& a, const CMat& b);
CMat operator*(cplx s, const CMat& a);
CVec operator*(const CMat& a, const CVec& v);

CMat adjoint(const CMat& a);

double max_abs(const CMat& a);
double frobenius_norm(const CMat& a);
bool is_hermitian(const CMat& a, double tol);

double two_norm(const CVec& v);
// conjugate-linear in the first argument
cplx dot(const CVec& a, const CVec& b);
void normalize(CVec& v);

// Gauss-Jordan with partial pivoting. Throws SingularMatrix when a pivot
// falls below 1e-14 * max|entry|, which at a real frequency signals a pole.
CMat inverse(const CMat& a);

struct Eigensystem {
    std::vector<cplx> values;
    CMat right; // columns are unit-norm right eigenvectors
    CMat left;  // columns are unit-norm left eigenvectors, paired with values
};

// Hessenberg reduction + shifted QR, closed form for N <= 2. Left
// eigenvectors come from the adjoint and are paired with the right ones by
// eigenvalue proximity. For defective input the vectors degrade gracefully;
// use the Kato decomposition instead.
Eigensystem eig(const CMat& a);

// Max singular value via the dominant eigenvalue of A^dag A: closed form up
// to 2x2, otherwise power iteration with a deterministic all-ones start and
// one seeded random restart.
double spectral_norm(const CMat& a);

// Dominant eigenpair of a Hermitian positive semidefinite matrix, same
// iteration as spectral_norm. Used for optimal-input extraction.
struct DominantEig {
    double value = 0.0;
    CVec vector;
};
DominantEig dominant_hermitian_eig(const CMat& b);

// Seed for the power-iteration random restart (EPSENSE_SEED in the CLI).
void set_power_iteration_seed(unsigned long long seed);
unsigned long long power_iteration_seed();

} // namespace epsense
