#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "moe/errors.hpp"

namespace moe {

using Complex = std::complex<double>;

/// Density operator on a truncated n-mode Fock space.
///
/// Basis states are |k_0, ..., k_{n-1}> with 0 <= k_i < cutoff, flattened with
/// mode 0 as the most significant digit. `trace_deficit` is the probability
/// mass that fell outside the truncated space, so that
/// trace(matrix) + trace_deficit == 1 for a state built from a normalized one.
struct FockState {
    int modes = 1;
    int cutoff = 2;
    Eigen::MatrixXcd matrix;
    double trace_deficit = 0.0;

    Eigen::Index dimension() const { return matrix.rows(); }
    double trace() const { return matrix.trace().real(); }

    /// Validates shape and Hermiticity; does not check positivity.
    static FockState from_matrix(Eigen::MatrixXcd matrix, int modes, int cutoff,
                                 double trace_deficit = 0.0);
    static FockState from_pure(const Eigen::VectorXcd& psi, int modes, int cutoff);
    static FockState vacuum(int cutoff, int modes = 1);
    /// One-mode number state |k><k|.
    static FockState number(int k, int cutoff);
};

/// Mean photon number; `total` sums over modes.
struct PhotonCount {
    double total = 0.0;
    int modes = 1;
    double per_mode() const { return total / modes; }
};

/// D^n, throwing if it overflows an index.
Eigen::Index fock_dimension(int cutoff, int modes);

/// Truncated lowering operator: a|k> = sqrt(k)|k-1>.
Eigen::MatrixXd ladder_operator(int cutoff);

/// Number operator diag(0, 1, ..., D-1).
Eigen::VectorXd number_diagonal(int cutoff);

/// Thermal state with mean photon number E, normalized over the full
/// geometric series; the mass of levels >= cutoff goes to trace_deficit.
FockState thermal_state(double mean_photons, int cutoff);

/// Same state rescaled to unit trace, trace_deficit reset to zero.
FockState renormalize(const FockState& state);

/// Embeds a one- or multi-mode state into a larger per-mode cutoff.
FockState embed(const FockState& state, int new_cutoff);

/// -sum p ln p over a spectrum, with eigenvalues below 1e-14 dropped.
/// Rounding (an eigenvalue of 1 + 1e-16) is clamped to zero entropy.
template <typename Derived>
double spectrum_entropy(const Eigen::DenseBase<Derived>& eigenvalues) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        const double p = eigenvalues(i);
        if (p > 1e-14) s -= p * std::log(p);
    }
    return std::max(s, 0.0);
}

/// Eigenvalues of a Hermitian matrix (diagonal fast path included).
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m);

/// Von Neumann entropy in nats. Throws NotAState on eigenvalues below -1e-8.
double von_neumann_entropy(const FockState& state);

/// g(E) = (E+1) ln(E+1) - E ln E, the entropy of the thermal state with mean E.
template <std::floating_point Scalar>
Scalar g(Scalar E) {
    using std::log1p;
    if (E <= Scalar(0)) return Scalar(0);
    // Rearranged as ln(E+1) + E ln(1 + 1/E) to avoid cancellation at large E.
    return log1p(E) + E * log1p(Scalar(1) / E);
}

/// First derivative g'(E) = ln(1 + 1/E).
template <std::floating_point Scalar>
Scalar g_prime(Scalar E) {
    using std::log1p;
    return log1p(Scalar(1) / E);
}

/// Inverse of g on [0, inf), by bisection on [0, e^x].
double g_inverse(double x);

PhotonCount mean_photons(const FockState& state);

/// Kronecker product of two states (modes concatenated a then b).
FockState tensor(const FockState& a, const FockState& b);

/// Reduces onto the listed modes (kept in the order given).
FockState partial_trace(const FockState& joint, std::span<const int> keep);

/// Reorders the modes of a state: output mode i is input mode order[i].
FockState permute_modes(const FockState& state, std::span<const int> order);

/// (1/2) || a - b ||_1 on the matrices (deficits ignored).
double trace_distance(const FockState& a, const FockState& b);

/// Kronecker product of dense matrices.
template <typename A, typename B>
Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(
        a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace moe
