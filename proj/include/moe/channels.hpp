#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "moe/fock.hpp"

namespace moe {

enum class ChannelKind { Attenuator, Amplifier, Contravariant, AdditiveNoise };

std::string to_string(ChannelKind kind);

/// One of the four phase-insensitive one-mode Gaussian channels.
///
/// `eta` is used by the attenuator, `kappa` by the amplifier and the
/// phase-contravariant channel, `env_photons` by all of them (thermal
/// environment mean photon number, or the noise variance of the additive
/// noise channel).
struct ChannelSpec {
    ChannelKind kind = ChannelKind::Attenuator;
    double eta = 1.0;
    double kappa = 1.0;
    double env_photons = 0.0;

    static ChannelSpec attenuator(double eta, double env_photons = 0.0);
    static ChannelSpec amplifier(double kappa, double env_photons = 0.0);
    static ChannelSpec contravariant(double kappa, double env_photons = 0.0);
    static ChannelSpec additive_noise(double env_photons);

    /// Throws InvalidParameter when the parameters are outside the family.
    void validate() const;
    /// eta == 1 attenuator or kappa == 1 amplifier.
    bool is_identity() const;
    std::string describe() const;
};

/// Cutoffs used to realise a channel through its dilation.
struct DilationPlan {
    int system_cutoff = 40;
    int env_cutoff = 2;
    int output_cutoff = 40;
    int radial_nodes = 24;
    int angular_nodes = 32;
    /// Leakage (added trace deficit) above this raises TruncationError.
    double max_deficit = 1e-6;
    std::size_t memory_budget_bytes = std::size_t{1} << 31;

    void validate() const;
};

/// Smallest D >= 2 with (E/(E+1))^D < 1e-10.
int environment_cutoff(double env_photons);

DilationPlan default_plan(const ChannelSpec& spec, int system_cutoff);

/// exp(t K) for the real antisymmetric tridiagonal K with K(k+1,k) = c_k,
/// K(k,k+1) = -c_k, through the eigendecomposition of the Hermitian iK.
/// Only the first `columns` columns are returned.
Eigen::MatrixXd expm_tridiagonal_generator(const Eigen::VectorXd& c, double t, Eigen::Index columns);

/// exp(theta (a^dag b - b^dag a)), theta = arccos sqrt(eta), on the D^2
/// two-mode space. The truncated generator is used, so the result is exactly
/// unitary and agrees with the physical beam splitter on every photon-number
/// sector with fewer than D photons.
Eigen::MatrixXcd beam_splitter_unitary(double eta, int cutoff);

/// exp(r (a^dag b^dag - a b)), r = arccosh sqrt(kappa), restricted to D^2.
/// Matrix elements are computed on padded sectors, so the restriction is
/// accurate but not exactly unitary; see unitarity_defect.
Eigen::MatrixXcd two_mode_squeezer(double kappa, int cutoff);

/// exp(alpha a^dag - conj(alpha) a) restricted to D levels, computed on a
/// padded space of `padded_cutoff` levels (defaults to D + 40).
Eigen::MatrixXcd displacement_operator(Complex alpha, int cutoff, int padded_cutoff = 0);

/// max |U^dag U - I| entry.
double unitarity_defect(const Eigen::MatrixXcd& u);

/// Gauss-Laguerre nodes and weights for the weight e^{-u} on [0, inf).
void gauss_laguerre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Linear map of a one-mode channel on operators, as a sparse transfer
/// matrix from vec(rho) (column-major, input_dim^2) to vec(Phi(rho))
/// (output_dim^2). Built once from the dilation and shared read-only.
class ChannelMap {
public:
    ChannelMap(int input_dim, int output_dim, Eigen::SparseMatrix<Complex> transfer);

    int input_dim() const { return input_dim_; }
    int output_dim() const { return output_dim_; }
    const Eigen::SparseMatrix<Complex>& transfer() const { return transfer_; }

    /// Image of a one-mode operator.
    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;

    /// Applies the map to mode `mode` of an operator on a space with
    /// per-mode dimensions `dims`; dims[mode] is updated to output_dim().
    Eigen::MatrixXcd apply_to_mode(const Eigen::MatrixXcd& op, std::vector<int>& dims, int mode) const;

    /// Output populations for a diagonal input on `modes` modes with the
    /// map applied to every mode; `p` has input_dim()^modes entries.
    Eigen::VectorXcd apply_to_populations(const Eigen::VectorXd& p, int modes) const;

private:
    int input_dim_;
    int output_dim_;
    Eigen::SparseMatrix<Complex> transfer_;
};

/// Builds (or fetches from a process-wide immutable memo) the map of `spec`.
std::shared_ptr<const ChannelMap> channel_map(const ChannelSpec& spec, const DilationPlan& plan);

/// One-mode channel output. Throws InvalidParameter for multi-mode input and
/// TruncationError when the added deficit exceeds plan.max_deficit.
FockState apply_channel(const ChannelSpec& spec, const FockState& state, const DilationPlan& plan);
FockState apply_channel(const ChannelSpec& spec, const FockState& state);

/// Phi^{(x)n} applied modewise to an n-mode state.
FockState apply_tensor_power(const ChannelSpec& spec, const FockState& state, int n,
                             const DilationPlan& plan);

/// Entanglement-breaking thresholds of the four families.
bool is_entanglement_breaking(const ChannelSpec& spec);

/// Quantum-limited attenuator eta = 1/(E+1) followed by the quantum-limited
/// amplifier kappa = E+1. Reproduces the additive noise channel; kept as an
/// independent check of its quadrature.
FockState additive_noise_via_composition(double env_photons, const FockState& state,
                                         const DilationPlan& plan);

}  // namespace moe
