#pragma once

#include <array>
#include <optional>
#include <string>

#include "moe/channels.hpp"

namespace moe {

enum class BoundKind { EPI, NewBound, GaussianConjecture };

std::string to_string(BoundKind kind);

/// A per-mode lower bound (or the conjectured minimum) on the output entropy
/// of channel^{(x)n} for inputs with entropy n * input_entropy_per_mode.
/// All entropies are in nats.
struct BoundValue {
    BoundKind kind = BoundKind::EPI;
    ChannelSpec channel;
    double input_entropy_per_mode = 0.0;
    int n = 1;
    std::optional<double> value_per_mode;
    bool in_domain = true;
};

/// Entropy power inequality bound.
BoundValue epi_bound(const ChannelSpec& channel, double s_per_mode, int n = 1);

/// The sharper bound for the attenuator (0 <= E <= eta/(1-eta)), the
/// amplifier (0 <= E <= 1/(kappa-1)) and the additive noise channel
/// (0 < E <= 1). Outside these ranges, and for the contravariant channel,
/// in_domain is false and no value is given. Throws DegenerateParameter for
/// eta in {0, 1} or kappa == 1.
BoundValue new_bound(const ChannelSpec& channel, double s_per_mode, int n = 1);

/// Output entropy of the thermal input with the same entropy.
BoundValue gaussian_conjecture_value(const ChannelSpec& channel, double s_per_mode, int n = 1);

/// Output entropy per mode of channel(omega_N).
double thermal_output_entropy(const ChannelSpec& channel, double mean_photons);

/// thermal_output_entropy(channel, g^{-1}(s)): a proven bound when the
/// channel is entanglement breaking.
double thermal_formula(const ChannelSpec& channel, double s_per_mode);

/// EPI, New and Gaussian values. Identity channels (eta = 1, kappa = 1
/// amplifier) give S for all three; the eta = 0 attenuator gives g(E).
std::array<BoundValue, 3> bound_set(const ChannelSpec& channel, double s_per_mode, int n = 1);

/// Largest applicable proven bound: EPI, New when in domain, and the thermal
/// formula when the channel is entanglement breaking. `kind` tells which
/// won (GaussianConjecture means the thermal formula).
BoundValue best_known_bound(const ChannelSpec& channel, double s_per_mode, int n = 1);

/// f_lambda(x) = g(lambda g^{-1}(x + g(lambda/(1-lambda))) + lambda) - g(lambda/(1-lambda)),
/// 0 < lambda < 1.
double f_lambda(double x, double lambda);

/// Inverse of f_lambda on [0, inf).
double f_lambda_inverse(double y, double lambda);

/// ln(lambda e^x + 1 - lambda), 0 <= lambda <= 1.
double epi_f_lambda(double x, double lambda);

/// Inverse of epi_f_lambda, 0 < lambda <= 1.
double epi_f_lambda_inverse(double y, double lambda);

}  // namespace moe
