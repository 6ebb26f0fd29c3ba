#include "moe/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace moe {

namespace {

void check_entropy(double s) {
    if (!std::isfinite(s) || s < 0.0) throw InvalidParameter("input entropy must be finite and >= 0");
}

// ln(a e^x + b e^y) for a, b >= 0 without overflow.
double log_combination(double a, double x, double b, double y) {
    if (a == 0.0) return std::log(b) + y;
    if (b == 0.0) return std::log(a) + x;
    const double m = std::max(x, y);
    return m + std::log(a * std::exp(x - m) + b * std::exp(y - m));
}

BoundValue make(BoundKind kind, const ChannelSpec& channel, double s, int n) {
    if (n < 1) throw InvalidParameter("mode count must be >= 1");
    channel.validate();
    check_entropy(s);
    BoundValue v;
    v.kind = kind;
    v.channel = channel;
    v.input_entropy_per_mode = s;
    v.n = n;
    return v;
}

// g(scale * g^{-1}(s + shift) + scale) - shift.
double shifted_composition(double s, double scale, double shift) {
    return g(scale * g_inverse(s + shift) + scale) - shift;
}

}  // namespace

std::string to_string(BoundKind kind) {
    switch (kind) {
        case BoundKind::EPI: return "epi";
        case BoundKind::NewBound: return "new";
        case BoundKind::GaussianConjecture: return "gaussian";
    }
    return "unknown";
}

BoundValue epi_bound(const ChannelSpec& channel, double s, int n) {
    BoundValue v = make(BoundKind::EPI, channel, s, n);
    const double E = channel.env_photons;
    const double eta = channel.eta;
    const double k = channel.kappa;
    switch (channel.kind) {
        case ChannelKind::Attenuator: v.value_per_mode = log_combination(eta, s, 1.0 - eta, g(E)); break;
        case ChannelKind::Amplifier: v.value_per_mode = log_combination(k, s, k - 1.0, g(E)); break;
        case ChannelKind::Contravariant: v.value_per_mode = log_combination(k - 1.0, s, k, g(E)); break;
        case ChannelKind::AdditiveNoise: v.value_per_mode = log_combination(1.0, s, E, 1.0); break;
    }
    return v;
}

BoundValue new_bound(const ChannelSpec& channel, double s, int n) {
    BoundValue v = make(BoundKind::NewBound, channel, s, n);
    const double E = channel.env_photons;
    switch (channel.kind) {
        case ChannelKind::Attenuator: {
            const double eta = channel.eta;
            if (eta == 0.0 || eta == 1.0) throw DegenerateParameter("new bound needs 0 < eta < 1");
            const double edge = eta / (1.0 - eta);
            v.in_domain = E <= edge;
            if (v.in_domain) v.value_per_mode = shifted_composition(s, eta, g(edge) - g(E));
            break;
        }
        case ChannelKind::Amplifier: {
            const double k = channel.kappa;
            if (k == 1.0) throw DegenerateParameter("new bound needs kappa > 1");
            const double edge = 1.0 / (k - 1.0);
            v.in_domain = E <= edge;
            if (v.in_domain) v.value_per_mode = shifted_composition(s, k, g(edge) - g(E));
            break;
        }
        case ChannelKind::AdditiveNoise:
            v.in_domain = E <= 1.0;
            if (v.in_domain) {
                const double shift = -std::log(E);
                // At E = 1 the shift is zero and this is g(g^{-1}(s) + 1).
                v.value_per_mode = g(g_inverse(s + shift) + 1.0) - shift;
            }
            break;
        case ChannelKind::Contravariant: v.in_domain = false; break;
    }
    if (v.value_per_mode) v.value_per_mode = std::max(0.0, *v.value_per_mode);
    return v;
}

double thermal_output_entropy(const ChannelSpec& channel, double N) {
    channel.validate();
    if (!(N >= 0.0)) throw InvalidParameter("mean photon number must be >= 0");
    const double E = channel.env_photons;
    const double k = channel.kappa;
    switch (channel.kind) {
        case ChannelKind::Attenuator: return g(channel.eta * N + (1.0 - channel.eta) * E);
        case ChannelKind::Amplifier: return g(k * N + (k - 1.0) * (E + 1.0));
        case ChannelKind::Contravariant: return g((k - 1.0) * (N + 1.0) + k * E);
        case ChannelKind::AdditiveNoise: return g(N + E);
    }
    return 0.0;
}

double thermal_formula(const ChannelSpec& channel, double s) {
    check_entropy(s);
    return thermal_output_entropy(channel, g_inverse(s));
}

BoundValue gaussian_conjecture_value(const ChannelSpec& channel, double s, int n) {
    BoundValue v = make(BoundKind::GaussianConjecture, channel, s, n);
    v.value_per_mode = thermal_formula(channel, s);
    return v;
}

std::array<BoundValue, 3> bound_set(const ChannelSpec& channel, double s, int n) {
    std::array<BoundValue, 3> out{epi_bound(channel, s, n), BoundValue{}, gaussian_conjecture_value(channel, s, n)};
    const bool trivial = channel.kind == ChannelKind::Attenuator && channel.eta == 0.0;
    if (channel.is_identity() || trivial) {
        // Identity: the output is the input. eta = 0: the output is omega_E.
        const double value = trivial ? g(channel.env_photons) : s;
        out[1] = make(BoundKind::NewBound, channel, s, n);
        for (auto& b : out) b.value_per_mode = value;
    } else {
        out[1] = new_bound(channel, s, n);
    }
    return out;
}

BoundValue best_known_bound(const ChannelSpec& channel, double s, int n) {
    const auto set = bound_set(channel, s, n);
    BoundValue best = set[0];
    if (set[1].value_per_mode && *set[1].value_per_mode > *best.value_per_mode) best = set[1];
    if (is_entanglement_breaking(channel) && *set[2].value_per_mode > *best.value_per_mode) best = set[2];
    return best;
}

double f_lambda(double x, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw DegenerateParameter("f_lambda needs 0 < lambda < 1");
    check_entropy(x);
    return std::max(0.0, shifted_composition(x, lambda, g(lambda / (1.0 - lambda))));
}

double f_lambda_inverse(double y, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw DegenerateParameter("f_lambda needs 0 < lambda < 1");
    check_entropy(y);
    if (y == 0.0) return 0.0;
    // f_lambda(x) <= x, so the root is at or above y.
    double lo = y;
    double hi = 2.0 * y + 1.0;
    while (f_lambda(hi, lambda) < y) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f_lambda(mid, lambda) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double epi_f_lambda(double x, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidParameter("epi_f_lambda needs 0 <= lambda <= 1");
    check_entropy(x);
    return log_combination(lambda, x, 1.0 - lambda, 0.0);
}

double epi_f_lambda_inverse(double y, double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidParameter("inverse needs 0 < lambda <= 1");
    check_entropy(y);
    // x = ln((e^y - 1 + lambda) / lambda) = y + ln(1 - (1 - lambda) e^{-y}) - ln(lambda).
    return std::max(0.0, y + std::log1p(-(1.0 - lambda) * std::exp(-y)) - std::log(lambda));
}

}  // namespace moe
