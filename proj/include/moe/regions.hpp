#pragma once

#include <limits>
#include <string>
#include <vector>

namespace moe {

/// Rates of the two receivers of the degraded broadcast channel, nats/use.
struct RatePair {
    double r_a = 0.0;
    double r_b = 0.0;
};

/// (C, Q, G) or (C, P, K). The last rate may be negative (consumed).
struct RateTriple {
    double c = 0.0;
    double q_or_p = 0.0;
    double g_or_k = 0.0;
};

enum class TradeoffFamily { CQG, CPK };

/// Right-hand sides of the three trade-off inequalities.
/// CQG: C + 2Q, Q + G, C + Q + G.  CPK: C + P, P + K, C + P + K.
struct TradeoffBounds {
    double first = 0.0;
    double second = 0.0;
    double third = 0.0;

    bool admits(TradeoffFamily family, const RateTriple& r, double tol = 0.0) const;
};

enum class CurveKind { Achievable, TimeSharing, OuterEPI, OuterNew };

std::string to_string(CurveKind kind);
std::string to_string(TradeoffFamily family);

struct CurvePoint {
    double x = 0.0;
    double y = 0.0;
    /// Optimal beta for trade-off envelopes, NaN otherwise.
    double beta = std::numeric_limits<double>::quiet_NaN();
};

struct RegionCurve {
    std::vector<CurvePoint> points;
    CurveKind kind = CurveKind::Achievable;
    double eta = 1.0;
    double energy = 0.0;
    std::string formula_id;
    /// Points whose formal value was negative and were clipped to zero.
    int clipped_points = 0;
    double min_formal_y = 0.0;
};

// Degraded broadcast channel: the sender reaches A' through the attenuator
// eta and B' through 1 - eta, mean input energy at most E.

/// Boundary R_B'(R_A') of the given region at one point, unclipped.
double broadcast_boundary(CurveKind kind, double eta, double E, double r_a);

/// Superposition-coding boundary sampled on R_A' in [0, g(eta E)].
RegionCurve broadcast_achievable(double eta, double E, int samples);

/// Outer bound with f = epi_f_lambda (OuterEPI) or f_lambda (OuterNew).
RegionCurve broadcast_outer(double eta, double E, CurveKind bound, int samples);

/// Segment from (0, g((1-eta)E)) to (g(eta E), 0).
RegionCurve broadcast_time_sharing(double eta, double E, int samples = 2);

// Trade-off coding over the quantum-limited attenuator eta.

TradeoffBounds tradeoff_achievable_cqg(double eta, double E, double beta);
TradeoffBounds tradeoff_achievable_cpk(double eta, double E, double beta);
/// `bound` is OuterEPI or OuterNew.
TradeoffBounds tradeoff_outer_cqg(double eta, double E, double beta, CurveKind bound);
TradeoffBounds tradeoff_outer_cpk(double eta, double E, double beta, CurveKind bound);

/// Bounds of the given family and curve kind (Achievable, OuterEPI, OuterNew).
TradeoffBounds tradeoff_bounds(TradeoffFamily family, CurveKind kind, double eta, double E, double beta);

/// Largest Q (or P) with G = 0 (or K = 0) at classical rate C, maximized
/// over beta; the optimal beta is written to *beta_out when given.
double tradeoff_envelope(TradeoffFamily family, CurveKind kind, double eta, double E, double c,
                         double* beta_out = nullptr);

/// Envelope sampled on C in [0, g(eta E)]. TimeSharing gives the segment
/// between the single-task corners.
RegionCurve project_cq_plane(TradeoffFamily family, CurveKind kind, double eta, double E, int samples);

/// Largest increase of y along the curve (0 when monotone non-increasing).
double max_increase(const RegionCurve& curve);

}  // namespace moe
