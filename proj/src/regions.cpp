#include "moe/regions.hpp"

#include <algorithm>
#include <cmath>

#include "moe/bounds.hpp"
#include "moe/errors.hpp"
#include "moe/fock.hpp"

namespace moe {

namespace {

void check_setting(double eta, double E) {
    if (!(eta >= 0.5 && eta <= 1.0)) throw InvalidParameter("region needs 1/2 <= eta <= 1");
    if (!(E > 0.0) || !std::isfinite(E)) throw InvalidParameter("region needs finite E > 0");
}

void check_beta(double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidParameter("beta must lie in [0, 1]");
}

void check_samples(int samples) {
    if (samples < 2) throw InvalidParameter("a curve needs at least 2 samples");
}

// f_lambda extended to the endpoints: lambda = 1 is the identity and
// lambda = 0 the zero map.
double f_new(double x, double lambda) {
    if (lambda >= 1.0) return x;
    if (lambda <= 0.0) return 0.0;
    return f_lambda(x, lambda);
}

double f_new_inverse(double y, double lambda) {
    if (lambda >= 1.0) return y;
    return f_lambda_inverse(y, lambda);
}

double outer_f(CurveKind bound, double x, double lambda) {
    if (bound == CurveKind::OuterEPI) return epi_f_lambda(x, lambda);
    if (bound == CurveKind::OuterNew) return f_new(x, lambda);
    throw InvalidParameter("outer bound must be OuterEPI or OuterNew");
}

double outer_f_inverse(CurveKind bound, double y, double lambda) {
    if (bound == CurveKind::OuterEPI) return epi_f_lambda_inverse(y, lambda);
    if (bound == CurveKind::OuterNew) return f_new_inverse(y, lambda);
    throw InvalidParameter("outer bound must be OuterEPI or OuterNew");
}

std::string formula_name(CurveKind kind) {
    switch (kind) {
        case CurveKind::Achievable: return "achievable";
        case CurveKind::TimeSharing: return "time-sharing";
        case CurveKind::OuterEPI: return "outer-epi";
        case CurveKind::OuterNew: return "outer-new";
    }
    return "unknown";
}

RegionCurve sample_curve(CurveKind kind, double eta, double E, int samples, const std::string& prefix,
                         double x_max, auto&& boundary) {
    check_samples(samples);
    RegionCurve curve;
    curve.kind = kind;
    curve.eta = eta;
    curve.energy = E;
    curve.formula_id = prefix + "/" + formula_name(kind);
    curve.points.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        // Last point pinned exactly to x_max.
        const double x = i == samples - 1 ? x_max : x_max * i / (samples - 1);
        CurvePoint p = boundary(x);
        curve.min_formal_y = std::min(curve.min_formal_y, p.y);
        if (p.y < 0.0) {
            ++curve.clipped_points;
            p.y = 0.0;
        }
        curve.points.push_back(p);
    }
    return curve;
}

}  // namespace

bool TradeoffBounds::admits(TradeoffFamily family, const RateTriple& r, double tol) const {
    const double lhs_first = family == TradeoffFamily::CQG ? r.c + 2.0 * r.q_or_p : r.c + r.q_or_p;
    return r.c >= -tol && r.q_or_p >= -tol && lhs_first <= first + tol && r.q_or_p + r.g_or_k <= second + tol &&
           r.c + r.q_or_p + r.g_or_k <= third + tol;
}

std::string to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::Achievable: return "Achievable";
        case CurveKind::TimeSharing: return "TimeSharing";
        case CurveKind::OuterEPI: return "OuterEPI";
        case CurveKind::OuterNew: return "OuterNew";
    }
    return "unknown";
}

std::string to_string(TradeoffFamily family) { return family == TradeoffFamily::CQG ? "CQG" : "CPK"; }

double broadcast_boundary(CurveKind kind, double eta, double E, double r_a) {
    check_setting(eta, E);
    if (!(r_a >= 0.0)) throw InvalidParameter("rate must be >= 0");
    const double lambda = (1.0 - eta) / eta;
    const double top = g((1.0 - eta) * E);
    switch (kind) {
        case CurveKind::Achievable: return top - g(lambda * g_inverse(r_a));
        case CurveKind::TimeSharing: return top * (1.0 - r_a / g(eta * E));
        case CurveKind::OuterEPI:
        case CurveKind::OuterNew: return top - outer_f(kind, r_a, lambda);
    }
    return 0.0;
}

RegionCurve broadcast_achievable(double eta, double E, int samples) {
    check_setting(eta, E);
    const double x_max = g(eta * E);
    const double top = g((1.0 - eta) * E);
    return sample_curve(CurveKind::Achievable, eta, E, samples, "broadcast", x_max, [&](double x) {
        // Endpoints are exact: g^{-1}(0) = 0 and g^{-1}(g(eta E)) = eta E.
        if (x == 0.0) return CurvePoint{x, top};
        if (x == x_max) return CurvePoint{x, 0.0};
        return CurvePoint{x, broadcast_boundary(CurveKind::Achievable, eta, E, x)};
    });
}

RegionCurve broadcast_outer(double eta, double E, CurveKind bound, int samples) {
    check_setting(eta, E);
    if (bound != CurveKind::OuterEPI && bound != CurveKind::OuterNew)
        throw InvalidParameter("outer bound must be OuterEPI or OuterNew");
    return sample_curve(bound, eta, E, samples, "broadcast", g(eta * E),
                        [&](double x) { return CurvePoint{x, broadcast_boundary(bound, eta, E, x)}; });
}

RegionCurve broadcast_time_sharing(double eta, double E, int samples) {
    check_setting(eta, E);
    const double x_max = g(eta * E);
    const double top = g((1.0 - eta) * E);
    return sample_curve(CurveKind::TimeSharing, eta, E, samples, "broadcast", x_max, [&](double x) {
        return CurvePoint{x, x == x_max ? 0.0 : top * (1.0 - x / x_max)};
    });
}

TradeoffBounds tradeoff_achievable_cqg(double eta, double E, double beta) {
    check_setting(eta, E);
    check_beta(beta);
    const double loss = g((1.0 - eta) * beta * E);
    return {g(beta * E) + g(eta * E) - loss, g(eta * beta * E) - loss, g(eta * E) - loss};
}

TradeoffBounds tradeoff_achievable_cpk(double eta, double E, double beta) {
    check_setting(eta, E);
    check_beta(beta);
    const double loss = g((1.0 - eta) * beta * E);
    return {g(eta * E), g(eta * beta * E) - loss, g(eta * E) - loss};
}

TradeoffBounds tradeoff_outer_cqg(double eta, double E, double beta, CurveKind bound) {
    check_setting(eta, E);
    check_beta(beta);
    const double lambda = (1.0 - eta) / eta;
    const double y = g(beta * eta * E);
    const double loss = outer_f(bound, y, lambda);
    return {g(eta * E) + outer_f_inverse(bound, y, eta) - loss, y - loss, g(eta * E) - loss};
}

TradeoffBounds tradeoff_outer_cpk(double eta, double E, double beta, CurveKind bound) {
    check_setting(eta, E);
    check_beta(beta);
    const double lambda = (1.0 - eta) / eta;
    const double y = g(beta * eta * E);
    const double loss = outer_f(bound, y, lambda);
    return {g(eta * E), y - loss, g(eta * E) - loss};
}

TradeoffBounds tradeoff_bounds(TradeoffFamily family, CurveKind kind, double eta, double E, double beta) {
    const bool cqg = family == TradeoffFamily::CQG;
    switch (kind) {
        case CurveKind::Achievable:
            return cqg ? tradeoff_achievable_cqg(eta, E, beta) : tradeoff_achievable_cpk(eta, E, beta);
        case CurveKind::OuterEPI:
        case CurveKind::OuterNew:
            return cqg ? tradeoff_outer_cqg(eta, E, beta, kind) : tradeoff_outer_cpk(eta, E, beta, kind);
        case CurveKind::TimeSharing: break;
    }
    throw InvalidParameter("trade-off bounds exist for Achievable, OuterEPI and OuterNew");
}

double tradeoff_envelope(TradeoffFamily family, CurveKind kind, double eta, double E, double c,
                         double* beta_out) {
    if (!(c >= 0.0)) throw InvalidParameter("classical rate must be >= 0");
    // Largest Q at this beta with the third rate set to zero.
    auto q_at = [&](double beta) {
        const TradeoffBounds b = tradeoff_bounds(family, kind, eta, E, beta);
        const double first = family == TradeoffFamily::CQG ? 0.5 * (b.first - c) : b.first - c;
        return std::min({first, b.second, b.third - c});
    };

    constexpr int grid = 101;
    int best = 0;
    double best_q = q_at(0.0);
    for (int i = 1; i < grid; ++i) {
        const double q = q_at(static_cast<double>(i) / (grid - 1));
        if (q > best_q) {
            best_q = q;
            best = i;
        }
    }
    // q_at is unimodal in beta: golden-section refinement around the best
    // grid point.
    double lo = std::max(0, best - 1) / static_cast<double>(grid - 1);
    double hi = std::min(grid - 1, best + 1) / static_cast<double>(grid - 1);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = q_at(x1);
    double f2 = q_at(x2);
    while (hi - lo > 1e-13) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = q_at(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = q_at(x1);
        }
    }
    double beta = best / static_cast<double>(grid - 1);
    for (double candidate : {x1, x2}) {
        const double q = q_at(candidate);
        if (q > best_q) {
            best_q = q;
            beta = candidate;
        }
    }
    if (beta_out) *beta_out = beta;
    return best_q;
}

RegionCurve project_cq_plane(TradeoffFamily family, CurveKind kind, double eta, double E, int samples) {
    check_setting(eta, E);
    const double c_max = g(eta * E);
    const std::string prefix = "tradeoff-" + to_string(family);
    if (kind == CurveKind::TimeSharing) {
        const double q0 = tradeoff_envelope(family, CurveKind::Achievable, eta, E, 0.0);
        return sample_curve(kind, eta, E, samples, prefix, c_max, [&](double c) {
            return CurvePoint{c, c == c_max ? 0.0 : q0 * (1.0 - c / c_max)};
        });
    }
    return sample_curve(kind, eta, E, samples, prefix, c_max, [&](double c) {
        CurvePoint p{c, 0.0};
        p.y = tradeoff_envelope(family, kind, eta, E, c, &p.beta);
        return p;
    });
}

double max_increase(const RegionCurve& curve) {
    double worst = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        worst = std::max(worst, curve.points[i].y - curve.points[i - 1].y);
    return worst;
}

}  // namespace moe
