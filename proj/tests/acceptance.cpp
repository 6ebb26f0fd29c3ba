// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances are fixed below.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "moe/bounds.hpp"
#include "moe/regions.hpp"
#include "moe/verify.hpp"

#ifndef MOEBOUND_PATH
#error "MOEBOUND_PATH must point at the CLI binary"
#endif

using namespace moe;

namespace {

// Pinned tolerances and budgets.
constexpr double kThermalTol = 1e-4;
constexpr double kThermalBudgetSec = 120.0;
constexpr double kFormulaTol = 1e-9;
constexpr double kEpniBudgetSec = 5.0;
constexpr double kBoundaryTol = 1e-10;
constexpr double kMultiModeSlack = 2e-3;
constexpr double kMultiModeBudgetSec = 20.0 * 60.0;
constexpr double kOneModeSlack = 1e-3;
constexpr double kRegionTol = 1e-10;
constexpr double kRoundTripTol = 1e-8;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Independent long-double oracles, written from the closed forms.
using LD = long double;

LD g_ld(LD e) { return e <= 0 ? 0.0L : (e + 1) * std::log(e + 1) - e * std::log(e); }

LD g_inv_ld(LD s) {
    if (s <= 0) return 0;
    LD lo = 0;
    LD hi = 1;
    while (g_ld(hi) < s) hi *= 2;
    for (int i = 0; i < 200; ++i) {
        const LD mid = 0.5L * (lo + hi);
        (g_ld(mid) < s ? lo : hi) = mid;
    }
    return 0.5L * (lo + hi);
}

// Quantum-limited attenuator: EPI, sharper bound and thermal (Gaussian) value.
LD epi_att0(LD eta, LD s) { return std::log(eta * std::exp(s) + (1 - eta)); }
LD gauss_att0(LD eta, LD s) { return g_ld(eta * g_inv_ld(s)); }
LD new_att(LD eta, LD E, LD s) {
    const LD shift = g_ld(eta / (1 - eta)) - g_ld(E);
    return g_ld(eta * g_inv_ld(s + shift) + eta) - shift;
}
LD f_oracle(LD lambda, LD x) {
    const LD c = g_ld(lambda / (1 - lambda));
    return g_ld(lambda * g_inv_ld(x + c) + lambda) - c;
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
};

int failures = 0;

void report(int id, const std::string& title, Outcome& o) {
    std::cout << "CRITERION " << id << ' ' << (o.pass ? "PASS" : "FAIL") << ": " << title << " [" << o.detail.str()
              << "]\n"
              << std::flush;
    if (!o.pass) ++failures;
}

// ------------------------------------------------------------------ 1
void criterion_thermal() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto grid = default_thermal_grid();
    const VerificationReport r = verify_thermal_formulas(grid, 40, kThermalTol);
    const double secs = seconds_since(t0);

    // Closed forms against an independent evaluation of the output mean.
    double worst_closed = 0.0;
    double worst_sim = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const ChannelSpec& ch = grid[i].channel;
        const LD N = grid[i].mean_photons;
        const LD E = ch.env_photons;
        LD out = 0;
        switch (ch.kind) {
            case ChannelKind::Attenuator: out = ch.eta * N + (1 - ch.eta) * E; break;
            case ChannelKind::Amplifier: out = ch.kappa * N + (ch.kappa - 1) * (E + 1); break;
            case ChannelKind::Contravariant: out = (ch.kappa - 1) * (N + 1) + ch.kappa * E; break;
            case ChannelKind::AdditiveNoise: out = N + E; break;
        }
        worst_closed = std::max(worst_closed, static_cast<double>(std::abs(r.trials[i].bound - g_ld(out))));
        worst_sim = std::max(worst_sim, std::abs(r.trials[i].margin));
    }
    o.pass = r.summary.failed == 0 && r.trials.size() == 48 && worst_sim <= kThermalTol && worst_closed <= 1e-12 &&
             secs <= kThermalBudgetSec;
    o.detail << "48 points, max |sim - closed| = " << worst_sim << ", closed-form vs oracle " << worst_closed << ", "
             << secs << " s";
    report(1, "thermal inputs reach the closed-form output entropy (D=40, tol 1e-4)", o);
}

// ------------------------------------------------------------------ 2
void criterion_epni() {
    Outcome o;
    const auto t0 = Clock::now();
    double min_strict = 1e300;
    double worst_oracle = 0.0;
    double worst_order = 0.0;
    double at_zero = 0.0;
    for (double eta : {0.1, 0.2}) {
        const ChannelSpec ch = ChannelSpec::attenuator(eta, 0.0);
        for (int i = 0; i <= 600; ++i) {
            const double s = 6.0 * i / 600;
            const auto b = bound_set(ch, s);
            const double epi = *b[0].value_per_mode;
            const double nw = *b[1].value_per_mode;
            const double gs = *b[2].value_per_mode;
            worst_oracle = std::max({worst_oracle, static_cast<double>(std::abs(epi - epi_att0(eta, s))),
                                     static_cast<double>(std::abs(nw - new_att(eta, 0, s))),
                                     static_cast<double>(std::abs(gs - gauss_att0(eta, s)))});
            worst_order = std::max({worst_order, epi - nw, nw - gs});
            if (s >= 0.05) min_strict = std::min({min_strict, nw - epi, gs - nw});
            if (i == 0) at_zero = std::max({at_zero, std::abs(epi), std::abs(nw), std::abs(gs)});
        }
    }
    const double secs = seconds_since(t0);
    o.pass = worst_oracle <= kFormulaTol && worst_order <= kFormulaTol && min_strict > 0.0 && at_zero <= kFormulaTol &&
             secs <= kEpniBudgetSec;
    o.detail << "oracle dev " << worst_oracle << ", order violation " << worst_order << ", min strict gap "
             << min_strict << ", |value at S=0| " << at_zero << ", " << secs << " s";
    report(2, "EPI <= New <= Gaussian on eta in {0.1, 0.2}, 601 points, strict for S >= 0.05", o);
}

// ------------------------------------------------------------------ 3
void criterion_boundary() {
    Outcome o;
    double worst = 0.0;
    auto scan = [&](const ChannelSpec& ch) {
        for (int i = 0; i <= 600; ++i) {
            const double s = 6.0 * i / 600;
            worst = std::max(worst, std::abs(*new_bound(ch, s).value_per_mode - thermal_formula(ch, s)));
        }
    };
    for (double eta : {0.2, 0.5, 0.8}) scan(ChannelSpec::attenuator(eta, eta / (1 - eta)));
    for (double k : {1.5, 2.0, 3.0}) scan(ChannelSpec::amplifier(k, 1 / (k - 1)));
    o.pass = worst <= kBoundaryTol;
    o.detail << "max |New - thermal formula| = " << worst;
    report(3, "New bound meets the entanglement-breaking thermal formula at the domain edge", o);
}

// ------------------------------------------------------------------ 4
void criterion_multimode() {
    Outcome o;
    const auto t0 = Clock::now();
    struct Case {
        ChannelSpec channel;
        int entangled_output_cutoff;
        double entangled_energy_cap;
    };
    const std::array<Case, 3> cases{{
        {ChannelSpec::contravariant(1.5, 0.0), 25, std::numeric_limits<double>::infinity()},
        {ChannelSpec::attenuator(0.3, 1.0), 25, std::numeric_limits<double>::infinity()},
        // Amplified tails of high-energy entangled inputs do not fit a dense
        // two-mode output; the entangled amplifier ensemble is energy capped.
        {ChannelSpec::amplifier(2.0, 1.2), 36, 0.15},
    }};
    double min_margin = 1e300;
    int failed = 0;
    int inconclusive = 0;
    int trials = 0;
    for (const Case& c : cases) {
        for (EnsembleKind kind : {EnsembleKind::ProductOfOneMode, EnsembleKind::EntangledBipartite,
                                  EnsembleKind::RandomDiagonal}) {
            EnsembleSpec e;
            e.kind = kind;
            e.modes = 2;
            e.cutoff = 12;
            e.trials = 200;
            e.seed = 2024;
            VerifyOptions opt;
            opt.slack = kMultiModeSlack;
            opt.dump_dir = "acceptance-dumps";
            if (kind == EnsembleKind::EntangledBipartite) {
                e.max_mean_photons = c.entangled_energy_cap;
                DilationPlan plan = verification_plan(c.channel, e.cutoff, 2, kind);
                plan.output_cutoff = c.entangled_output_cutoff;
                opt.plan = plan;
            }
            const VerificationReport r = verify_moe_entanglement_breaking(c.channel, 2, e, opt);
            min_margin = std::min(min_margin, r.summary.min_margin);
            failed += r.summary.failed;
            inconclusive += r.summary.inconclusive;
            trials += r.summary.trials;
            std::cout << "  " << c.channel.describe() << ' ' << to_string(kind) << ": D_o=" << r.plan->output_cutoff
                      << ", " << r.summary.passed << '/' << r.summary.trials << " pass, min margin "
                      << r.summary.min_margin << ", max deficit " << r.summary.max_trace_deficit << '\n'
                      << std::flush;
            for (const auto& d : r.dumps) std::cout << "  dump " << d << '\n';
        }
    }
    const double secs = seconds_since(t0);
    o.pass = failed == 0 && inconclusive == 0 && trials == 1800 && min_margin >= -kMultiModeSlack &&
             secs <= kMultiModeBudgetSec;
    o.detail << trials << " trials, " << failed << " failed, " << inconclusive << " inconclusive, min margin "
             << min_margin << ", " << secs << " s";
    report(4, "two-mode entanglement-breaking channels: thermal formula is a lower bound (slack 2e-3)", o);
}

// ------------------------------------------------------------------ 5
void criterion_new_bound_mc() {
    Outcome o;
    double min_margin = 1e300;
    int failed = 0;
    int inconclusive = 0;
    int order = 0;
    int compared = 0;
    for (double eta : {0.1, 0.5}) {
        EnsembleSpec e;
        e.kind = EnsembleKind::GinibreMixed;
        e.cutoff = 40;
        e.trials = 500;
        e.seed = 77;
        VerifyOptions opt;
        opt.slack = kOneModeSlack;
        opt.dump_dir = "acceptance-dumps";
        const VerificationReport r = verify_new_bound(ChannelSpec::attenuator(eta, 0.0), 1, e, opt);
        min_margin = std::min(min_margin, r.summary.min_margin);
        failed += r.summary.failed;
        inconclusive += r.summary.inconclusive;
        for (const auto& t : r.trials) {
            if (t.input_entropy <= 0.1) continue;
            ++compared;
            if (!(t.margin <= *t.epi_margin)) ++order;
        }
    }
    o.pass = failed == 0 && inconclusive == 0 && min_margin >= -kOneModeSlack && order == 0 && compared > 0;
    o.detail << "1000 trials, " << failed << " failed, " << inconclusive << " inconclusive, min margin " << min_margin
             << ", new margin > EPI margin on " << order << " of " << compared << " trials with S > 0.1";
    report(5, "one-mode attenuator Monte Carlo against the new bound (D=40, 500 trials per eta)", o);
}

// ------------------------------------------------------------------ 6
void criterion_broadcast() {
    Outcome o;
    constexpr double eta = 0.9;
    constexpr double E = 4.0;
    constexpr int n = 512;
    const RegionCurve ts = broadcast_time_sharing(eta, E, n);
    const RegionCurve ach = broadcast_achievable(eta, E, n);
    const RegionCurve nw = broadcast_outer(eta, E, CurveKind::OuterNew, n);
    const RegionCurve epi = broadcast_outer(eta, E, CurveKind::OuterEPI, n);
    double worst_gap = 0.0;
    double worst_oracle = 0.0;
    const LD lambda = (1 - static_cast<LD>(eta)) / eta;
    const LD top = g_ld((1 - static_cast<LD>(eta)) * E);
    for (int i = 0; i < n; ++i) {
        worst_gap = std::max({worst_gap, ts.points[i].y - ach.points[i].y, ach.points[i].y - nw.points[i].y,
                              nw.points[i].y - epi.points[i].y});
        const LD x = ach.points[i].x;
        const LD y_ach = std::max<LD>(0, top - g_ld(lambda * g_inv_ld(x)));
        const LD y_new = std::max<LD>(0, top - f_oracle(lambda, x));
        worst_oracle = std::max({worst_oracle, static_cast<double>(std::abs(ach.points[i].y - y_ach)),
                                 static_cast<double>(std::abs(nw.points[i].y - y_new))});
    }
    const double end_dev = std::max({std::abs(ach.points.back().x - static_cast<double>(g_ld(3.6L))),
                                     std::abs(ach.points.back().y), std::abs(ach.points.front().x),
                                     std::abs(ach.points.front().y - static_cast<double>(g_ld(0.4L)))});
    o.pass = worst_gap <= kRegionTol && end_dev <= kRegionTol && worst_oracle <= 1e-9;
    o.detail << "max containment violation " << worst_gap << ", endpoint dev " << end_dev << ", oracle dev "
             << worst_oracle;
    report(6, "broadcast region chain TimeSharing <= Achievable <= OuterNew <= OuterEPI (eta=0.9, E=4)", o);
}

// ------------------------------------------------------------------ 7
void criterion_tradeoff() {
    Outcome o;
    constexpr double eta = 0.9;
    constexpr double E = 4.0;
    constexpr int n = 256;
    double worst_gap = 0.0;
    double worst_family = 0.0;
    double worst_scan = 0.0;
    std::array<RegionCurve, 2> ach_by_family;
    for (TradeoffFamily fam : {TradeoffFamily::CQG, TradeoffFamily::CPK}) {
        const RegionCurve ach = project_cq_plane(fam, CurveKind::Achievable, eta, E, n);
        const RegionCurve nw = project_cq_plane(fam, CurveKind::OuterNew, eta, E, n);
        const RegionCurve epi = project_cq_plane(fam, CurveKind::OuterEPI, eta, E, n);
        for (int i = 0; i < n; ++i)
            worst_gap = std::max({worst_gap, ach.points[i].y - nw.points[i].y, nw.points[i].y - epi.points[i].y});
        ach_by_family[fam == TradeoffFamily::CQG ? 0 : 1] = ach;
        for (CurveKind k : {CurveKind::Achievable, CurveKind::OuterNew, CurveKind::OuterEPI}) {
            const RegionCurve cq = project_cq_plane(TradeoffFamily::CQG, k, eta, E, n);
            const RegionCurve cp = project_cq_plane(TradeoffFamily::CPK, k, eta, E, n);
            for (int i = 0; i < n; ++i) worst_family = std::max(worst_family, std::abs(cq.points[i].y - cp.points[i].y));
        }
        // Envelope optimizer against a dense beta scan at a few C values.
        for (int i = 0; i < n; i += 32) {
            const double c = ach.points[i].x;
            double best = -1e300;
            for (int j = 0; j <= 20000; ++j) {
                const auto b = tradeoff_bounds(fam, CurveKind::Achievable, eta, E, j / 20000.0);
                const double first = fam == TradeoffFamily::CQG ? 0.5 * (b.first - c) : b.first - c;
                best = std::max(best, std::min({first, b.second, b.third - c}));
            }
            worst_scan = std::max(worst_scan, best - tradeoff_envelope(fam, CurveKind::Achievable, eta, E, c));
        }
    }
    o.pass = worst_gap <= kRegionTol && worst_family <= kRegionTol && worst_scan <= 1e-9;
    o.detail << "max containment violation " << worst_gap << ", |CQG - CPK| " << worst_family
             << ", optimizer below scan by " << worst_scan;
    report(7, "trade-off envelopes: Achievable <= OuterNew <= OuterEPI, CQG and CPK coincide (eta=0.9, E=4)", o);
}

// ------------------------------------------------------------------ 8
void criterion_round_trips() {
    Outcome o;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_g = 0.0;
    double worst_f = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = std::pow(10.0, -6.0 + 12.0 * u(rng));
        worst_g = std::max(worst_g, std::abs(g_inverse(g(x)) - x) / std::max(1.0, x));
        const double lambda = 0.001 + 0.998 * u(rng);
        const double y = 20.0 * u(rng);
        worst_f = std::max(worst_f, std::abs(f_lambda_inverse(f_lambda(y, lambda), lambda) - y) / std::max(1.0, y));
    }

    // Finite differences: monotone increasing and convex (concave for g).
    int shape_violations = 0;
    auto check_shape = [&](const std::function<double(double)>& f, double lo, double hi, bool convex) {
        constexpr int m = 400;
        const double h = (hi - lo) / m;
        for (int i = 1; i < m; ++i) {
            const double a = f(lo + (i - 1) * h);
            const double b = f(lo + i * h);
            const double c = f(lo + (i + 1) * h);
            if (!(b > a)) ++shape_violations;
            const double second = a - 2 * b + c;
            if (convex ? second < -1e-10 : second > 1e-10) ++shape_violations;
        }
    };
    check_shape([](double e) { return g(e); }, 0.0, 30.0, false);
    for (double eta : {0.1, 0.3, 0.7}) {
        check_shape([&](double s) { return g(eta * g_inverse(s)); }, 0.0, 8.0, true);
        check_shape([&](double s) { return *new_bound(ChannelSpec::attenuator(eta, 0.0), s).value_per_mode; }, 0.0,
                    8.0, true);
        check_shape([&](double s) { return *epi_bound(ChannelSpec::attenuator(eta, 0.0), s).value_per_mode; }, 0.0,
                    8.0, true);
    }
    for (double k : {1.5, 3.0}) check_shape([&](double s) { return g(k * g_inverse(s) + k - 1); }, 0.0, 8.0, true);
    for (double lambda : {0.05, 0.25, 0.5, 0.9}) check_shape([&](double x) { return f_lambda(x, lambda); }, 0.0, 8.0, true);

    o.pass = worst_g <= kRoundTripTol && worst_f <= kRoundTripTol && shape_violations == 0;
    o.detail << "g round trip " << worst_g << ", f_lambda round trip " << worst_f << ", shape violations "
             << shape_violations;
    report(8, "round trips of g and f_lambda (1000 points each) and finite-difference shape suites", o);
}

// ------------------------------------------------------------------ 9
std::string run_cli(const std::string& args, int* status) {
    const std::string cmd = std::string(MOEBOUND_PATH) + " " + args;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        *status = -1;
        return {};
    }
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    *status = pclose(pipe);
    return out;
}

std::string hash_line(const std::string& out) {
    const std::string key = "report hash ";
    const auto pos = out.find(key);
    return pos == std::string::npos ? std::string() : out.substr(pos + key.size(), 16);
}

void criterion_determinism() {
    Outcome o;
    int s1 = 0;
    int s2 = 0;
    const std::string h1 = hash_line(run_cli("verify all --seed 42 --threads 1", &s1));
    const std::string h2 = hash_line(run_cli("verify all --seed 42 --threads 2", &s2));
    o.pass = s1 == 0 && s2 == 0 && h1.size() == 16 && h1 == h2;
    o.detail << "hashes " << h1 << " / " << h2 << ", exit " << s1 << " / " << s2;
    report(9, "`verify all --seed 42` twice gives identical report hashes", o);
}

}  // namespace

int main() {
    std::cout.precision(6);
    const auto t0 = Clock::now();
    criterion_thermal();
    criterion_epni();
    criterion_boundary();
    criterion_multimode();
    criterion_new_bound_mc();
    criterion_broadcast();
    criterion_tradeoff();
    criterion_round_trips();
    criterion_determinism();
    std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL") << " ("
              << seconds_since(t0) << " s)\n";
    return failures == 0 ? 0 : 1;
}
