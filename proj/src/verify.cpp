#include "moe/verify.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace moe {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

FockState ginibre(std::mt19937_64& rng, int cutoff, int modes, Eigen::Index rank) {
    std::normal_distribution<double> normal;
    const Eigen::Index d = fock_dimension(cutoff, modes);
    Eigen::MatrixXcd gmat(d, rank);
    for (Eigen::Index j = 0; j < rank; ++j)
        for (Eigen::Index i = 0; i < d; ++i) gmat(i, j) = Complex(normal(rng), normal(rng));
    Eigen::MatrixXcd rho = gmat * gmat.adjoint();
    rho /= rho.trace().real();
    return FockState{modes, cutoff, std::move(rho), 0.0};
}

FockState random_diagonal(std::mt19937_64& rng, int cutoff, int modes) {
    std::exponential_distribution<double> expo(1.0);
    const Eigen::Index d = fock_dimension(cutoff, modes);
    Eigen::VectorXd p(d);
    for (Eigen::Index i = 0; i < d; ++i) p(i) = expo(rng);
    p /= p.sum();
    return FockState{modes, cutoff, p.cast<Complex>().asDiagonal(), 0.0};
}

// Total photon number of each basis state.
Eigen::VectorXd total_photons(int cutoff, int modes) {
    const Eigen::Index d = fock_dimension(cutoff, modes);
    Eigen::VectorXd n(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        Eigen::Index rest = i;
        int total = 0;
        for (int m = 0; m < modes; ++m) {
            total += static_cast<int>(rest % cutoff);
            rest /= cutoff;
        }
        n(i) = total;
    }
    return n;
}

// Photon-number filter q^{N/2} rho q^{N/2}, renormalized, chosen so that the
// mean photon number per mode equals `target`.
FockState damp_to(const FockState& s, double target) {
    const Eigen::VectorXd n = total_photons(s.cutoff, s.modes);
    const Eigen::VectorXd p = s.matrix.diagonal().real();
    auto mean_at = [&](double q) {
        const Eigen::ArrayXd w = p.array() * (n.array() * std::log(q)).exp();
        return (w * n.array()).sum() / w.sum() / s.modes;
    };
    double lo = 1e-6;
    double hi = 1.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean_at(mid) < target ? lo : hi) = mid;
    }
    const double q = 0.5 * (lo + hi);
    const Eigen::VectorXd f = (0.5 * std::log(q) * n.array()).exp().matrix();
    Eigen::MatrixXcd m = f.asDiagonal() * s.matrix * f.asDiagonal();
    m /= m.trace().real();
    return FockState{s.modes, s.cutoff, std::move(m), 0.0};
}

FockState apply_cap(FockState s, const EnsembleSpec& spec, std::mt19937_64& rng) {
    if (!std::isfinite(spec.max_mean_photons)) return s;
    const double target = spec.max_mean_photons * uniform(rng, 0.5, 1.0);
    if (mean_photons(s).per_mode() <= spec.max_mean_photons) return s;
    return damp_to(s, target);
}

// One displaced thermal mode with truncation tail below 1e-8; the
// displacement is halved until it is. Returns the number of halvings.
FockState sample_displaced_thermal(std::mt19937_64& rng, int cutoff, int& shrinks) {
    const double q_max = std::pow(1e-10, 1.0 / cutoff);
    const double n_max = 0.5 * q_max / (1.0 - q_max);
    const double N = uniform(rng, 0.0, n_max);
    double r = uniform(rng, 0.0, 0.5 * std::sqrt(static_cast<double>(cutoff)));
    const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    for (;;) {
        FockState s = displaced_thermal(N, std::polar(r, phi), cutoff);
        if (s.trace_deficit < 1e-8 || r == 0.0) return renormalize(s);
        ++shrinks;
        r = r < 1e-3 ? 0.0 : 0.5 * r;
    }
}

struct Sample {
    FockState state;
    std::vector<FockState> factors;
    std::string note;
};

Sample draw(const EnsembleSpec& spec, std::uint64_t index) {
    spec.validate();
    std::mt19937_64 rng = trial_rng(spec.seed, index);
    const int D = spec.cutoff;
    const int n = spec.modes;
    const Eigen::Index d = fock_dimension(D, n);
    Sample out;
    switch (spec.kind) {
        case EnsembleKind::GinibreMixed: {
            const Eigen::Index rank = spec.rank > 0 ? spec.rank : uniform_int(rng, 1, static_cast<int>(d));
            out.state = apply_cap(ginibre(rng, D, n, rank), spec, rng);
            break;
        }
        case EnsembleKind::RandomDiagonal: out.state = apply_cap(random_diagonal(rng, D, n), spec, rng); break;
        case EnsembleKind::RandomPure: out.state = apply_cap(ginibre(rng, D, n, 1), spec, rng); break;
        case EnsembleKind::EntangledBipartite: {
            // Reduced state of a random pure state on system (x) ancilla of
            // dimension k, i.e. a Ginibre state of rank k.
            const Eigen::Index k = spec.rank > 0 ? spec.rank : uniform_int(rng, 1, static_cast<int>(std::min<Eigen::Index>(d, 8)));
            out.state = apply_cap(ginibre(rng, D, n, k), spec, rng);
            break;
        }
        case EnsembleKind::ProductOfOneMode: {
            for (int m = 0; m < n; ++m) {
                const Eigen::Index rank = spec.rank > 0 ? spec.rank : uniform_int(rng, 1, D);
                out.factors.push_back(apply_cap(ginibre(rng, D, 1, rank), spec, rng));
            }
            out.state = out.factors.front();
            for (int m = 1; m < n; ++m) out.state = tensor(out.state, out.factors[static_cast<std::size_t>(m)]);
            break;
        }
        case EnsembleKind::DisplacedThermal: {
            int shrinks = 0;
            for (int m = 0; m < n; ++m) {
                FockState f = sample_displaced_thermal(rng, D, shrinks);
                out.state = m == 0 ? f : tensor(out.state, f);
            }
            out.state = apply_cap(out.state, spec, rng);
            if (shrinks > 0) out.note = "displacement shrunk " + std::to_string(shrinks) + "x to meet the tail cap";
            break;
        }
    }
    return out;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MOE_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) return t;
    }
    return 1;
}

// Runs body(i) for i in [0, count) on `threads` workers; each index writes
// only its own slot, so the result does not depend on scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int i = next++; i < count; i = next++) body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct ChannelOutput {
    double entropy = 0.0;  // total, not per mode
    double deficit = 0.0;
};

ChannelOutput run_channel(const ChannelSpec& channel, const Sample& sample, int n, const DilationPlan& plan) {
    ChannelOutput r;
    if (!sample.factors.empty()) {
        // Product input: the output is the product of one-mode outputs.
        double kept = 1.0;
        for (const auto& f : sample.factors) {
            const FockState out = apply_channel(channel, f, plan);
            r.entropy += von_neumann_entropy(out);
            kept *= 1.0 - out.trace_deficit;
        }
        r.deficit = 1.0 - kept;
        return r;
    }
    const FockState& in = sample.state;
    if (n > 1 && in.matrix.isDiagonal(0.0)) {
        const Eigen::VectorXd p =
            channel_map(channel, plan)->apply_to_populations(in.matrix.diagonal().real(), n).real();
        r.entropy = spectrum_entropy(p);
        r.deficit = in.trace_deficit + std::max(0.0, in.trace() - p.sum());
        return r;
    }
    const FockState out = n == 1 ? apply_channel(channel, in, plan) : apply_tensor_power(channel, in, n, plan);
    r.entropy = von_neumann_entropy(out);
    r.deficit = out.trace_deficit;
    return r;
}

void summarize(VerificationReport& report, double slack, const std::function<double(double)>& gaussian) {
    ReportSummary& s = report.summary;
    s.trials = static_cast<int>(report.trials.size());
    s.slack = slack;
    for (const auto& t : report.trials) {
        switch (t.status) {
            case TrialStatus::Pass: ++s.passed; break;
            case TrialStatus::Fail: ++s.failed; break;
            case TrialStatus::Inconclusive: ++s.inconclusive; break;
        }
        if (t.status != TrialStatus::Inconclusive) s.min_margin = std::min(s.min_margin, t.margin);
        s.max_trace_deficit = std::max(s.max_trace_deficit, t.trace_deficit);
        if (t.epi_margin && t.input_entropy > 0.1 && t.margin > *t.epi_margin) ++s.ordering_violations;
        if (!t.note.empty()) report.log.push_back("trial " + std::to_string(t.index) + ": " + t.note);
    }
    if (!gaussian) return;
    constexpr double width = 0.5;
    for (const auto& t : report.trials) {
        const int b = static_cast<int>(std::floor(t.input_entropy / width));
        while (static_cast<int>(s.buckets.size()) <= b) {
            const double lo = width * static_cast<double>(s.buckets.size());
            s.buckets.push_back({lo, lo + width, 0, std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity()});
        }
        EntropyBucket& bucket = s.buckets[static_cast<std::size_t>(b)];
        ++bucket.trials;
        bucket.min_output_entropy = std::min(bucket.min_output_entropy, t.output_entropy);
        bucket.min_gap_to_gaussian = std::min(bucket.min_gap_to_gaussian, t.output_entropy - gaussian(t.input_entropy));
    }
    std::erase_if(s.buckets, [](const EntropyBucket& b) { return b.trials == 0; });
}

VerificationReport run_bound_suite(const std::string& suite, const ChannelSpec& channel, int n,
                                   const EnsembleSpec& ensemble, const VerifyOptions& options,
                                   const std::function<double(double)>& bound, bool record_epi) {
    ensemble.validate();
    if (ensemble.modes != n) throw InvalidParameter("ensemble mode count must equal n");
    VerificationReport report;
    report.suite = suite;
    report.channel = channel;
    report.modes = n;
    report.ensemble = ensemble;
    DilationPlan plan = options.plan ? *options.plan : verification_plan(channel, ensemble.cutoff, n, ensemble.kind);
    plan.system_cutoff = ensemble.cutoff;
    plan.max_deficit = 1.0;  // deficits are judged through the slack instead
    report.plan = plan;

    report.trials.resize(static_cast<std::size_t>(ensemble.trials));
    parallel_for(ensemble.trials, resolve_threads(options.threads), [&](int i) {
        const Sample sample = draw(ensemble, static_cast<std::uint64_t>(i));
        TrialRecord& t = report.trials[static_cast<std::size_t>(i)];
        t.index = static_cast<std::uint64_t>(i);
        t.note = sample.note;
        if (!sample.factors.empty()) {
            for (const auto& f : sample.factors) t.input_entropy += von_neumann_entropy(f);
            t.input_entropy /= n;
        } else {
            t.input_entropy = von_neumann_entropy(sample.state) / n;
        }
        t.input_mean_photons = mean_photons(sample.state).per_mode();
        const ChannelOutput out = run_channel(channel, sample, n, plan);
        t.output_entropy = out.entropy / n;
        t.trace_deficit = out.deficit;
        t.bound = bound(t.input_entropy);
        t.margin = t.output_entropy - t.bound;
        if (record_epi) {
            t.epi_bound = *epi_bound(channel, t.input_entropy, n).value_per_mode;
            t.epi_margin = t.output_entropy - *t.epi_bound;
        }
        t.slack_used = truncation_slack(out.deficit, plan.output_cutoff, n);
        if (t.slack_used > options.slack) {
            t.status = TrialStatus::Inconclusive;
        } else if (t.margin < -options.slack) {
            t.status = TrialStatus::Fail;
        }
    });

    for (auto& t : report.trials) {
        if (t.status != TrialStatus::Fail || options.dump_dir.empty()) continue;
        const FockState input = draw(ensemble, t.index).state;
        nlohmann::ordered_json meta;
        meta["suite"] = suite;
        meta["channel"] = to_json(channel);
        meta["ensemble"] = to_json(ensemble);
        meta["trial"] = t.index;
        meta["margin"] = t.margin;
        report.dumps.push_back(dump_state(input, options.dump_dir, suite + "-trial" + std::to_string(t.index), meta));
    }
    summarize(report, options.slack, [&](double s) { return thermal_formula(channel, s); });
    return report;
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

// JSON has no infinity; an empty summary reports null.
nlohmann::ordered_json finite_json(double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string to_string(EnsembleKind kind) {
    switch (kind) {
        case EnsembleKind::GinibreMixed: return "ginibre";
        case EnsembleKind::RandomDiagonal: return "diagonal";
        case EnsembleKind::DisplacedThermal: return "displaced-thermal";
        case EnsembleKind::RandomPure: return "pure";
        case EnsembleKind::ProductOfOneMode: return "product";
        case EnsembleKind::EntangledBipartite: return "entangled";
    }
    return "unknown";
}

EnsembleKind ensemble_kind_from_string(const std::string& name) {
    for (EnsembleKind k : {EnsembleKind::GinibreMixed, EnsembleKind::RandomDiagonal, EnsembleKind::DisplacedThermal,
                           EnsembleKind::RandomPure, EnsembleKind::ProductOfOneMode, EnsembleKind::EntangledBipartite})
        if (to_string(k) == name) return k;
    throw InvalidParameter("unknown ensemble '" + name + "'");
}

void EnsembleSpec::validate() const {
    if (trials < 1) throw InvalidParameter("ensemble needs at least one trial");
    if (modes < 1) throw InvalidParameter("ensemble needs at least one mode");
    if (cutoff < 2) throw InvalidDimension("ensemble cutoff must be at least 2");
    if (rank < 0 || static_cast<Eigen::Index>(rank) > fock_dimension(cutoff, modes))
        throw InvalidParameter("rank must lie in [0, D^n]");
    if (kind == EnsembleKind::EntangledBipartite && modes < 2)
        throw InvalidParameter("entangled ensemble needs at least two modes");
    if (!(max_mean_photons > 0.0)) throw InvalidParameter("energy cap must be positive");
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t state = seed;
    const std::uint64_t a = splitmix64(state);
    state = a ^ index;
    std::array<std::uint32_t, 8> words{};
    for (std::size_t k = 0; k < words.size(); k += 2) {
        const std::uint64_t w = splitmix64(state);
        words[k] = static_cast<std::uint32_t>(w);
        words[k + 1] = static_cast<std::uint32_t>(w >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

FockState displaced_thermal(double N, Complex z, int cutoff) {
    if (!(N >= 0.0)) throw InvalidParameter("mean photon number must be >= 0");
    if (cutoff < 2) throw InvalidDimension("cutoff must be at least 2");
    const double r = std::abs(z);
    int padded = cutoff + static_cast<int>(std::ceil(r * r + 10.0 * r)) + 40;
    if (N > 0.0) {
        const double q = N / (N + 1.0);
        padded = std::max(padded, cutoff + static_cast<int>(std::ceil(std::log(1e-16) / std::log(q))));
    }
    const FockState omega = thermal_state(N, padded);
    const Eigen::MatrixXcd d = displacement_operator(z, padded);
    const Eigen::MatrixXcd full = d * omega.matrix * d.adjoint();
    Eigen::MatrixXcd block = full.topLeftCorner(cutoff, cutoff);
    block = 0.5 * (block + block.adjoint()).eval();
    const double kept = block.trace().real();
    return FockState{1, cutoff, std::move(block), std::max(0.0, 1.0 - kept)};
}

std::vector<FockState> sample_factors(const EnsembleSpec& spec, std::uint64_t index) {
    return draw(spec, index).factors;
}

FockState sample_state(const EnsembleSpec& spec, std::uint64_t index) { return draw(spec, index).state; }

double truncation_slack(double trace_deficit, int output_cutoff, int modes) {
    return std::max(1e-4, 10.0 * trace_deficit * modes * std::log(static_cast<double>(output_cutoff)));
}

TruncationDiagnostics truncation_diagnostics(const FockState& state, const ChannelSpec& channel,
                                             const DilationPlan& plan, double target_deficit) {
    DilationPlan p = plan;
    p.max_deficit = 1.0;
    const FockState out = state.modes == 1 ? apply_channel(channel, state, p)
                                           : apply_tensor_power(channel, state, state.modes, p);
    TruncationDiagnostics diag;
    diag.input_deficit = state.trace_deficit;
    diag.trace_deficit = out.trace_deficit;
    diag.slack = truncation_slack(out.trace_deficit, out.cutoff, out.modes);

    // Per-mode photon-number marginal of the output.
    const Eigen::VectorXd joint = out.matrix.diagonal().real();
    Eigen::VectorXd marginal = Eigen::VectorXd::Zero(out.cutoff);
    for (Eigen::Index i = 0; i < joint.size(); ++i) {
        Eigen::Index rest = i;
        for (int m = 0; m < out.modes; ++m) {
            marginal(rest % out.cutoff) += joint(i) / out.modes;
            rest /= out.cutoff;
        }
    }
    for (int k = out.cutoff / 2; k < out.cutoff; ++k) diag.tail_mean_photons += k * marginal(k);

    // Geometric tail extrapolation from the last populated levels.
    auto extend = [&](int cutoff, double deficit, double ratio) {
        if (deficit <= target_deficit) return cutoff;
        if (!(ratio > 0.0 && ratio < 1.0)) return 2 * cutoff;
        return cutoff + static_cast<int>(std::ceil(std::log(target_deficit / deficit) / std::log(ratio)));
    };
    auto tail_ratio = [](const Eigen::VectorXd& p) {
        const Eigen::Index n = p.size();
        if (n < 3 || p(n - 2) <= 0.0) return 0.0;
        return std::min(p(n - 1) / p(n - 2), 0.999);
    };
    const Eigen::VectorXd in_pop = state.matrix.diagonal().real().head(std::min<Eigen::Index>(state.cutoff, state.dimension()));
    diag.recommended_input_cutoff = extend(state.cutoff, state.trace_deficit, tail_ratio(in_pop));
    diag.recommended_output_cutoff = extend(out.cutoff, out.trace_deficit - state.trace_deficit, tail_ratio(marginal));
    diag.cutoff_too_small = out.trace_deficit > target_deficit;
    return diag;
}

std::string to_string(TrialStatus status) {
    switch (status) {
        case TrialStatus::Pass: return "pass";
        case TrialStatus::Fail: return "fail";
        case TrialStatus::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

DilationPlan verification_plan(const ChannelSpec& channel, int cutoff, int modes, EnsembleKind kind) {
    DilationPlan plan = default_plan(channel, cutoff);
    plan.max_deficit = 1.0;
    int cap = 400;
    if (modes > 1 && kind != EnsembleKind::ProductOfOneMode) {
        const double budget = kind == EnsembleKind::RandomDiagonal ? 2e5 : 625.0;
        cap = static_cast<int>(std::floor(std::pow(budget, 1.0 / modes) + 1e-9));
    }
    plan.output_cutoff = std::max(2, std::min(plan.output_cutoff, cap));
    return plan;
}

VerificationReport verify_moe_entanglement_breaking(const ChannelSpec& channel, int n, const EnsembleSpec& ensemble,
                                                    const VerifyOptions& options) {
    channel.validate();
    if (n > 1 && !is_entanglement_breaking(channel))
        throw InvalidParameter("multi-mode thermal-formula check needs an entanglement-breaking channel");
    return run_bound_suite("eb-moe", channel, n, ensemble, options,
                           [&](double s) { return thermal_formula(channel, s); }, false);
}

VerificationReport verify_new_bound(const ChannelSpec& channel, int n, const EnsembleSpec& ensemble,
                                    const VerifyOptions& options) {
    if (!new_bound(channel, 0.0, n).in_domain) throw InvalidParameter("channel is outside the new bound's domain");
    return run_bound_suite("new-bound", channel, n, ensemble, options,
                           [&](double s) { return *new_bound(channel, s, n).value_per_mode; }, true);
}

std::vector<ThermalGridPoint> default_thermal_grid() {
    const std::array<ChannelSpec, 12> channels{
        ChannelSpec::attenuator(0.3, 0.0),    ChannelSpec::attenuator(0.7, 0.5),    ChannelSpec::attenuator(0.5, 1.0),
        ChannelSpec::amplifier(1.5, 0.0),     ChannelSpec::amplifier(1.5, 0.3),     ChannelSpec::amplifier(2.0, 0.5),
        ChannelSpec::contravariant(1.5, 0.0), ChannelSpec::contravariant(1.5, 0.2), ChannelSpec::contravariant(2.0, 0.5),
        ChannelSpec::additive_noise(0.1),     ChannelSpec::additive_noise(0.5),     ChannelSpec::additive_noise(1.0)};
    std::vector<ThermalGridPoint> grid;
    for (const auto& ch : channels)
        for (double N : {0.0, 0.5, 1.0, 2.0}) grid.push_back({ch, N});
    return grid;
}

VerificationReport verify_thermal_formulas(const std::vector<ThermalGridPoint>& grid, int cutoff, double tolerance,
                                           const VerifyOptions& options) {
    VerificationReport report;
    report.suite = "thermal";
    report.trials.resize(grid.size());
    parallel_for(static_cast<int>(grid.size()), resolve_threads(options.threads), [&](int i) {
        const ThermalGridPoint& pt = grid[static_cast<std::size_t>(i)];
        const FockState in = renormalize(thermal_state(pt.mean_photons, cutoff));
        DilationPlan plan = default_plan(pt.channel, cutoff);
        plan.max_deficit = 1.0;
        const FockState out = apply_channel(pt.channel, in, plan);
        TrialRecord& t = report.trials[static_cast<std::size_t>(i)];
        t.index = static_cast<std::uint64_t>(i);
        t.input_entropy = von_neumann_entropy(in);
        t.input_mean_photons = pt.mean_photons;
        t.output_entropy = von_neumann_entropy(out);
        t.bound = thermal_output_entropy(pt.channel, pt.mean_photons);
        t.margin = t.output_entropy - t.bound;
        t.trace_deficit = out.trace_deficit;
        t.slack_used = tolerance;
        t.note = pt.channel.describe() + ", N=" + std::to_string(pt.mean_photons);
        if (std::abs(t.margin) > tolerance) t.status = TrialStatus::Fail;
    });
    summarize(report, tolerance, {});
    report.log.clear();
    return report;
}

nlohmann::ordered_json to_json(const ChannelSpec& spec) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(spec.kind);
    j["eta"] = spec.eta;
    j["kappa"] = spec.kappa;
    j["env_photons"] = spec.env_photons;
    return j;
}

nlohmann::ordered_json to_json(const EnsembleSpec& spec) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(spec.kind);
    j["rank"] = spec.rank;
    j["modes"] = spec.modes;
    j["cutoff"] = spec.cutoff;
    j["trials"] = spec.trials;
    j["seed"] = spec.seed;
    j["max_mean_photons"] = finite_json(spec.max_mean_photons);
    return j;
}

nlohmann::ordered_json to_json(const DilationPlan& plan) {
    nlohmann::ordered_json j;
    j["system_cutoff"] = plan.system_cutoff;
    j["env_cutoff"] = plan.env_cutoff;
    j["output_cutoff"] = plan.output_cutoff;
    j["radial_nodes"] = plan.radial_nodes;
    j["angular_nodes"] = plan.angular_nodes;
    return j;
}

nlohmann::ordered_json to_json(const VerificationReport& report) {
    nlohmann::ordered_json j;
    j["suite"] = report.suite;
    j["channel"] = report.channel ? to_json(*report.channel) : nlohmann::ordered_json(nullptr);
    j["modes"] = report.modes;
    j["ensemble"] = report.ensemble ? to_json(*report.ensemble) : nlohmann::ordered_json(nullptr);
    j["plan"] = report.plan ? to_json(*report.plan) : nlohmann::ordered_json(nullptr);

    const ReportSummary& s = report.summary;
    nlohmann::ordered_json sum;
    sum["trials"] = s.trials;
    sum["passed"] = s.passed;
    sum["failed"] = s.failed;
    sum["inconclusive"] = s.inconclusive;
    sum["min_margin"] = finite_json(s.min_margin);
    sum["max_trace_deficit"] = s.max_trace_deficit;
    sum["slack"] = s.slack;
    sum["ordering_violations"] = s.ordering_violations;
    sum["buckets"] = nlohmann::ordered_json::array();
    for (const auto& b : s.buckets) {
        nlohmann::ordered_json jb;
        jb["s_lo"] = b.s_lo;
        jb["s_hi"] = b.s_hi;
        jb["trials"] = b.trials;
        jb["min_output_entropy"] = b.min_output_entropy;
        jb["min_gap_to_gaussian"] = b.min_gap_to_gaussian;
        sum["buckets"].push_back(jb);
    }
    j["summary"] = sum;

    j["trials"] = nlohmann::ordered_json::array();
    for (const auto& t : report.trials) {
        nlohmann::ordered_json jt;
        jt["index"] = t.index;
        jt["input_entropy"] = t.input_entropy;
        jt["input_mean_photons"] = t.input_mean_photons;
        jt["output_entropy"] = t.output_entropy;
        jt["bound"] = t.bound;
        jt["margin"] = t.margin;
        jt["epi_bound"] = optional_json(t.epi_bound);
        jt["epi_margin"] = optional_json(t.epi_margin);
        jt["trace_deficit"] = t.trace_deficit;
        jt["slack_used"] = t.slack_used;
        jt["status"] = to_string(t.status);
        if (!t.note.empty()) jt["note"] = t.note;
        j["trials"].push_back(jt);
    }
    j["log"] = report.log;
    j["dumps"] = report.dumps;
    return j;
}

std::string content_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

std::string dump_state(const FockState& state, const std::string& directory, const std::string& stem,
                       const nlohmann::ordered_json& metadata) {
    std::filesystem::create_directories(directory);
    const std::filesystem::path bin = std::filesystem::path(directory) / (stem + ".bin");
    std::ofstream out(bin, std::ios::binary);
    if (!out) throw Error("cannot write " + bin.string());
    auto put = [&](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    };
    for (Eigen::Index r = 0; r < state.matrix.rows(); ++r)
        for (Eigen::Index c = 0; c < state.matrix.cols(); ++c) {
            put(state.matrix(r, c).real());
            put(state.matrix(r, c).imag());
        }

    nlohmann::ordered_json side;
    side["format"] = "complex128-le";
    side["order"] = "row-major";
    side["rows"] = state.matrix.rows();
    side["cols"] = state.matrix.cols();
    side["modes"] = state.modes;
    side["cutoff"] = state.cutoff;
    side["trace_deficit"] = state.trace_deficit;
    side["binary"] = bin.filename().string();
    side["metadata"] = metadata;
    std::ofstream(std::filesystem::path(directory) / (stem + ".json")) << side.dump(2) << '\n';
    return bin.string();
}

}  // namespace moe
