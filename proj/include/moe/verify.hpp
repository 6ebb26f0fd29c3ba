#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "moe/bounds.hpp"
#include "moe/channels.hpp"

namespace moe {

enum class EnsembleKind { GinibreMixed, RandomDiagonal, DisplacedThermal, RandomPure, ProductOfOneMode, EntangledBipartite };

std::string to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(const std::string& name);

/// Random input states. `rank` applies to GinibreMixed (0 draws a rank per
/// trial) and is the ancilla dimension for EntangledBipartite (0: random).
/// When max_mean_photons is finite, samples whose mean photon number per
/// mode exceeds it are damped by a photon-number filter down to a random
/// level in [cap/2, cap].
struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::GinibreMixed;
    int rank = 0;
    int modes = 1;
    int cutoff = 12;
    int trials = 100;
    std::uint64_t seed = 42;
    double max_mean_photons = std::numeric_limits<double>::infinity();

    void validate() const;
};

/// Independent generator for one trial, derived from (seed, index) only.
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t index);

/// D(z) omega_N D(z)^dag restricted to `cutoff` levels (not renormalized);
/// the mass beyond the cutoff is reported in trace_deficit.
FockState displaced_thermal(double mean_photons, Complex z, int cutoff);

/// Factors of a ProductOfOneMode sample (empty for other kinds).
std::vector<FockState> sample_factors(const EnsembleSpec& spec, std::uint64_t index);

FockState sample_state(const EnsembleSpec& spec, std::uint64_t index);

struct TruncationDiagnostics {
    double input_deficit = 0.0;
    double trace_deficit = 0.0;  ///< of the output, input deficit included
    double tail_mean_photons = 0.0;  ///< sum of k p_k over levels k >= D_o/2, per mode
    int recommended_input_cutoff = 0;
    int recommended_output_cutoff = 0;
    bool cutoff_too_small = false;
    double slack = 0.0;
};

/// Slack allowed for a measured output deficit: max(1e-4, 10 delta ln(D_o^n)).
double truncation_slack(double trace_deficit, int output_cutoff, int modes);

/// Runs the channel on `state` and reports how much the truncation cost.
TruncationDiagnostics truncation_diagnostics(const FockState& state, const ChannelSpec& channel,
                                             const DilationPlan& plan, double target_deficit = 1e-6);

enum class TrialStatus { Pass, Fail, Inconclusive };

std::string to_string(TrialStatus status);

struct TrialRecord {
    std::uint64_t index = 0;
    double input_entropy = 0.0;  ///< per mode
    double input_mean_photons = 0.0;  ///< per mode
    double output_entropy = 0.0;  ///< per mode
    double bound = 0.0;  ///< per mode
    double margin = 0.0;
    std::optional<double> epi_bound;
    std::optional<double> epi_margin;
    double trace_deficit = 0.0;
    double slack_used = 0.0;
    TrialStatus status = TrialStatus::Pass;
    std::string note;
};

struct EntropyBucket {
    double s_lo = 0.0;
    double s_hi = 0.0;
    int trials = 0;
    double min_output_entropy = 0.0;
    /// min over the bucket of output - gaussian_conjecture_value(S).
    double min_gap_to_gaussian = 0.0;
};

struct ReportSummary {
    int trials = 0;
    int passed = 0;
    int failed = 0;
    int inconclusive = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    double max_trace_deficit = 0.0;
    double slack = 0.0;
    /// Trials with S > 0.1 whose primary margin exceeds the EPI margin.
    int ordering_violations = 0;
    std::vector<EntropyBucket> buckets;
};

struct VerificationReport {
    std::string suite;
    std::optional<ChannelSpec> channel;
    int modes = 1;
    std::optional<EnsembleSpec> ensemble;
    std::optional<DilationPlan> plan;
    std::vector<TrialRecord> trials;
    ReportSummary summary;
    std::vector<std::string> log;
    std::vector<std::string> dumps;

    bool ok() const { return summary.failed == 0; }
};

struct VerifyOptions {
    /// Allowed violation; a trial whose own truncation slack exceeds it is
    /// inconclusive.
    double slack = 1e-3;
    /// Dilation plan; when absent, verification_plan() is used.
    std::optional<DilationPlan> plan;
    /// Worker threads; 0 reads MOE_THREADS (default 1).
    int threads = 0;
    /// Where failing inputs are dumped; empty disables dumps.
    std::string dump_dir;
};

/// default_plan with the output cutoff capped so the output stays tractable:
/// D_o <= 400 for one-mode outputs (n = 1 or product inputs), D_o^n <= 2e5
/// for diagonal inputs (populations only) and D_o^n <= 625 otherwise.
DilationPlan verification_plan(const ChannelSpec& channel, int cutoff, int modes,
                               EnsembleKind kind = EnsembleKind::GinibreMixed);

/// Output entropy per mode >= thermal_formula(S/n) - slack on every trial.
/// Licensed for n > 1 only when the channel is entanglement breaking.
VerificationReport verify_moe_entanglement_breaking(const ChannelSpec& channel, int n, const EnsembleSpec& ensemble,
                                                    const VerifyOptions& options = {});

/// Output entropy per mode >= new_bound(S/n) - slack; EPI margins recorded.
VerificationReport verify_new_bound(const ChannelSpec& channel, int n, const EnsembleSpec& ensemble,
                                    const VerifyOptions& options = {});

struct ThermalGridPoint {
    ChannelSpec channel;
    double mean_photons = 0.0;
};

/// 12 points per channel family: three parameter settings times N in {0, 0.5, 1, 2}.
std::vector<ThermalGridPoint> default_thermal_grid();

/// |S(channel(omega_N)) - closed form| <= tolerance at one mode, cutoff D.
VerificationReport verify_thermal_formulas(const std::vector<ThermalGridPoint>& grid, int cutoff = 40,
                                           double tolerance = 1e-4, const VerifyOptions& options = {});

nlohmann::ordered_json to_json(const ChannelSpec& spec);
nlohmann::ordered_json to_json(const EnsembleSpec& spec);
nlohmann::ordered_json to_json(const DilationPlan& plan);
nlohmann::ordered_json to_json(const VerificationReport& report);

/// FNV-1a 64 of a string, as 16 hex digits.
std::string content_hash(const std::string& text);

/// Writes matrix as little-endian complex128, row-major, plus a JSON sidecar.
/// Returns the path of the binary file.
std::string dump_state(const FockState& state, const std::string& directory, const std::string& stem,
                       const nlohmann::ordered_json& metadata);

}  // namespace moe
