#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "moe/verify.hpp"
#include "test_support.hpp"

using namespace moe;

namespace {

EnsembleSpec ensemble(EnsembleKind kind, int modes, int cutoff, int trials, std::uint64_t seed = 7) {
    EnsembleSpec e;
    e.kind = kind;
    e.modes = modes;
    e.cutoff = cutoff;
    e.trials = trials;
    e.seed = seed;
    return e;
}

}  // namespace

TEST_CASE("sampler examples") {
    for (std::uint64_t i = 0; i < 5; ++i) {
        const FockState pure = sample_state(ensemble(EnsembleKind::RandomPure, 1, 12, 1), i);
        CHECK(std::abs(von_neumann_entropy(pure)) < 1e-10);
        CHECK(std::abs(pure.trace() - 1.0) < 1e-12);
    }

    EnsembleSpec full = ensemble(EnsembleKind::GinibreMixed, 1, 10, 1);
    full.rank = 10;
    double mean = 0.0;
    for (std::uint64_t i = 0; i < 20; ++i) mean += von_neumann_entropy(sample_state(full, i)) / 20;
    CHECK(mean > 0.0);

    const FockState dt = displaced_thermal(1.0, Complex(0.0, 0.0), 40);
    CHECK(std::abs(von_neumann_entropy(renormalize(dt)) - g(1.0)) < 1e-6);
    CHECK(std::abs(dt.trace_deficit - std::pow(0.5, 40)) < 1e-15);

    // Coherent state |z>: populations are Poissonian with mean |z|^2.
    const FockState coh = displaced_thermal(0.0, Complex(1.2, -0.5), 30);
    const double n = std::norm(Complex(1.2, -0.5));
    for (int k = 0; k < 10; ++k)
        CHECK(std::abs(coh.matrix(k, k).real() - std::exp(-n + k * std::log(n) - std::lgamma(k + 1.0))) < 1e-12);
    CHECK(std::abs(mean_photons(renormalize(coh)).total - n) < 1e-10);
}

TEST_CASE("every ensemble yields valid states with a small tail") {
    for (EnsembleKind k : {EnsembleKind::GinibreMixed, EnsembleKind::RandomDiagonal, EnsembleKind::DisplacedThermal,
                           EnsembleKind::RandomPure, EnsembleKind::ProductOfOneMode, EnsembleKind::EntangledBipartite}) {
        CAPTURE(to_string(k));
        const EnsembleSpec e = ensemble(k, 2, 6, 8);
        for (std::uint64_t i = 0; i < 8; ++i) {
            const FockState s = sample_state(e, i);
            CHECK(s.modes == 2);
            CHECK(std::abs(s.trace() - 1.0) < 1e-12);
            CHECK(testing::min_eigenvalue(s) > -1e-12);
            CHECK((s.matrix - s.matrix.adjoint()).norm() < 1e-12);
        }
        CHECK(ensemble_kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS(ensemble_kind_from_string("nope"), InvalidParameter);
}

TEST_CASE("product samples are products of their factors") {
    const EnsembleSpec e = ensemble(EnsembleKind::ProductOfOneMode, 2, 5, 3);
    for (std::uint64_t i = 0; i < 3; ++i) {
        const auto f = sample_factors(e, i);
        REQUIRE(f.size() == 2);
        CHECK((tensor(f[0], f[1]).matrix - sample_state(e, i).matrix).norm() < 1e-14);
    }
    CHECK(sample_factors(ensemble(EnsembleKind::GinibreMixed, 2, 5, 3), 0).empty());
}

TEST_CASE("energy cap damps to within [cap/2, cap]") {
    EnsembleSpec e = ensemble(EnsembleKind::GinibreMixed, 2, 10, 1);
    e.max_mean_photons = 0.3;
    for (std::uint64_t i = 0; i < 10; ++i) {
        const double m = mean_photons(sample_state(e, i)).per_mode();
        CHECK(m <= 0.3 + 1e-9);
        CHECK(m >= 0.15 - 1e-9);
    }
    e.kind = EnsembleKind::ProductOfOneMode;
    for (std::uint64_t i = 0; i < 5; ++i)
        for (const auto& f : sample_factors(e, i)) CHECK(mean_photons(f).total <= 0.3 + 1e-9);
}

TEST_CASE("sampling is deterministic per (seed, index)") {
    const EnsembleSpec e = ensemble(EnsembleKind::GinibreMixed, 1, 8, 1, 123);
    CHECK((sample_state(e, 4).matrix - sample_state(e, 4).matrix).norm() == 0.0);
    CHECK((sample_state(e, 4).matrix - sample_state(e, 5).matrix).norm() > 0.0);
    EnsembleSpec other = e;
    other.seed = 124;
    CHECK((sample_state(e, 4).matrix - sample_state(other, 4).matrix).norm() > 0.0);

    auto a = trial_rng(1, 2);
    auto b = trial_rng(1, 2);
    CHECK(a() == b());
}

TEST_CASE("ensemble validation") {
    EnsembleSpec e;
    e.trials = 0;
    CHECK_THROWS_AS(e.validate(), InvalidParameter);
    e = EnsembleSpec{};
    e.cutoff = 3;
    e.rank = 4;
    CHECK_THROWS_AS(e.validate(), InvalidParameter);
    e = ensemble(EnsembleKind::EntangledBipartite, 1, 5, 1);
    CHECK_THROWS_AS(e.validate(), InvalidParameter);
}

TEST_CASE("diagonal inputs: population path equals the general path") {
    std::mt19937_64 rng(5);
    const ChannelSpec ch = ChannelSpec::amplifier(1.5, 0.3);
    DilationPlan plan = default_plan(ch, 6);
    plan.output_cutoff = 14;
    plan.max_deficit = 1.0;
    const FockState diag = sample_state(ensemble(EnsembleKind::RandomDiagonal, 2, 6, 1), 0);
    const FockState fast = apply_tensor_power(ch, diag, 2, plan);
    // Same populations, plus a negligible off-diagonal perturbation, go through the general path.
    FockState slow_in = diag;
    slow_in.matrix(0, 1) = slow_in.matrix(1, 0) = Complex(1e-300, 0.0);
    const FockState slow = apply_tensor_power(ch, slow_in, 2, plan);
    CHECK((fast.matrix - slow.matrix).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(std::abs(fast.trace_deficit - slow.trace_deficit) < 1e-13);
}

TEST_CASE("truncation diagnostics examples") {
    const DilationPlan p = default_plan(ChannelSpec::attenuator(0.5), 10);
    const auto vac = truncation_diagnostics(FockState::vacuum(10), ChannelSpec::attenuator(0.5), p);
    CHECK(vac.trace_deficit <= 1e-12);
    CHECK_FALSE(vac.cutoff_too_small);
    CHECK(vac.slack == 1e-4);

    const ChannelSpec id = ChannelSpec::attenuator(1.0);
    const auto hot = truncation_diagnostics(thermal_state(4.0, 10), id, default_plan(id, 10));
    CHECK(std::abs(hot.trace_deficit - std::pow(0.8, 10)) < 1e-12);
    CHECK(std::abs(hot.input_deficit - 0.107374) < 1e-6);
    CHECK(hot.cutoff_too_small);
    // Geometric tail: (4/5)^D <= 1e-6 needs D >= 62.
    CHECK(hot.recommended_input_cutoff >= 62);
    CHECK(hot.recommended_input_cutoff <= 64);

    const ChannelSpec amp = ChannelSpec::amplifier(2.0);
    DilationPlan ap = default_plan(amp, 40);
    ap.output_cutoff = 90;
    const auto a = truncation_diagnostics(renormalize(thermal_state(1.0, 40)), amp, ap);
    CHECK(a.trace_deficit <= 1e-6);
    CHECK_FALSE(a.cutoff_too_small);
    CHECK(a.tail_mean_photons < 1e-3);

    ap.output_cutoff = 30;
    const auto small = truncation_diagnostics(renormalize(thermal_state(1.0, 40)), amp, ap);
    CHECK(small.cutoff_too_small);
    CHECK(small.recommended_output_cutoff > 30);
    CHECK(small.slack > 1e-4);
}

TEST_CASE("truncation slack formula") {
    CHECK(truncation_slack(0.0, 20, 2) == 1e-4);
    CHECK(std::abs(truncation_slack(1e-4, 20, 2) - 10 * 1e-4 * std::log(400.0)) < 1e-15);
}

TEST_CASE("thermal product input is the equality case") {
    // omega_N (x) omega_N through an EB attenuator: margin ~ 0.
    const ChannelSpec ch = ChannelSpec::attenuator(0.3, 1.0);
    const FockState w = renormalize(thermal_state(0.4, 12));
    const FockState in = tensor(w, w);
    DilationPlan plan = verification_plan(ch, 12, 2);
    const FockState out = apply_tensor_power(ch, in, 2, plan);
    const double s = von_neumann_entropy(in) / 2;
    CHECK(std::abs(von_neumann_entropy(out) / 2 - thermal_formula(ch, s)) < 1e-3);
}

TEST_CASE("one-mode verifications do not fail on proven ground") {
    for (const ChannelSpec& ch : {ChannelSpec::attenuator(0.5, 0.0), ChannelSpec::amplifier(1.5, 0.2),
                                  ChannelSpec::contravariant(1.5, 0.0), ChannelSpec::additive_noise(0.5)}) {
        CAPTURE(ch.describe());
        EnsembleSpec e = ensemble(EnsembleKind::GinibreMixed, 1, 12, 60);
        const auto r = verify_moe_entanglement_breaking(ch, 1, e);
        CHECK(r.summary.failed == 0);
        CHECK(r.summary.inconclusive == 0);
        CHECK(r.summary.min_margin >= -1e-3);
        CHECK(r.trials.size() == 60);
        int bucketed = 0;
        for (const auto& b : r.summary.buckets) bucketed += b.trials;
        CHECK(bucketed == 60);
    }
}

TEST_CASE("multi-mode check requires an entanglement-breaking channel") {
    const EnsembleSpec e = ensemble(EnsembleKind::EntangledBipartite, 2, 4, 2);
    CHECK_THROWS_AS(verify_moe_entanglement_breaking(ChannelSpec::attenuator(0.5, 0.0), 2, e), InvalidParameter);
    CHECK_THROWS_AS(verify_new_bound(ChannelSpec::contravariant(1.5), 1, ensemble(EnsembleKind::GinibreMixed, 1, 4, 2)),
                    InvalidParameter);
    CHECK_THROWS_AS(verify_new_bound(ChannelSpec::attenuator(1.0), 1, ensemble(EnsembleKind::GinibreMixed, 1, 4, 2)),
                    DegenerateParameter);
}

TEST_CASE("new bound at two modes with entangled inputs") {
    const ChannelSpec ch = ChannelSpec::attenuator(0.5, 0.0);
    VerifyOptions opt;
    opt.slack = 2e-3;
    for (EnsembleKind k : {EnsembleKind::EntangledBipartite, EnsembleKind::ProductOfOneMode, EnsembleKind::GinibreMixed}) {
        const auto r = verify_new_bound(ch, 2, ensemble(k, 2, 12, 10), opt);
        CHECK(r.summary.failed == 0);
        CHECK(r.summary.inconclusive == 0);
        CHECK(r.summary.min_margin >= -2e-3);
        CHECK(r.summary.ordering_violations == 0);
        for (const auto& t : r.trials) {
            REQUIRE(t.epi_margin);
            CHECK(t.margin <= *t.epi_margin + 1e-12);
        }
    }
}

TEST_CASE("thread count does not change the report") {
    const ChannelSpec ch = ChannelSpec::contravariant(1.5, 0.0);
    const EnsembleSpec e = ensemble(EnsembleKind::EntangledBipartite, 2, 4, 12);
    VerifyOptions one;
    one.threads = 1;
    VerifyOptions three;
    three.threads = 3;
    const std::string a = to_json(verify_moe_entanglement_breaking(ch, 2, e, one)).dump();
    const std::string b = to_json(verify_moe_entanglement_breaking(ch, 2, e, three)).dump();
    CHECK(a == b);
    CHECK(content_hash(a) == content_hash(b));
}

TEST_CASE("thermal formula grid") {
    const auto grid = default_thermal_grid();
    CHECK(grid.size() == 48);
    const auto r = verify_thermal_formulas(grid);
    CHECK(r.summary.failed == 0);
    for (const auto& t : r.trials) CHECK(std::abs(t.margin) <= 1e-4);

    const std::vector<ThermalGridPoint> examples{{ChannelSpec::attenuator(0.7, 0.5), 1.0},
                                                 {ChannelSpec::amplifier(1.5, 0.3), 0.0},
                                                 {ChannelSpec::additive_noise(0.5), 0.0}};
    const auto ex = verify_thermal_formulas(examples);
    CHECK(std::abs(ex.trials[0].bound - g(0.85)) < 1e-12);
    CHECK(std::abs(ex.trials[1].bound - g(0.65)) < 1e-12);
    CHECK(std::abs(ex.trials[2].bound - g(0.5)) < 1e-12);
    CHECK(ex.ok());
}

TEST_CASE("content hash") {
    // FNV-1a 64 reference values.
    CHECK(content_hash("") == "cbf29ce484222325");
    CHECK(content_hash("a") == "af63dc4c8601ec8c");
    CHECK(content_hash("foobar") == "85944171f73967e8");
}

TEST_CASE("report JSON and state dumps") {
    const auto r = verify_new_bound(ChannelSpec::attenuator(0.1), 1, ensemble(EnsembleKind::GinibreMixed, 1, 6, 3));
    const auto j = to_json(r);
    CHECK(j["suite"] == "new-bound");
    CHECK(j["channel"]["kind"] == to_string(ChannelKind::Attenuator));
    CHECK(j["trials"].size() == 3);
    CHECK(j["summary"]["failed"] == 0);
    CHECK(j.begin().key() == "suite");
    CHECK(j["trials"][0]["epi_bound"].is_number());

    const auto dir = std::filesystem::temp_directory_path() / "moe_dump_test";
    std::filesystem::remove_all(dir);
    Eigen::MatrixXcd m(2, 2);
    m << Complex(0.75, 0), Complex(0, 0.25), Complex(0, -0.25), Complex(0.25, 0);
    const FockState s = FockState::from_matrix(m, 1, 2);
    nlohmann::ordered_json meta;
    meta["why"] = "test";
    const std::string bin = dump_state(s, dir.string(), "state", meta);
    std::ifstream in(bin, std::ios::binary);
    std::vector<double> values(8);
    in.read(reinterpret_cast<char*>(values.data()), 64);
    REQUIRE(in.gcount() == 64);
    CHECK(values[0] == 0.75);
    CHECK(values[3] == 0.25);  // imag of (0, 1)
    CHECK(values[5] == -0.25);  // imag of (1, 0)
    const auto side = nlohmann::json::parse(std::ifstream(dir / "state.json"));
    CHECK(side["rows"] == 2);
    CHECK(side["metadata"]["why"] == "test");
    std::filesystem::remove_all(dir);
}
