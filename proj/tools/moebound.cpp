// moebound: evaluate output-entropy bounds, emit figure data and run the
// verification suites.

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "moe/bounds.hpp"
#include "moe/regions.hpp"
#include "moe/verify.hpp"

using namespace moe;
using Json = nlohmann::ordered_json;

namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
    if (std::isnan(v)) return "";
    // Shortest representation that round-trips.
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    return Json::parse(in);
}

ChannelSpec make_channel(const std::string& kind, double eta, double kappa, double env) {
    if (kind == "attenuator") return ChannelSpec::attenuator(eta, env);
    if (kind == "amplifier") return ChannelSpec::amplifier(kappa, env);
    if (kind == "contravariant") return ChannelSpec::contravariant(kappa, env);
    if (kind == "additive-noise") return ChannelSpec::additive_noise(env);
    throw InvalidParameter("unknown channel '" + kind + "'");
}

// ---------------------------------------------------------------- bound

struct BoundConfig {
    double attenuator = kUnset;
    double amplifier = kUnset;
    double contravariant = kUnset;
    bool additive_noise = false;
    double env = 0.0;
    double entropy = 0.0;
    int modes = 1;
};

int run_bound(const BoundConfig& c) {
    const int picked = !std::isnan(c.attenuator) + !std::isnan(c.amplifier) + !std::isnan(c.contravariant) +
                       static_cast<int>(c.additive_noise);
    if (picked != 1)
        throw InvalidParameter("pick exactly one of --attenuator, --amplifier, --contravariant, --additive-noise");
    const ChannelSpec ch = !std::isnan(c.attenuator)      ? ChannelSpec::attenuator(c.attenuator, c.env)
                           : !std::isnan(c.amplifier)     ? ChannelSpec::amplifier(c.amplifier, c.env)
                           : !std::isnan(c.contravariant) ? ChannelSpec::contravariant(c.contravariant, c.env)
                                                          : ChannelSpec::additive_noise(c.env);
    ch.validate();

    Json cfg;
    cfg["command"] = "bound";
    cfg["channel"] = to_json(ch);
    cfg["entropy"] = c.entropy;
    cfg["modes"] = c.modes;
    std::cout << "config " << cfg.dump() << '\n';

    for (const BoundValue& b : bound_set(ch, c.entropy, c.modes)) {
        std::cout << to_string(b.kind) << ' ';
        if (b.value_per_mode)
            std::cout << short_num(*b.value_per_mode);
        else
            std::cout << "n/a";
        if (b.kind == BoundKind::NewBound) std::cout << (b.in_domain ? " (in domain)" : " (out of domain)");
        std::cout << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------- figure

struct FigureConfig {
    std::string name;
    std::vector<double> eta;
    double energy = kUnset;
    int samples = 0;
    std::string family = "cqg";
    std::string format = "csv";

    void resolve() {
        if (name == "epni") {
            if (eta.empty()) eta = {0.1, 0.2};
            if (std::isnan(energy)) energy = 0.0;
            if (samples == 0) samples = 601;
        } else {
            if (eta.empty()) eta = {0.9};
            if (std::isnan(energy)) energy = 4.0;
            if (samples == 0) samples = name == "broadcast" ? 512 : 256;
        }
        if (samples < 2) throw InvalidParameter("--samples must be at least 2");
    }

    Json to_json() const {
        Json j;
        j["command"] = "figure";
        j["name"] = name;
        j["eta"] = eta;
        j["energy"] = energy;
        j["samples"] = samples;
        if (name == "tradeoff") j["family"] = family;
        j["format"] = format;
        return j;
    }

    static FigureConfig from_json(const Json& j) {
        FigureConfig c;
        c.name = j.at("name").get<std::string>();
        c.eta = j.at("eta").get<std::vector<double>>();
        c.energy = j.at("energy").get<double>();
        c.samples = j.at("samples").get<int>();
        c.family = j.value("family", std::string("cqg"));
        c.format = j.value("format", std::string("csv"));
        return c;
    }
};

struct NamedCurve {
    std::string curve;
    double eta;
    double energy;
    std::string formula_id;
    std::vector<CurvePoint> points;
};

std::vector<NamedCurve> figure_curves(const FigureConfig& c) {
    std::vector<NamedCurve> out;
    if (c.name == "epni") {
        constexpr double s_max = 6.0;
        for (double eta : c.eta) {
            const ChannelSpec ch = ChannelSpec::attenuator(eta, c.energy);
            for (BoundKind kind : {BoundKind::GaussianConjecture, BoundKind::NewBound, BoundKind::EPI}) {
                NamedCurve nc{to_string(kind), eta, c.energy, "epni/" + to_string(kind), {}};
                for (int i = 0; i < c.samples; ++i) {
                    const double s = s_max * i / (c.samples - 1);
                    const BoundValue b = bound_set(ch, s)[kind == BoundKind::EPI ? 0 : kind == BoundKind::NewBound ? 1 : 2];
                    nc.points.push_back({s, b.value_per_mode.value_or(kUnset), kUnset});
                }
                out.push_back(std::move(nc));
            }
        }
        return out;
    }
    const double eta = c.eta.front();
    auto push = [&](const RegionCurve& r) {
        out.push_back({to_string(r.kind), r.eta, r.energy, r.formula_id, r.points});
    };
    if (c.name == "broadcast") {
        push(broadcast_time_sharing(eta, c.energy, c.samples));
        push(broadcast_achievable(eta, c.energy, c.samples));
        push(broadcast_outer(eta, c.energy, CurveKind::OuterNew, c.samples));
        push(broadcast_outer(eta, c.energy, CurveKind::OuterEPI, c.samples));
        return out;
    }
    if (c.name == "tradeoff") {
        const TradeoffFamily fam = c.family == "cpk" ? TradeoffFamily::CPK : TradeoffFamily::CQG;
        for (CurveKind k : {CurveKind::TimeSharing, CurveKind::Achievable, CurveKind::OuterNew, CurveKind::OuterEPI})
            push(project_cq_plane(fam, k, eta, c.energy, c.samples));
        return out;
    }
    throw InvalidParameter("unknown figure '" + c.name + "'");
}

std::string curves_csv(const std::vector<NamedCurve>& curves) {
    std::ostringstream os;
    os << "x,y,curve,eta,E,beta,units\n";
    for (const auto& nc : curves)
        for (const auto& p : nc.points)
            os << num(p.x) << ',' << num(p.y) << ',' << nc.curve << ',' << num(nc.eta) << ',' << num(nc.energy) << ','
               << num(p.beta) << ",nats\n";
    return os.str();
}

std::string curves_json(const FigureConfig& c, const std::vector<NamedCurve>& curves) {
    Json j;
    j["config"] = c.to_json();
    j["units"] = "nats";
    j["curves"] = Json::array();
    for (const auto& nc : curves) {
        Json jc;
        jc["curve"] = nc.curve;
        jc["eta"] = nc.eta;
        jc["E"] = nc.energy;
        jc["formula_id"] = nc.formula_id;
        jc["points"] = Json::array();
        for (const auto& p : nc.points)
            jc["points"].push_back(Json::array({p.x, std::isnan(p.y) ? Json(nullptr) : Json(p.y),
                                                std::isnan(p.beta) ? Json(nullptr) : Json(p.beta)}));
        j["curves"].push_back(jc);
    }
    return j.dump(1) + '\n';
}

std::string gnuplot_script(const FigureConfig& c, const std::vector<NamedCurve>& curves, const std::string& data) {
    std::ostringstream os;
    os << "set datafile separator ','\n";
    os << "set key outside\n";
    if (c.name == "epni") {
        os << "set xlabel 'input entropy per mode (nats)'\nset ylabel 'output entropy per mode (nats)'\n";
    } else if (c.name == "broadcast") {
        os << "set xlabel 'R_A (nats)'\nset ylabel 'R_B (nats)'\n";
    } else {
        os << "set xlabel 'C (nats)'\nset ylabel 'Q (nats)'\n";
    }
    os << "plot ";
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& nc = curves[i];
        os << (i ? ", \\\n     " : "") << "'" << data << "' skip 1 using 1:(strcol(3) eq '" << nc.curve
           << "' && abs($4 - " << num(nc.eta) << ") < 1e-12 ? $2 : 1/0) with lines title '" << nc.curve
           << " eta=" << num(nc.eta) << "'";
    }
    os << '\n';
    return os.str();
}

int run_figure(FigureConfig c, const std::string& output, const std::string& gnuplot) {
    c.resolve();
    std::cerr << "config " << c.to_json().dump() << '\n';
    const auto curves = figure_curves(c);
    const std::string text = c.format == "json" ? curves_json(c, curves) : curves_csv(curves);
    write_text(output, text);
    if (!gnuplot.empty()) {
        if (output.empty() || output == "-") throw InvalidParameter("--gnuplot needs --output");
        write_text(gnuplot, gnuplot_script(c, curves, output));
    }
    std::cerr << "hash " << content_hash(text) << '\n';
    return 0;
}

// ---------------------------------------------------------------- verify

struct VerifyConfig {
    std::string suite;
    std::string channel;
    double eta = kUnset;
    double kappa = kUnset;
    double env = 0.0;
    int modes = 1;
    int cutoff = 0;
    std::string ensemble;
    int trials = 50;
    std::uint64_t seed = 42;
    double slack = 1e-3;

    void resolve() {
        if (channel.empty()) channel = suite == "new-bound" ? "attenuator" : "contravariant";
        if (std::isnan(eta)) eta = 0.5;
        if (std::isnan(kappa)) kappa = 1.5;
        if (cutoff == 0) cutoff = suite == "thermal" ? 40 : modes == 1 ? 40 : 10;
        if (ensemble.empty()) ensemble = modes == 1 ? "ginibre" : "entangled";
        if (trials < 1) throw InvalidParameter("--trials must be positive");
        if (modes < 1 || modes > 2) throw InvalidParameter("--modes must be 1 or 2");
        if (!(slack > 0.0)) throw InvalidParameter("--slack must be positive");
        if (suite == "eb-moe" || suite == "new-bound") make_channel(channel, eta, kappa, env).validate();
        (void)ensemble_kind_from_string(ensemble);
    }

    Json to_json() const {
        Json j;
        j["command"] = "verify";
        j["suite"] = suite;
        j["channel"] = channel;
        j["eta"] = eta;
        j["kappa"] = kappa;
        j["env"] = env;
        j["modes"] = modes;
        j["cutoff"] = cutoff;
        j["ensemble"] = ensemble;
        j["trials"] = trials;
        j["seed"] = seed;
        j["slack"] = slack;
        return j;
    }

    static VerifyConfig from_json(const Json& j) {
        VerifyConfig c;
        c.suite = j.at("suite").get<std::string>();
        c.channel = j.at("channel").get<std::string>();
        c.eta = j.at("eta").get<double>();
        c.kappa = j.at("kappa").get<double>();
        c.env = j.at("env").get<double>();
        c.modes = j.at("modes").get<int>();
        c.cutoff = j.at("cutoff").get<int>();
        c.ensemble = j.at("ensemble").get<std::string>();
        c.trials = j.at("trials").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.slack = j.at("slack").get<double>();
        return c;
    }
};

EnsembleSpec ensemble_for(const VerifyConfig& c, EnsembleKind kind, int modes, int cutoff) {
    EnsembleSpec e;
    e.kind = kind;
    e.modes = modes;
    e.cutoff = cutoff;
    e.trials = c.trials;
    e.seed = c.seed;
    return e;
}

std::vector<ThermalGridPoint> thermal_subset(int count) {
    const auto grid = default_thermal_grid();
    if (count >= static_cast<int>(grid.size())) return grid;
    std::vector<ThermalGridPoint> out;
    for (int i = 0; i < count; ++i) out.push_back(grid[static_cast<std::size_t>(i) * grid.size() / count]);
    return out;
}

std::vector<VerificationReport> run_suites(const VerifyConfig& c, const VerifyOptions& opt) {
    std::vector<VerificationReport> reports;
    const EnsembleKind kind = ensemble_kind_from_string(c.ensemble);
    if (c.suite == "thermal") {
        reports.push_back(verify_thermal_formulas(thermal_subset(c.trials), c.cutoff, 1e-4, opt));
    } else if (c.suite == "eb-moe") {
        const ChannelSpec ch = make_channel(c.channel, c.eta, c.kappa, c.env);
        reports.push_back(verify_moe_entanglement_breaking(ch, c.modes, ensemble_for(c, kind, c.modes, c.cutoff), opt));
    } else if (c.suite == "new-bound") {
        const ChannelSpec ch = make_channel(c.channel, c.eta, c.kappa, c.env);
        reports.push_back(verify_new_bound(ch, c.modes, ensemble_for(c, kind, c.modes, c.cutoff), opt));
    } else if (c.suite == "all") {
        // Fixed smoke configuration; only seed, trials and slack are taken from the flags.
        reports.push_back(verify_thermal_formulas(default_thermal_grid(), 40, 1e-4, opt));
        for (const ChannelSpec& ch : {ChannelSpec::attenuator(0.5, 0.5), ChannelSpec::amplifier(1.5, 0.2),
                                      ChannelSpec::contravariant(1.5, 0.0), ChannelSpec::additive_noise(0.5)})
            reports.push_back(
                verify_moe_entanglement_breaking(ch, 1, ensemble_for(c, EnsembleKind::GinibreMixed, 1, 20), opt));
        reports.push_back(verify_moe_entanglement_breaking(
            ChannelSpec::contravariant(1.5, 0.0), 2, ensemble_for(c, EnsembleKind::EntangledBipartite, 2, 6), opt));
        reports.push_back(
            verify_new_bound(ChannelSpec::attenuator(0.5, 0.0), 1, ensemble_for(c, EnsembleKind::GinibreMixed, 1, 40), opt));
    } else {
        throw InvalidParameter("unknown suite '" + c.suite + "'");
    }
    return reports;
}

int run_verify(VerifyConfig c, const std::string& output, const std::string& dump_dir, int threads) {
    c.resolve();
    const Json cfg = c.to_json();
    std::cout << "config " << cfg.dump() << '\n';

    VerifyOptions opt;
    opt.slack = c.slack;
    opt.threads = threads;
    opt.dump_dir = dump_dir;
    const auto reports = run_suites(c, opt);

    Json doc;
    doc["config"] = cfg;
    doc["reports"] = Json::array();
    bool failed = false;
    for (const auto& r : reports) {
        doc["reports"].push_back(to_json(r));
        const ReportSummary& s = r.summary;
        std::cout << r.suite;
        if (r.channel) std::cout << ' ' << r.channel->describe() << " n=" << r.modes;
        std::cout << ": " << s.passed << '/' << s.trials << " pass, " << s.failed << " fail, " << s.inconclusive
                  << " inconclusive";
        if (std::isfinite(s.min_margin)) std::cout << ", min margin " << num(s.min_margin);
        std::cout << '\n';
        for (const auto& path : r.dumps) std::cout << "  dump " << path << '\n';
        failed = failed || !r.ok();
    }
    const std::string text = doc.dump(1) + '\n';
    if (!output.empty()) write_text(output, text);
    std::cout << "report hash " << content_hash(text) << '\n';
    if (failed) {
        std::cout << "FAILED: bound violated beyond the truncation slack\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Output-entropy bounds for Gaussian channels: evaluation, figure data and verification"};
    app.require_subcommand(1);

    BoundConfig bc;
    auto* bound = app.add_subcommand("bound", "Print EPI, new and Gaussian-conjecture values per mode");
    bound->add_option("--attenuator", bc.attenuator, "Attenuator transmissivity eta");
    bound->add_option("--amplifier", bc.amplifier, "Amplifier gain kappa");
    bound->add_option("--contravariant", bc.contravariant, "Phase-contravariant gain kappa");
    bound->add_flag("--additive-noise", bc.additive_noise, "Additive-noise channel with variance --env");
    bound->add_option("--env", bc.env, "Environment mean photon number E")->capture_default_str();
    bound->add_option("--entropy", bc.entropy, "Input entropy per mode, nats")->required();
    bound->add_option("--modes", bc.modes, "Number of modes n")->capture_default_str()->check(CLI::PositiveNumber);

    FigureConfig fc;
    std::string fig_output;
    std::string fig_gnuplot;
    std::string fig_config;
    auto* figure = app.add_subcommand("figure", "Emit curve data (CSV or JSON)");
    figure->add_option("name", fc.name, "epni, broadcast or tradeoff")
        ->check(CLI::IsMember({"epni", "broadcast", "tradeoff"}));
    figure->add_option("--eta", fc.eta, "Transmissivity (repeatable for epni)");
    figure->add_option("--energy", fc.energy, "Environment photons (epni) or input energy (regions)");
    figure->add_option("--samples", fc.samples, "Points per curve");
    figure->add_option("--family", fc.family, "Trade-off family")->check(CLI::IsMember({"cqg", "cpk"}))->capture_default_str();
    figure->add_option("--format", fc.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    figure->add_option("-o,--output", fig_output, "Output file (default stdout)");
    figure->add_option("--gnuplot", fig_gnuplot, "Also write a gnuplot script for the CSV output");
    figure->add_option("--config", fig_config, "Rerun from a config echo (JSON)");

    VerifyConfig vc;
    std::string ver_output;
    std::string ver_config;
    std::string dump_dir = "moe-dumps";
    int threads = 0;
    auto* verify = app.add_subcommand("verify", "Run verification suites");
    verify->add_option("suite", vc.suite, "eb-moe, new-bound, thermal or all")
        ->check(CLI::IsMember({"eb-moe", "new-bound", "thermal", "all"}));
    verify->add_option("--channel", vc.channel, "attenuator, amplifier, contravariant or additive-noise")
        ->check(CLI::IsMember({"attenuator", "amplifier", "contravariant", "additive-noise"}));
    verify->add_option("--eta", vc.eta, "Attenuator transmissivity")->check(CLI::Range(0.0, 1.0));
    verify->add_option("--kappa", vc.kappa, "Amplifier or contravariant gain")->check(CLI::PositiveNumber);
    verify->add_option("--env", vc.env, "Environment mean photon number")->check(CLI::NonNegativeNumber);
    verify->add_option("--modes", vc.modes, "Number of modes (1 or 2)")->capture_default_str();
    verify->add_option("--cutoff", vc.cutoff, "Input cutoff D (default 40 for one mode, 10 for two)");
    verify->add_option("--ensemble", vc.ensemble, "ginibre, diagonal, displaced-thermal, pure, product or entangled");
    verify->add_option("--trials", vc.trials, "Trials per suite (grid points for thermal)")->capture_default_str();
    verify->add_option("--seed", vc.seed, "Master seed")->capture_default_str();
    verify->add_option("--slack", vc.slack, "Allowed violation")->capture_default_str();
    verify->add_option("-o,--output", ver_output, "Write the JSON report here");
    verify->add_option("--dump-dir", dump_dir, "Directory for failing input states")->capture_default_str();
    verify->add_option("--threads", threads, "Worker threads (default: MOE_THREADS or 1)");
    verify->add_option("--config", ver_config, "Rerun from a config echo (JSON)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*bound) return run_bound(bc);
        if (*figure) {
            if (!fig_config.empty()) fc = FigureConfig::from_json(read_json(fig_config));
            if (fc.name.empty()) throw InvalidParameter("figure name required");
            return run_figure(fc, fig_output, fig_gnuplot);
        }
        if (!ver_config.empty()) vc = VerifyConfig::from_json(read_json(ver_config));
        if (vc.suite.empty()) throw InvalidParameter("suite required");
        return run_verify(vc, ver_output, dump_dir, threads);
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: bad config: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
