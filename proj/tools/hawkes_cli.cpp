#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hawkes/hawkes.hpp"

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

// "-" or empty routes to stdout
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file '" + path + "'");
    out << text;
}

int fail(const std::string& type, const std::string& message) {
    json err{{"error", {{"type", type}, {"message", message}}}};
    std::cout << err.dump(2) << "\n";
    return 1;
}

// Fitting accepts a bare family name when every kernel parameter is estimated;
// the concrete values then only seed the optimizer. Simulation and spectrum
// evaluation always need the full spec.
hawkes::ReproductionKernel fit_kernel(const std::string& spec, bool fit_a) {
    if (spec == "exp" || spec == "exponential") return hawkes::Exponential{1.0};
    if (spec == "gauss" || spec == "gaussian") return hawkes::Gaussian{1.0, 1.0};
    if (spec == "powerlaw") {
        if (!fit_a)
            throw std::invalid_argument(
                "kernel spec: powerlaw needs gamma=...,a=... (a stays fixed unless --fit-a)");
        return hawkes::PowerLaw{2.0, 1.0};
    }
    return hawkes::parse_kernel_spec(spec);
}

hawkes::RunReport make_report(const std::string& command, int argc, char** argv) {
    hawkes::RunReport rep;
    rep.command = command;
    for (int i = 1; i < argc; ++i) rep.argv.emplace_back(argv[i]);
    return rep;
}

void finish(hawkes::RunReport& rep, const std::string& out, Clock::time_point t0) {
    rep.elapsed_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    emit(out, hawkes::report_text(rep));
}

struct SimulateArgs {
    std::string kernel;
    double eta = 0.0;
    double mu = 0.0;
    double T = 0.0;
    double delta = 1.0;
    double burnin = 100.0;
    std::uint64_t seed = 0;
    std::string counts_out = "-";
    std::string events_out;
    std::string out;
};

int run_simulate(const SimulateArgs& a, int argc, char** argv, Clock::time_point t0) {
    hawkes::HawkesModel model{a.eta, a.mu, hawkes::parse_kernel_spec(a.kernel)};
    const auto realization = hawkes::simulate(model, a.T, a.burnin, a.seed);
    const auto series = hawkes::bin_counts(realization, a.delta);

    std::ostringstream counts;
    hawkes::write_counts_csv(counts, series, a.seed, a.T);
    emit(a.counts_out, counts.str());
    if (!a.events_out.empty()) {
        std::ostringstream events;
        hawkes::write_events_csv(events, realization);
        emit(a.events_out, events.str());
    }
    if (!a.out.empty()) {
        auto rep = make_report("simulate", argc, argv);
        rep.seed = a.seed;
        rep.config = json{{"kernel", a.kernel}, {"eta", a.eta},       {"mu", a.mu},
                          {"T", a.T},           {"delta", a.delta},   {"burnin", a.burnin},
                          {"seed", a.seed},     {"counts_out", a.counts_out},
                          {"events_out", a.events_out}};
        rep.result = json{{"events", realization.times.size()},
                          {"bins", series.size()},
                          {"total", series.total()},
                          {"discarded", series.discarded}};
        finish(rep, a.out, t0);
    }
    return 0;
}

struct FitArgs {
    std::string input;
    std::string kernel;
    std::string method = "whittle";
    double delta = 0.0;  // 0 = infer from labels
    double window = 0.0;
    bool fill_gaps = false;
    bool fit_a = false;
    bool multistart = true;
    std::vector<double> init;
    std::string out = "-";
};

hawkes::FitReport run_fit_pipeline(const FitArgs& a) {
    hawkes::FitSpec spec{fit_kernel(a.kernel, a.fit_a), a.fit_a};
    if (a.method == "mle") {
        auto realization = hawkes::load_events(a.input, a.window);
        hawkes::MleOptions opts;
        opts.init = a.init;
        opts.multistart = a.multistart;
        return hawkes::mle_fit(realization, spec, opts);
    }
    if (a.method != "whittle")
        throw std::invalid_argument("fit: unknown method '" + a.method + "'");
    auto series = hawkes::load_counts(a.input, {a.delta, a.fill_gaps});
    hawkes::WhittleOptions opts;
    opts.init = a.init;
    opts.multistart = a.multistart;
    return hawkes::whittle_fit(series, spec, opts);
}

json fit_config_echo(const FitArgs& a) {
    return json{{"input", a.input},       {"kernel", a.kernel}, {"method", a.method},
                {"delta", a.delta},       {"window", a.window}, {"fill_gaps", a.fill_gaps},
                {"fit_a", a.fit_a},       {"multistart", a.multistart},
                {"init", a.init}};
}

int run_fit(const FitArgs& a, int argc, char** argv, Clock::time_point t0) {
    const auto fit = run_fit_pipeline(a);
    auto rep = make_report("fit", argc, argv);
    rep.config = fit_config_echo(a);
    rep.result = json{{"fit", fit}};
    finish(rep, a.out, t0);
    return 0;
}

struct GofArgs {
    FitArgs fit;
    double bandwidth = 0.10;
    int bootstrap = 0;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string q2_out;
};

int run_gof(const GofArgs& a, int argc, char** argv, Clock::time_point t0) {
    if (a.fit.method != "whittle")
        throw std::invalid_argument("gof: only the whittle fit has a spectral test");
    auto series = hawkes::load_counts(a.fit.input, {a.fit.delta, a.fit.fill_gaps});
    hawkes::FitSpec spec{fit_kernel(a.fit.kernel, a.fit.fit_a), a.fit.fit_a};
    hawkes::WhittleOptions wopts;
    wopts.init = a.fit.init;
    wopts.multistart = a.fit.multistart;
    const auto fit = hawkes::whittle_fit(series, spec, wopts);

    hawkes::GofOptions gopts;
    gopts.bandwidth = a.bandwidth;
    gopts.bootstrap_replicates = a.bootstrap;
    gopts.seed = a.seed;
    gopts.fit = wopts;
    gopts.threads = a.threads;
    const auto gof = hawkes::gof_test(series, fit, spec, gopts);

    if (!a.q2_out.empty()) {
        std::ostringstream q2;
        hawkes::write_q2_csv(q2, gof);
        emit(a.q2_out, q2.str());
    }
    auto rep = make_report("gof", argc, argv);
    rep.seed = a.seed;
    rep.config = fit_config_echo(a.fit);
    rep.config["bandwidth"] = a.bandwidth;
    rep.config["bootstrap"] = a.bootstrap;
    rep.config["seed"] = a.seed;
    rep.config["threads"] = a.threads;
    rep.result = json{{"fit", fit}, {"gof", gof}};
    finish(rep, a.fit.out, t0);
    return 0;
}

struct SpectrumArgs {
    std::string kernel;
    double eta = 0.0;
    double mu = -1.0;  // <0 marks "no model given"
    double delta = 0.0;
    std::string input;
    bool fill_gaps = false;
    int points = 512;
    std::string csv_out = "-";
    std::string out;
};

int run_spectrum(const SpectrumArgs& a, int argc, char** argv, Clock::time_point t0) {
    const bool have_model = !a.kernel.empty();
    const bool have_input = !a.input.empty();
    if (!have_model && !have_input)
        throw std::invalid_argument("spectrum: need --input and/or --kernel with --eta/--mu");

    std::vector<std::string> columns{"omega"};
    std::vector<std::vector<double>> rows;
    double delta = a.delta;
    hawkes::BinCountSeries series{};
    if (have_input) {
        series = hawkes::load_counts(a.input, {a.delta, a.fill_gaps});
        delta = series.delta;
    }
    if (!(delta > 0.0)) delta = 1.0;

    std::optional<hawkes::FoldedDensity> density;
    if (have_model) {
        if (a.mu < 0.0)
            throw std::invalid_argument("spectrum: a model curve needs --eta and --mu");
        hawkes::HawkesModel model{a.eta, a.mu, hawkes::parse_kernel_spec(a.kernel)};
        density.emplace(model, delta);
    }

    if (have_input) {
        const auto pgram = hawkes::compute_periodogram(series, true);
        columns.push_back("periodogram");
        if (density) columns.push_back("model");
        for (std::size_t j = 0; j <= pgram.n / 2; ++j) {
            const double w = pgram.frequency(j);
            std::vector<double> row{w, pgram.ordinates[j]};
            if (density) row.push_back((*density)(w));
            rows.push_back(std::move(row));
        }
    } else {
        columns.push_back("model");
        hawkes::require(a.points >= 2, "spectrum: --points must be >= 2");
        for (int i = 0; i <= a.points; ++i) {
            const double w = hawkes::pi * static_cast<double>(i) / static_cast<double>(a.points);
            rows.push_back({w, (*density)(w)});
        }
    }

    std::ostringstream csv;
    hawkes::write_table_csv(csv, columns, rows);
    emit(a.csv_out, csv.str());

    if (!a.out.empty()) {
        auto rep = make_report("spectrum", argc, argv);
        rep.config = json{{"kernel", a.kernel}, {"eta", a.eta},     {"mu", a.mu},
                          {"delta", a.delta},   {"input", a.input}, {"points", a.points},
                          {"fill_gaps", a.fill_gaps}};
        rep.result = json{{"columns", columns}, {"points", rows.size()}};
        finish(rep, a.out, t0);
    }
    return 0;
}

struct ExperimentArgs {
    std::string config_path;
    int threads = -1;  // <0 = take the config file's value
    std::string csv_out;
    std::string out = "-";
};

int run_experiment(const ExperimentArgs& a, int argc, char** argv, Clock::time_point t0) {
    std::ifstream in(a.config_path);
    if (!in) throw std::invalid_argument("experiment: cannot open config '" + a.config_path + "'");
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("experiment config: ") + e.what());
    }

    hawkes::StudyConfig study;
    try {
        auto kernel = hawkes::parse_kernel_spec(cfg.at("kernel").get<std::string>());
        study.spec = hawkes::FitSpec{kernel, cfg.value("fit_powerlaw_scale", false)};
        study.truth = hawkes::HawkesModel{cfg.at("eta").get<double>(), cfg.at("mu").get<double>(),
                                          kernel};
        study.horizons = cfg.at("horizons").get<std::vector<double>>();
        study.deltas = cfg.at("deltas").get<std::vector<double>>();
        study.replicates = cfg.value("replicates", 100);
        study.master_seed = cfg.value("seed", std::uint64_t{0});
        study.burnin = cfg.value("burnin", 100.0);
        study.threads = a.threads >= 0 ? a.threads : cfg.value("threads", 0);
        const bool multistart = cfg.value("multistart", true);
        for (const auto& name : cfg.value("methods", std::vector<std::string>{"whittle"})) {
            if (name == "whittle") {
                hawkes::WhittleOptions wopts;
                wopts.multistart = multistart;
                study.methods.push_back(hawkes::whittle_method(wopts));
            } else if (name == "mle") {
                hawkes::MleOptions mopts;
                mopts.multistart = multistart;
                study.methods.push_back(hawkes::mle_method(mopts));
            } else {
                throw std::invalid_argument("experiment config: unknown method '" + name + "'");
            }
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("experiment config: ") + e.what());
    }

    const auto table = hawkes::run_study(study);
    if (!a.csv_out.empty()) {
        std::ostringstream csv;
        hawkes::write_mse_csv(csv, table);
        emit(a.csv_out, csv.str());
    }
    auto rep = make_report("experiment", argc, argv);
    rep.seed = study.master_seed;
    rep.config = cfg;
    rep.config["config_path"] = a.config_path;
    rep.result = table;
    finish(rep, a.out, t0);
    return 0;
}

void add_fit_options(CLI::App* cmd, FitArgs& a, bool with_method) {
    cmd->add_option("--input", a.input, "counts CSV (event-time CSV for --method mle)")
        ->required();
    cmd->add_option("--kernel", a.kernel,
                    "kernel family or spec: exp[:beta=..] | powerlaw:gamma=..,a=.. | "
                    "gauss[:nu=..,sigma=..]")
        ->required();
    cmd->add_option("--delta", a.delta, "bin width in physical units (0 = infer from labels)");
    cmd->add_flag("--fill-gaps", a.fill_gaps, "zero-fill missing labels instead of failing");
    cmd->add_flag("--fit-a", a.fit_a, "estimate the power-law scale a as well");
    cmd->add_flag("!--no-multistart", a.multistart, "disable the restart grid");
    cmd->add_option("--init", a.init, "starting point, constrained coordinates")
        ->delimiter(',');
    if (with_method) {
        cmd->add_option("--method", a.method, "whittle | mle");
        cmd->add_option("--T", a.window, "observation window for --method mle");
    }
}

}  // namespace

int main(int argc, char** argv) {
    const auto t0 = Clock::now();
    CLI::App app{"linear Hawkes processes: simulation, spectral fitting, goodness of fit"};
    app.set_version_flag("--version", hawkes::library_version);
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "simulate a Hawkes process and bin it");
    sim_cmd->add_option("--kernel", sim.kernel, "full kernel spec, e.g. exp:beta=1")->required();
    sim_cmd->add_option("--eta", sim.eta, "immigration rate")->required();
    sim_cmd->add_option("--mu", sim.mu, "branching ratio in [0, 1)")->required();
    sim_cmd->add_option("--T", sim.T, "observation window")->required();
    sim_cmd->add_option("--delta", sim.delta, "bin width");
    sim_cmd->add_option("--burnin", sim.burnin, "burn-in length before time 0");
    sim_cmd->add_option("--seed", sim.seed, "RNG seed");
    sim_cmd->add_option("--counts-out", sim.counts_out, "counts CSV destination (- = stdout)");
    sim_cmd->add_option("--events-out", sim.events_out, "also write event times CSV");
    sim_cmd->add_option("--out", sim.out, "also write a JSON run report");

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit a Hawkes model to observed counts");
    add_fit_options(fit_cmd, fit, true);
    fit_cmd->add_option("--out", fit.out, "JSON report destination (- = stdout)");

    GofArgs gof;
    auto* gof_cmd = app.add_subcommand("gof", "fit, then test the fit in the spectral domain");
    add_fit_options(gof_cmd, gof.fit, false);
    gof_cmd->add_option("--bandwidth", gof.bandwidth, "smoothing bandwidth h");
    gof_cmd->add_option("--bootstrap", gof.bootstrap, "bootstrap replicates (0 = asymptotic only)");
    gof_cmd->add_option("--seed", gof.seed, "bootstrap RNG seed");
    gof_cmd->add_option("--threads", gof.threads, "bootstrap worker threads (0 = all cores)")
        ->envname("HAWKES_THREADS");
    gof_cmd->add_option("--q2-out", gof.q2_out, "write the Q² curve CSV here");
    gof_cmd->add_option("--out", gof.fit.out, "JSON report destination (- = stdout)");

    SpectrumArgs spec;
    auto* spec_cmd = app.add_subcommand("spectrum", "emit model and/or periodogram curves as CSV");
    spec_cmd->add_option("--kernel", spec.kernel, "full kernel spec for the model curve");
    spec_cmd->add_option("--eta", spec.eta, "immigration rate");
    spec_cmd->add_option("--mu", spec.mu, "branching ratio");
    spec_cmd->add_option("--delta", spec.delta, "bin width (0 = infer from --input labels)");
    spec_cmd->add_option("--input", spec.input, "counts CSV for the periodogram");
    spec_cmd->add_flag("--fill-gaps", spec.fill_gaps, "zero-fill missing labels");
    spec_cmd->add_option("--points", spec.points, "model grid points on [0, pi] without --input");
    spec_cmd->add_option("--csv-out", spec.csv_out, "CSV destination (- = stdout)");
    spec_cmd->add_option("--out", spec.out, "also write a JSON run report");

    ExperimentArgs exp;
    auto* exp_cmd = app.add_subcommand("experiment", "run a Monte Carlo study from a config file");
    exp_cmd->add_option("--config", exp.config_path, "JSON study configuration")->required();
    exp_cmd->add_option("--threads", exp.threads, "worker threads (overrides the config)")
        ->envname("HAWKES_THREADS");
    exp_cmd->add_option("--csv-out", exp.csv_out, "write the MSE table CSV here");
    exp_cmd->add_option("--out", exp.out, "JSON report destination (- = stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        fail("usage", e.what());
        return app.exit(e, std::cerr, std::cerr);
    }

    try {
        if (sim_cmd->parsed()) return run_simulate(sim, argc, argv, t0);
        if (fit_cmd->parsed()) return run_fit(fit, argc, argv, t0);
        if (gof_cmd->parsed()) return run_gof(gof, argc, argv, t0);
        if (spec_cmd->parsed()) return run_spectrum(spec, argc, argv, t0);
        if (exp_cmd->parsed()) return run_experiment(exp, argc, argv, t0);
    } catch (const hawkes::NumericalError& e) {
        return fail("numerical", e.what());
    } catch (const std::invalid_argument& e) {
        return fail("invalid_argument", e.what());
    } catch (const std::exception& e) {
        return fail("runtime", e.what());
    }
    return fail("usage", "no subcommand given");
}
