// Acceptance gate: one [PASS]/[FAIL]/[SKIP] line per criterion, exit 0 only
// when nothing failed. Expected values are recomputed here independently of
// the code paths under test (closed forms, brute-force references, byte
// comparisons), so a shared bug cannot vouch for itself.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "hawkes/hawkes.hpp"

using namespace hawkes;
using nlohmann::json;

namespace {

int failures = 0;

std::string strf(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    char buf[1024];
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

struct Skip {
    std::string why;
};

void check(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

void run(int id, const char* name, const std::function<std::string()>& body) {
    try {
        const std::string detail = body();
        std::printf("[PASS] criterion %d (%s): %s\n", id, name, detail.c_str());
    } catch (const Skip& s) {
        std::printf("[SKIP] criterion %d (%s): %s\n", id, name, s.why.c_str());
    } catch (const std::exception& e) {
        ++failures;
        std::printf("[FAIL] criterion %d (%s): %s\n", id, name, e.what());
    }
    std::fflush(stdout);
}

struct SampleStats {
    double mean;
    double se;
};

SampleStats stats(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

// --------------------------------------------------------------------- 1
std::string criterion1() {
    RandomEngine rng = make_engine(4001);
    const std::size_t sizes[] = {17, 64, 1000};
    double worst_parseval = 0.0;
    double worst_dft = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = sizes[rep % 3];
        std::vector<double> x(n);
        for (auto& v : x) v = std::floor(21.0 * uniform01(rng));
        const auto pgram = compute_periodogram(x, true);

        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : x) ss += (v - mean) * (v - mean);
        const double expected = ss / two_pi;
        double total = 0.0;
        for (double o : pgram.ordinates) total += o;
        worst_parseval = std::max(worst_parseval, std::abs(total - expected) / expected);

        if (n <= 256) {
            for (std::size_t j = 0; j < n; ++j) {
                std::complex<double> acc{0.0, 0.0};
                for (std::size_t k = 0; k < n; ++k) {
                    const double phase = -two_pi * static_cast<double>(j * k) / static_cast<double>(n);
                    acc += (x[k] - mean) * std::complex<double>(std::cos(phase), std::sin(phase));
                }
                const double naive = std::norm(acc) / (two_pi * static_cast<double>(n));
                worst_dft = std::max(worst_dft,
                                     std::abs(naive - pgram.ordinates[j]) / std::max(1.0, naive));
            }
        }
    }
    check(worst_parseval <= 1e-10, strf("parseval relative error %.3g > 1e-10", worst_parseval));
    check(worst_dft <= 1e-9, strf("fft vs naive dft error %.3g > 1e-9", worst_dft));
    return strf("parseval err %.2g, fft vs naive err %.2g over 100 series", worst_parseval,
                worst_dft);
}

// --------------------------------------------------------------------- 2
std::string criterion2() {
    const double eta = 1.3;
    double worst = 0.0;
    const std::vector<std::pair<ReproductionKernel, double>> cases{
        {Exponential{0.7}, 1.0}, {Gaussian{2.0, 1.0}, 2.0}, {PowerLaw{1.5, 1.0}, 1.0}};
    for (const auto& [kernel, delta] : cases) {
        const FoldedDensity f(HawkesModel{eta, 0.0, kernel}, delta);
        const double flat = eta * delta / two_pi;
        for (int i = -400; i <= 400; ++i) {
            const double w = pi * static_cast<double>(i) / 400.0;
            worst = std::max(worst, std::abs(f(w) - flat));
        }
    }
    check(worst <= 1e-8, strf("max |f - eta*delta/2pi| = %.3g > 1e-8", worst));
    return strf("max deviation from the flat density %.2g across 3 kernels", worst);
}

// --------------------------------------------------------------------- 3
std::string criterion3() {
    const HawkesModel model{1.0, 0.5, Exponential{1.0}};
    const int reps = 200;
    const double T = 1000.0;
    std::vector<std::vector<double>> acov(6, std::vector<double>(reps));
    for (int r = 0; r < reps; ++r) {
        const auto series = bin_counts(simulate(model, T, 100.0, derive_seed(4003, r)), 1.0);
        const std::size_t n = series.size();
        const double mean = static_cast<double>(series.total()) / static_cast<double>(n);
        for (std::size_t u = 0; u < 6; ++u) {
            double acc = 0.0;
            for (std::size_t k = 0; k + u < n; ++k)
                acc += (static_cast<double>(series.counts[k]) - mean) *
                       (static_cast<double>(series.counts[k + u]) - mean);
            acov[u][r] = acc / static_cast<double>(n);
        }
    }
    double worst_z = 0.0;
    for (std::size_t u = 0; u < 6; ++u) {
        const auto s = stats(acov[u]);
        const double theo = theoretical_autocovariance(model, 1.0, static_cast<std::int64_t>(u));
        const double z = std::abs(s.mean - theo) / s.se;
        worst_z = std::max(worst_z, z);
        check(z <= 3.0, strf("lag %zu: empirical %.4f vs theory %.4f is %.1f se away", u, s.mean,
                             theo, z));
    }
    return strf("lags 0-5 within 3 se over %d runs at T=%.0f (max %.1f se)", reps, T, worst_z);
}

// --------------------------------------------------------------------- 4
std::string criterion4() {
    RandomEngine rng = make_engine(4004);
    const int N = 100000;
    double worst_z = 0.0;
    for (const double mu : {0.3, 0.5, 0.8}) {
        std::vector<std::vector<double>> z(4), zsq(4);
        for (int g = 1; g <= 3; ++g) {
            z[g].reserve(N);
            zsq[g].reserve(N);
        }
        for (int i = 0; i < N; ++i) {
            const auto cluster = simulate_cluster(Exponential{1.0}, mu, rng);
            for (std::size_t g = 1; g <= 3; ++g) {
                const double size = g < cluster.generation_sizes.size()
                                        ? static_cast<double>(cluster.generation_sizes[g])
                                        : 0.0;
                z[g].push_back(size);
                zsq[g].push_back(size * size);
            }
        }
        for (int g = 1; g <= 3; ++g) {
            // Poisson(mu) offspring: E Z_g = mu^g, Var Z_g = mu^g (1 - mu^g)/(1 - mu)
            const double m1 = std::pow(mu, g);
            const double var = m1 * (1.0 - m1) / (1.0 - mu);
            const double m2 = var + m1 * m1;
            const auto s1 = stats(z[g]);
            const auto s2 = stats(zsq[g]);
            const double z1 = std::abs(s1.mean - m1) / s1.se;
            const double z2 = std::abs(s2.mean - m2) / s2.se;
            worst_z = std::max(worst_z, std::max(z1, z2));
            check(z1 <= 3.0, strf("mu=%.1f g=%d: mean %.4f vs %.4f is %.1f se away", mu, g,
                                  s1.mean, m1, z1));
            check(z2 <= 3.0, strf("mu=%.1f g=%d: second moment %.4f vs %.4f is %.1f se away", mu,
                                  g, s2.mean, m2, z2));
            const double var_hat = s2.mean - s1.mean * s1.mean;
            const double var_tol = 3.0 * s2.se + 6.0 * std::abs(s1.mean) * s1.se;
            check(std::abs(var_hat - var) <= var_tol,
                  strf("mu=%.1f g=%d: variance %.4f vs %.4f beyond propagated 3 se", mu, g,
                       var_hat, var));
        }
    }
    return strf("generations 1-3 at mu in {0.3, 0.5, 0.8}, %d clusters each (max %.1f se)", N,
                worst_z);
}

// --------------------------------------------------------------------- 5
std::string criterion5() {
    const double p = same_bin_probability(1.0, 2.0);
    // independent oracle: P = (1/2) int_0^2 (1 - e^{-(2-u)}) du by Simpson
    const int panels = 2000;
    double integral = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double a = 2.0 * i / panels, b = 2.0 * (i + 1) / panels;
        auto g = [](double u) { return 1.0 - std::exp(-(2.0 - u)); };
        integral += (b - a) / 6.0 * (g(a) + 4.0 * g(0.5 * (a + b)) + g(b));
    }
    const double oracle = integral / 2.0;
    check(std::abs(p - oracle) <= 1e-9, strf("closed form %.10f vs quadrature %.10f", p, oracle));
    const double rounded = std::round(p * 100.0) / 100.0;
    check(std::abs(rounded - 0.57) < 1e-12, strf("%.6f rounds to %.2f, not 0.57", p, rounded));
    return strf("P(same bin) = %.4f -> 0.57 at beta=1, delta=2", p);
}

// --------------------------------------------------------------------- 6
std::string criterion6() {
    StudyConfig cfg;
    cfg.spec = FitSpec{Exponential{1.0}};
    cfg.truth = HawkesModel{1.0, 0.5, Exponential{1.0}};
    cfg.horizons = {250.0, 500.0, 1000.0};
    cfg.deltas = {1.0};
    cfg.replicates = 100;
    cfg.methods = {whittle_method()};
    cfg.master_seed = 4006;
    const auto table = run_study(cfg);

    auto row = [&](double T, const std::string& parameter) -> const MseRow& {
        for (const auto& r : table.rows)
            if (r.horizon == T && r.parameter == parameter) return r;
        throw std::runtime_error("missing study row");
    };
    const double truth[] = {1.0, 0.5, 1.0};
    const char* names[] = {"eta", "mu", "beta"};
    std::string means;
    for (int i = 0; i < 3; ++i) {
        const auto& r = row(1000.0, names[i]);
        check(r.included >= 50, strf("only %d of 100 fits usable for %s", r.included, names[i]));
        check(std::abs(r.mean_estimate - truth[i]) <= 0.1,
              strf("mean %s = %.4f is more than 0.1 from %.1f (%d fits)", names[i],
                   r.mean_estimate, truth[i], r.included));
        means += strf("%s%s=%.3f", i ? ", " : "", names[i], r.mean_estimate);
    }
    const double ratio = row(1000.0, "mu").mse / row(250.0, "mu").mse;
    check(ratio >= 0.125 && ratio <= 0.5,
          strf("mu MSE(1000)/MSE(250) = %.3f outside [1/8, 1/2]", ratio));
    return strf("T=1000 means %s; mu MSE ratio %.3f (included %d/100)", means.c_str(), ratio,
                row(1000.0, "mu").included);
}

// --------------------------------------------------------------------- 7
std::string criterion7() {
    // recursion vs brute-force double sum
    PointRealization realization;
    std::uint64_t seed = 17;
    for (;; ++seed) {
        realization = simulate(HawkesModel{0.8, 0.45, Exponential{1.3}}, 100.0, 50.0, seed);
        if (realization.times.size() >= 50 && realization.times.size() <= 200) break;
        check(seed < 40, "no realization with 50..200 events found");
    }
    const double T = realization.window_end;
    double worst_rel = 0.0;
    for (const auto& m : {HawkesModel{0.8, 0.45, Exponential{1.3}},
                          HawkesModel{1.2, 0.3, Exponential{0.9}},
                          HawkesModel{0.5, 0.6, Exponential{2.0}}}) {
        const double beta = std::get<Exponential>(m.kernel).beta;
        const double eta = constant_eta(m);
        double brute = 0.0;
        const auto& t = realization.times;
        for (std::size_t i = 0; i < t.size(); ++i) {
            double lam = eta;
            for (std::size_t j = 0; j < i; ++j)
                lam += m.mu * beta * std::exp(-beta * (t[i] - t[j]));
            brute += std::log(lam);
        }
        brute -= eta * T;
        for (double tj : t) brute -= m.mu * (1.0 - std::exp(-beta * (T - tj)));
        const double recursive = model_loglik(realization, m).loglik;
        const double rel = std::abs(recursive - brute) / std::max(1.0, std::abs(brute));
        worst_rel = std::max(worst_rel, rel);
        check(rel <= 1e-10, strf("loglik recursion off by %.3g relative", rel));
    }

    // shared simulations at delta = 2: exact times beat the binned fit on beta
    StudyConfig cfg;
    cfg.spec = FitSpec{Exponential{1.0}};
    cfg.truth = HawkesModel{1.0, 0.5, Exponential{1.0}};
    cfg.horizons = {500.0};
    cfg.deltas = {2.0};
    cfg.replicates = 100;
    cfg.methods = {whittle_method(), mle_method()};
    cfg.master_seed = 4007;
    const auto table = run_study(cfg);
    double whittle_mse = -1.0, mle_mse = -1.0;
    int whittle_inc = 0, mle_inc = 0;
    for (const auto& r : table.rows) {
        if (r.parameter != "beta") continue;
        if (r.method == "whittle") {
            whittle_mse = r.mse;
            whittle_inc = r.included;
        } else if (r.method == "mle") {
            mle_mse = r.mse;
            mle_inc = r.included;
        }
    }
    check(whittle_mse > 0.0 && mle_mse > 0.0, "missing beta rows in the study table");
    check(whittle_inc >= 50 && mle_inc >= 50,
          strf("too few usable fits (whittle %d, mle %d)", whittle_inc, mle_inc));
    check(mle_mse < whittle_mse, strf("beta MSE: mle %.4f not below whittle %.4f at delta=2",
                                      mle_mse, whittle_mse));
    return strf("loglik err %.2g; beta MSE at delta=2: mle %.4f < whittle %.4f "
                "(included mle %d, whittle %d of 100)", worst_rel, mle_mse, whittle_mse, mle_inc,
                whittle_inc);
}

// --------------------------------------------------------------------- 8
std::string criterion8() {
    for (const double h : {0.05, 0.10, 0.25}) {
        const auto c = gof_constants(h);
        const double mu_ref = (12.0 * pi / 5.0) / std::sqrt(h);
        const double tausq_ref = 2672.0 * pi * pi / 385.0;
        check(std::abs(c.mu_h - mu_ref) <= 1e-12 * mu_ref, "mu_h formula mismatch");
        check(std::abs(c.tau * c.tau - tausq_ref) <= 1e-12 * tausq_ref, "tau^2 formula mismatch");
    }

    const HawkesModel model{1.0, 0.5, Exponential{1.0}};
    const FitSpec spec{Exponential{1.0}};
    {
        const std::size_t n = 512;
        const FoldedDensity f(model, 1.0);
        Periodogram synthetic{n, std::vector<double>(n), true};
        for (std::size_t j = 0; j < n; ++j) {
            const double w = two_pi * static_cast<double>(j) / static_cast<double>(n);
            synthetic.ordinates[j] = f(std::min(w, two_pi - w));
        }
        const auto exact = gof_statistic(synthetic, [&](double w) { return f(w); }, 0.10);
        check(exact.statistic == 0.0,
              strf("S = %.3g, not exactly 0, on I = f input", exact.statistic));
    }

    const int reps = 200;
    int rejections = 0;
    int usable = 0;
    for (int r = 0; r < reps; ++r) {
        const auto series = bin_counts(simulate(model, 2048.0, 100.0, derive_seed(4008, r)), 1.0);
        const auto fit = whittle_fit(series, spec);
        if (!fit.converged) continue;
        ++usable;
        const auto gof = gof_test(series, fit, spec);  // h = 0.10, asymptotic only
        if (gof.asymptotic_pvalue < 0.05) ++rejections;
    }
    check(usable >= reps * 4 / 5, strf("only %d/%d null fits converged", usable, reps));
    const double rate = static_cast<double>(rejections) / static_cast<double>(usable);
    check(rate >= 0.01 && rate <= 0.12,
          strf("null rejection rate %.3f outside [0.01, 0.12] (%d/%d)", rate, rejections, usable));
    return strf("constants exact, S=0 on synthetic input, null rejection %.3f (%d/%d at n=2048)",
                rate, rejections, usable);
}

// --------------------------------------------------------------------- 9
std::string criterion9() {
    const char* env = std::getenv("HAWKES_NIID_CSV");
    const std::string fallback = std::string(HAWKES_REPO_DIR) + "/data/niid_measles_tokyo_weekly.csv";
    const std::string path = env ? env : fallback;
    if (!std::filesystem::exists(path))
        throw Skip{strf("weekly measles dataset not bundled; place it at %s or set "
                        "HAWKES_NIID_CSV (scripts/prepare_measles_csv.py converts the upstream "
                        "export)", fallback.c_str())};

    const auto series = load_counts(path, {7.0, true});
    check(series.total() == 264, strf("expected 264 total cases, found %lld",
                                      static_cast<long long>(series.total())));
    const FitSpec spec{Gaussian{7.0, 3.0}};
    const auto fit = whittle_fit(series, spec);
    check(fit.converged, "gaussian fit did not converge");
    const double expected[] = {0.040, 0.72, 9.8, 5.9};  // eta, mu, nu, sigma in day units
    const char* names[] = {"eta", "mu", "nu", "sigma"};
    std::string detail;
    for (int i = 0; i < 4; ++i) {
        const double rel = std::abs(fit.estimate[i] - expected[i]) / std::abs(expected[i]);
        check(rel <= 0.10, strf("%s = %.4f is %.0f%% from %.3f", names[i], fit.estimate[i],
                                100.0 * rel, expected[i]));
        detail += strf("%s%s=%.3f", i ? ", " : "", names[i], fit.estimate[i]);
    }
    const double expected_p[] = {0.61, 0.96};
    const double hs[] = {0.05, 0.10};
    for (int i = 0; i < 2; ++i) {
        GofOptions opts;
        opts.bandwidth = hs[i];
        const auto gof = gof_test(series, fit, spec, opts);
        check(std::abs(gof.asymptotic_pvalue - expected_p[i]) <= 0.15,
              strf("p(h=%.2f) = %.3f not within 0.15 of %.2f", hs[i], gof.asymptotic_pvalue,
                   expected_p[i]));
        detail += strf(", p(h=%.2f)=%.2f", hs[i], gof.asymptotic_pvalue);
    }
    return detail;
}

// --------------------------------------------------------------------- 10
struct CliRun {
    int exit_code;
    std::string out;
};

CliRun run_cli(const std::string& args) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path() / "hawkes_acceptance";
    std::filesystem::create_directories(dir);
    const auto out_path = dir / ("stdout_" + std::to_string(counter++) + ".txt");
    const std::string cmd =
        "\"" HAWKES_CLI_PATH "\" " + args + " > \"" + out_path.string() + "\" 2> /dev/null";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out_path);
    std::ostringstream text;
    text << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, text.str()};
}

std::string criterion10() {
    const auto dir = std::filesystem::temp_directory_path() / "hawkes_acceptance";
    std::filesystem::create_directories(dir);

    const std::string sim_flags =
        "simulate --kernel exp:beta=1 --eta 1 --mu 0.5 --T 400 --delta 1 --seed 11";
    const auto s1 = run_cli(sim_flags);
    const auto s2 = run_cli(sim_flags);
    check(s1.exit_code == 0, "simulate failed");
    check(s1.out == s2.out && !s1.out.empty(), "simulate output not byte-identical");

    const auto counts = (dir / "counts.csv").string();
    check(run_cli(sim_flags + " --counts-out \"" + counts + "\"").exit_code == 0,
          "simulate to file failed");
    auto normalized = [](const std::string& text) {
        json j = json::parse(text);
        if (!j.contains("elapsed_seconds")) throw std::runtime_error("report lacks timing field");
        j["elapsed_seconds"] = 0.0;
        return j.dump();
    };
    const std::string fit_flags = "fit --input \"" + counts + "\" --kernel exp --delta 1";
    const auto f1 = run_cli(fit_flags);
    const auto f2 = run_cli(fit_flags);
    check(f1.exit_code == 0, "fit failed");
    check(normalized(f1.out) == normalized(f2.out),
          "fit reports differ beyond the timing field");

    const std::string gof_flags =
        "gof --input \"" + counts + "\" --kernel exp --delta 1 --bandwidth 0.1";
    const auto g1 = run_cli(gof_flags);
    const auto g2 = run_cli(gof_flags);
    check(g1.exit_code == 0, "gof failed");
    check(normalized(g1.out) == normalized(g2.out),
          "gof reports differ beyond the timing field");
    return "simulate byte-identical; fit and gof reports identical modulo elapsed_seconds";
}

}  // namespace

int main() {
    std::printf("acceptance gate: 10 criteria\n");
    run(1, "periodogram parseval and fft agreement", criterion1);
    run(2, "flat folded density at mu = 0", criterion2);
    run(3, "autocovariance theory vs simulation", criterion3);
    run(4, "galton-watson generation moments", criterion4);
    run(5, "same-bin probability 0.57", criterion5);
    run(6, "whittle recovery and mu MSE decay", criterion6);
    run(7, "mle recursion and delta=2 comparison", criterion7);
    run(8, "gof constants, exact zero, null level", criterion8);
    run(9, "weekly measles case study (conditional)", criterion9);
    run(10, "cli byte determinism", criterion10);
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
