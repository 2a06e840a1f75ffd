#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hawkes/common.hpp"
#include "hawkes/mle.hpp"
#include "hawkes/simulation.hpp"
#include "hawkes/whittle.hpp"

namespace hawkes {

// An estimation method entered into a study. Methods with uses_bins = true are
// fitted once per (T, replicate, delta) on the binned series; methods with
// uses_bins = false see the raw realization once per (T, replicate) and report
// under delta = 0.
struct MethodSpec {
    std::string name;
    std::function<FitReport(const BinCountSeries&, const PointRealization&, const FitSpec&)> run;
    bool uses_bins = true;
};

inline MethodSpec whittle_method(WhittleOptions opts = {}) {
    MethodSpec m;
    m.name = "whittle";
    m.run = [opts](const BinCountSeries& series, const PointRealization&, const FitSpec& spec) {
        return whittle_fit(series, spec, opts);
    };
    m.uses_bins = true;
    return m;
}

inline MethodSpec mle_method(MleOptions opts = {}) {
    MethodSpec m;
    m.name = "mle";
    m.run = [opts](const BinCountSeries&, const PointRealization& realization,
                   const FitSpec& spec) { return mle_fit(realization, spec, opts); };
    m.uses_bins = false;
    return m;
}

struct StudyConfig {
    FitSpec spec{};
    HawkesModel truth{};
    std::vector<double> horizons;  // observation windows T
    std::vector<double> deltas;    // bin widths
    int replicates = 100;
    std::vector<MethodSpec> methods;
    std::uint64_t master_seed = 0;
    double burnin = 100.0;
    int threads = 0;
};

struct MseRow {
    std::string method;
    double horizon;
    double delta;  // 0 for continuous-time fits
    std::string parameter;
    double mean_estimate;
    double mse;
    double mc_se;  // standard error of the MSE estimate itself
    int included;
    int excluded;
};

// Least-squares slope of log MSE on log T within one (method, delta, parameter).
struct SlopeRow {
    std::string method;
    double delta;
    std::string parameter;
    double slope;
    int points;
};

struct MseTable {
    std::vector<MseRow> rows;
    std::vector<SlopeRow> slopes;
};

namespace detail {

struct StudyFit {
    std::vector<double> estimate;
    bool ok = false;  // fit returned and certified convergence
};

inline double study_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t k = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

}  // namespace detail

// Monte Carlo study over a (T, delta) grid. Each (T, replicate) pair is
// simulated exactly once from derive_seed(master_seed, T index, replicate) and
// shared across all bin widths and methods, so cross-delta comparisons see the
// same realizations. Fits that throw or fail to certify convergence are
// excluded from the aggregates and surface in the exclusion count.
inline MseTable run_study(const StudyConfig& config) {
    require(!config.horizons.empty(), "run_study: empty T grid");
    require(!config.deltas.empty(), "run_study: empty delta grid");
    for (double T : config.horizons) require(T > 0.0, "run_study: T must be > 0");
    for (double d : config.deltas) require(d > 0.0, "run_study: delta must be > 0");
    require(config.replicates >= 10, "run_study: needs at least 10 replicates");
    require(!config.methods.empty(), "run_study: no methods");
    validate(config.truth);

    const auto names = parameter_names(config.spec);
    const auto truth_theta = pack_parameters(config.truth, config.spec);
    const std::size_t n_t = config.horizons.size();
    const std::size_t n_d = config.deltas.size();
    const std::size_t reps = static_cast<std::size_t>(config.replicates);
    const std::size_t n_m = config.methods.size();

    // Per-method cell count along the delta axis; continuous-time methods
    // occupy a single delta = 0 cell.
    std::vector<std::size_t> cells(n_m);
    std::vector<std::size_t> offset(n_m);
    std::size_t stride = 0;
    for (std::size_t mi = 0; mi < n_m; ++mi) {
        cells[mi] = config.methods[mi].uses_bins ? n_d : 1;
        offset[mi] = stride;
        stride += cells[mi];
    }
    // slot layout: ((ti * reps + r) * stride + offset[mi] + di)
    std::vector<detail::StudyFit> fits(n_t * reps * stride);

    parallel_for(
        n_t * reps,
        [&](std::size_t job) {
            const std::size_t ti = job / reps;
            const std::size_t r = job % reps;
            const auto realization =
                simulate(config.truth, config.horizons[ti], config.burnin,
                         derive_seed(config.master_seed, ti, r));
            for (std::size_t mi = 0; mi < n_m; ++mi) {
                const auto& method = config.methods[mi];
                for (std::size_t di = 0; di < cells[mi]; ++di) {
                    detail::StudyFit& slot = fits[job * stride + offset[mi] + di];
                    try {
                        BinCountSeries series{};
                        if (method.uses_bins)
                            series = bin_counts(realization, config.deltas[di]);
                        FitReport rep = method.run(series, realization, config.spec);
                        slot.estimate = rep.estimate;
                        slot.ok = rep.converged;
                    } catch (const std::exception&) {
                        slot.ok = false;
                    }
                }
            }
        },
        config.threads);

    MseTable table;
    for (std::size_t mi = 0; mi < n_m; ++mi) {
        const auto& method = config.methods[mi];
        for (std::size_t di = 0; di < cells[mi]; ++di) {
            const double delta = method.uses_bins ? config.deltas[di] : 0.0;
            // log-log regression inputs per parameter, over T values with a
            // positive-MSE cell
            std::vector<std::vector<double>> log_t(names.size()), log_mse(names.size());
            for (std::size_t ti = 0; ti < n_t; ++ti) {
                std::vector<const detail::StudyFit*> included;
                int excluded = 0;
                for (std::size_t r = 0; r < reps; ++r) {
                    const auto& slot = fits[(ti * reps + r) * stride + offset[mi] + di];
                    if (slot.ok)
                        included.push_back(&slot);
                    else
                        ++excluded;
                }
                for (std::size_t p = 0; p < names.size(); ++p) {
                    MseRow row;
                    row.method = method.name;
                    row.horizon = config.horizons[ti];
                    row.delta = delta;
                    row.parameter = names[p];
                    row.included = static_cast<int>(included.size());
                    row.excluded = excluded;
                    std::vector<double> sq;
                    sq.reserve(included.size());
                    double mean = 0.0;
                    for (const auto* slot : included) {
                        const double est = slot->estimate[p];
                        mean += est;
                        sq.push_back((est - truth_theta[p]) * (est - truth_theta[p]));
                    }
                    const double k = static_cast<double>(included.size());
                    row.mean_estimate = included.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                         : mean / k;
                    double mse = 0.0;
                    for (double v : sq) mse += v;
                    row.mse = included.empty() ? std::numeric_limits<double>::quiet_NaN() : mse / k;
                    row.mc_se = std::numeric_limits<double>::quiet_NaN();
                    if (included.size() >= 2) {
                        // two-pass variance: exact zero when all squared errors agree
                        double var_sq = 0.0;
                        for (double v : sq) var_sq += (v - row.mse) * (v - row.mse);
                        var_sq /= (k - 1.0);
                        row.mc_se = std::sqrt(var_sq / k);
                    }
                    if (!included.empty() && row.mse > 0.0) {
                        log_t[p].push_back(std::log(config.horizons[ti]));
                        log_mse[p].push_back(std::log(row.mse));
                    }
                    table.rows.push_back(std::move(row));
                }
            }
            for (std::size_t p = 0; p < names.size(); ++p) {
                if (log_t[p].size() < 2) continue;  // slope needs two T points
                SlopeRow srow;
                srow.method = method.name;
                srow.delta = delta;
                srow.parameter = names[p];
                srow.slope = detail::study_log_slope(log_t[p], log_mse[p]);
                srow.points = static_cast<int>(log_t[p].size());
                table.slopes.push_back(std::move(srow));
            }
        }
    }
    return table;
}

}  // namespace hawkes
