#pragma once

#include <algorithm>
#include <variant>
#include <vector>

#include "hawkes/kernels.hpp"

namespace hawkes {

// Bounded piecewise-constant immigration intensity: values[i] applies on
// [knots[i-1], knots[i]), with values.front() before the first knot and
// values.back() from the last knot on.
struct PiecewiseConstantIntensity {
    std::vector<double> knots;
    std::vector<double> values;

    double operator()(double t) const {
        auto it = std::upper_bound(knots.begin(), knots.end(), t);
        return values[static_cast<std::size_t>(it - knots.begin())];
    }
    double bound() const { return *std::max_element(values.begin(), values.end()); }
};

using Immigration = std::variant<double, PiecewiseConstantIntensity>;

struct HawkesModel {
    Immigration eta;
    double mu;  // branching ratio, must lie in (0, 1) for stationarity
    ReproductionKernel kernel;
};

inline void validate(const HawkesModel& model) {
    require(model.mu >= 0.0 && model.mu < 1.0 && std::isfinite(model.mu),
            "HawkesModel: mu must lie in [0, 1)");
    if (const double* c = std::get_if<double>(&model.eta)) {
        require(*c > 0.0 && std::isfinite(*c), "HawkesModel: constant eta must be > 0");
    } else {
        const auto& pw = std::get<PiecewiseConstantIntensity>(model.eta);
        require(pw.values.size() == pw.knots.size() + 1,
                "HawkesModel: piecewise eta needs one more value than knots");
        require(std::is_sorted(pw.knots.begin(), pw.knots.end()),
                "HawkesModel: piecewise eta knots must be sorted");
        for (double v : pw.values)
            require(v >= 0.0 && std::isfinite(v), "HawkesModel: eta values must be finite and >= 0");
    }
    validate(model.kernel);
}

inline bool has_constant_eta(const HawkesModel& model) {
    return std::holds_alternative<double>(model.eta);
}

inline double constant_eta(const HawkesModel& model) {
    require(has_constant_eta(model), "operation requires a constant immigration intensity");
    return std::get<double>(model.eta);
}

// m = E[N(0,1]] = eta/(1-mu), the stationary mean event rate.
inline double mean_intensity(const HawkesModel& model) {
    return constant_eta(model) / (1.0 - model.mu);
}

}  // namespace hawkes
