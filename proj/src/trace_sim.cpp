#include "qnoise/trace_sim.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "qnoise/seeding.hpp"

namespace qnoise {

void AcquisitionConfig::validate() const {
    if (points_per_trace < 2 || segment_length < 1) {
        throw std::invalid_argument("points_per_trace must be >= 2 and segment_length >= 1");
    }
    if (points_per_trace % segment_length != 0) {
        throw std::invalid_argument("points_per_trace must be divisible by segment_length");
    }
    if (segments() < 2) {
        throw std::invalid_argument("a trace needs at least two segments");
    }
    if (samples_per_point < 1) {
        throw std::invalid_argument("samples_per_point must be >= 1");
    }
    if (!(point_correlation >= 0.0 && point_correlation < 1.0)) {
        throw std::invalid_argument("point_correlation must lie in [0, 1)");
    }
}

Trace simulate_trace(double n_true, const AcquisitionConfig& cfg) {
    cfg.validate();
    if (!(n_true > 0.0) || !std::isfinite(n_true)) {
        throw std::invalid_argument("true noise power must be finite and > 0");
    }
    std::mt19937_64 rng(cfg.rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Unit-mean point: E[g^2] = 1.
    auto averaged_point = [&] {
        double sum = 0.0;
        for (int s = 0; s < cfg.samples_per_point; ++s) {
            const double g = gauss(rng);
            sum += g * g;
        }
        return sum / cfg.samples_per_point;
    };

    const double rho = cfg.point_correlation;
    const double stationary_scale = std::sqrt((1.0 - rho) / (1.0 + rho));

    Trace trace;
    trace.config = cfg;
    trace.true_n = n_true;
    trace.values.resize(static_cast<std::size_t>(cfg.points_per_trace));
    double y = 1.0 + (averaged_point() - 1.0) * stationary_scale;
    trace.values[0] = n_true * y;
    for (std::size_t k = 1; k < trace.values.size(); ++k) {
        y = rho * y + (1.0 - rho) * averaged_point();
        trace.values[k] = n_true * y;
    }
    return trace;
}

NoiseMeasurement segment_stats(const Trace& trace, Technique technique) {
    const AcquisitionConfig& cfg = trace.config;
    if (cfg.segment_length < 1 || trace.values.empty() ||
        trace.values.size() % static_cast<std::size_t>(cfg.segment_length) != 0) {
        throw std::invalid_argument("trace length is not a multiple of the segment length");
    }
    const std::size_t len = static_cast<std::size_t>(cfg.segment_length);
    const std::size_t segments = trace.values.size() / len;
    if (segments < 2) {
        throw std::invalid_argument("a trace needs at least two segments");
    }
    std::vector<double> means(segments);
    for (std::size_t s = 0; s < segments; ++s) {
        const auto first = trace.values.begin() + static_cast<std::ptrdiff_t>(s * len);
        means[s] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(len), 0.0) /
                   static_cast<double>(len);
    }
    const double n = std::accumulate(means.begin(), means.end(), 0.0) /
                     static_cast<double>(segments);
    double ss = 0.0;
    for (double m : means) {
        ss += (m - n) * (m - n);
    }
    NoiseMeasurement out;
    out.n = n;
    out.delta_n = std::sqrt(ss / static_cast<double>(segments - 1));
    out.valid = true;
    out.technique = technique;
    return out;
}

std::vector<NoiseMeasurement> measure_series(double n_true, const AcquisitionConfig& cfg,
                                             int n_series, Technique technique) {
    if (n_series < 1) {
        throw std::invalid_argument("n_series must be >= 1");
    }
    std::vector<NoiseMeasurement> out;
    out.reserve(static_cast<std::size_t>(n_series));
    for (int k = 0; k < n_series; ++k) {
        AcquisitionConfig series_cfg = cfg;
        series_cfg.rng_seed = derive_seed(cfg.rng_seed, "series", static_cast<std::uint64_t>(k));
        out.push_back(segment_stats(simulate_trace(n_true, series_cfg), technique));
    }
    return out;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
    out << "index,value\n";
    for (std::size_t k = 0; k < trace.values.size(); ++k) {
        out << fmt::format("{},{:.12g}\n", k, trace.values[k]);
    }
}

}  // namespace qnoise
