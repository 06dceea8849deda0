#pragma once

// Zero-span spectrum-analyser traces and their reduction to a noise power N
// with uncertainty Delta N.
//
// Each displayed point averages `samples_per_point` squared Gaussian
// quadrature samples (chi-square, one degree of freedom each), scaled so the
// mean is the true noise power. Displayed points are then smoothed by
// y_k = rho y_{k-1} + (1 - rho) x_k, standing in for the video filter. The
// first point starts in the stationary state.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qnoise/noise_model.hpp"

namespace qnoise {

struct AcquisitionConfig {
    int points_per_trace = 460;
    int segment_length = 10;
    int samples_per_point = 300;
    // rho = 0.5: the point autocorrelation rho^k drops below 5% within five
    // points, and ten-point segment means are nearly independent.
    double point_correlation = 0.5;
    std::uint64_t rng_seed = 1;

    int segments() const { return points_per_trace / segment_length; }
    void validate() const;
};

struct Trace {
    std::vector<double> values;  // SNL units
    AcquisitionConfig config;
    double true_n = 0.0;
};

// Deterministic in (n_true, cfg). Values are exactly n_true times the trace
// generated for n_true = 1 with the same seed.
Trace simulate_trace(double n_true, const AcquisitionConfig& cfg);

// n = mean of all points; delta_n = sample standard deviation (n - 1) of the
// segment means.
NoiseMeasurement segment_stats(const Trace& trace, Technique technique = Technique::quantum);

// n_series independent traces; series k uses the seed derived from
// (cfg.rng_seed, "series", k).
std::vector<NoiseMeasurement> measure_series(double n_true, const AcquisitionConfig& cfg,
                                             int n_series,
                                             Technique technique = Technique::quantum);

// "index,value" rows with a header.
void write_trace_csv(std::ostream& out, const Trace& trace);

}  // namespace qnoise
