#pragma once

// Reduction of swept noise measurements to overlap sensitivity: the two-stage
// polynomial fit of N(O), Delta O_est = Delta N / |dN/dO|, and the
// classical-to-quantum enhancement in overlap and in angle.

#include <array>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qnoise/noise_model.hpp"

namespace qnoise {

struct CurvePoint {
    double overlap = 0.0;
    NoiseMeasurement measurement;  // n and the per-measurement delta_n
    double n_sem = 0.0;            // standard error of n, used for coefficient errors
};

struct NoiseCurve {
    std::vector<CurvePoint> points;  // sorted by overlap, strictly increasing
    Technique technique = Technique::quantum;

    // N(O) = c0 + c1 O + c2 O^2 + c3 O^3, with one-sigma errors propagated
    // from the points' n_sem through both fit stages.
    std::array<double, 4> coeffs{};
    std::array<double, 4> coeff_sigma{};

    // Stage one: least-squares line over O > 0.8, evaluated at O = 1.
    double line_intercept = 0.0;
    double line_slope = 0.0;
    double synthetic_n = 0.0;

    double residual_rms = 0.0;

    double value(double o) const;
    double slope(double o) const;
};

struct FitOptions {
    double line_threshold = 0.8;  // stage-one subset is O > line_threshold
};

// Throws std::invalid_argument for fewer than five points, fewer than two
// points above the line threshold, overlaps outside [0, 1], or repeated
// overlaps.
NoiseCurve fit_noise_curve(std::vector<CurvePoint> points, Technique technique,
                           const FitOptions& options = {});

class InsensitivePointError : public std::domain_error {
  public:
    InsensitivePointError(double overlap, double slope);
    double overlap() const { return overlap_; }
    double slope() const { return slope_; }

  private:
    double overlap_;
    double slope_;
};

inline constexpr double kDefaultSlopeFloor = 1e-3;

// Delta O_est = delta_n / |N'(O)|. Throws InsensitivePointError when |N'(O)|
// is below slope_floor.
double overlap_uncertainty(const NoiseCurve& curve, double o, double delta_n,
                           double slope_floor = kDefaultSlopeFloor);

struct DeltaOPoint {
    double overlap = 0.0;
    double delta_o = 0.0;
    bool sensitive = true;  // false: |N'| below the floor, delta_o is not meaningful
};

// Delta O_est at every curve point, using that point's delta_n.
std::vector<DeltaOPoint> delta_o_table(const NoiseCurve& curve,
                                       double slope_floor = kDefaultSlopeFloor);

struct Enhancement {
    double factor = 0.0;
    double sigma = 0.0;
    double classical_mean = 0.0;
    double quantum_mean = 0.0;
    int classical_count = 0;
    int quantum_count = 0;
};

// Ratio of the mean classical to mean quantum uncertainty over sensitive
// points with O >= threshold. Sigma combines the standard errors of both
// means in quadrature. Throws std::invalid_argument if either side has no
// such point.
Enhancement enhancement(std::span<const DeltaOPoint> classical, std::span<const DeltaOPoint> quantum,
                        double threshold = 0.9);

// Overlap as a function of the bow tie rotation on the small-angle branch
// (delta >= 0), invertible there.
class AngleCalibration {
  public:
    // O(delta) = 1 - |delta| / (2 alpha), clamped at zero.
    static AngleCalibration ideal_wedges(double half_angle);

    // Measured (delta, O) pairs. Rejects negative angles, repeated angles and
    // any pair that is not strictly decreasing in O.
    static AngleCalibration from_lookup(std::vector<std::pair<double, double>> table);

    double overlap_at(double delta) const;
    double slope_at(double delta) const;  // dO/d(delta)
    double angle_at(double o) const;      // inverse on the branch

    // Delta delta_est = Delta O_est / |dO/d(delta)| at the angle that gives o.
    double angle_uncertainty(double o, double delta_o) const;

  private:
    AngleCalibration() = default;

    double half_angle_ = 0.0;  // > 0 for the analytic form
    std::vector<double> angles_;
    std::vector<double> overlaps_;
    std::vector<double> node_slopes_;
};

// Same ratio of means as enhancement(), after mapping each Delta O_est to an
// angle uncertainty through the calibration.
Enhancement angle_enhancement(std::span<const DeltaOPoint> classical,
                              std::span<const DeltaOPoint> quantum,
                              const AngleCalibration& calibration, double threshold = 0.9);

}  // namespace qnoise
