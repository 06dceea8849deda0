#include "qnoise/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

namespace qnoise {

namespace {

// Rows of the least-squares pseudo-inverse: coefficients = P * y.
Eigen::MatrixXd polynomial_pseudo_inverse(const std::vector<double>& x, int degree) {
    const auto m = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd a(m, degree + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
        double power = 1.0;
        for (int j = 0; j <= degree; ++j) {
            a(i, j) = power;
            power *= x[static_cast<std::size_t>(i)];
        }
    }
    const auto qr = a.colPivHouseholderQr();
    if (qr.rank() < degree + 1) {
        throw std::invalid_argument("degenerate abscissae: polynomial fit is rank deficient");
    }
    return qr.solve(Eigen::MatrixXd::Identity(m, m));
}

struct MeanAndError {
    double mean = 0.0;
    double sem = 0.0;
    int count = 0;
};

MeanAndError mean_and_error(const std::vector<double>& values) {
    MeanAndError out;
    out.count = static_cast<int>(values.size());
    if (values.empty()) {
        return out;
    }
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / out.count;
    if (out.count > 1) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - out.mean) * (v - out.mean);
        }
        out.sem = std::sqrt(ss / (out.count - 1) / out.count);
    }
    return out;
}

Enhancement ratio_of_means(const std::vector<double>& classical, const std::vector<double>& quantum) {
    if (classical.empty() || quantum.empty()) {
        throw std::invalid_argument("enhancement needs sensitive points above the overlap threshold "
                                    "for both techniques");
    }
    const MeanAndError c = mean_and_error(classical);
    const MeanAndError q = mean_and_error(quantum);
    Enhancement out;
    out.classical_mean = c.mean;
    out.quantum_mean = q.mean;
    out.classical_count = c.count;
    out.quantum_count = q.count;
    out.factor = c.mean / q.mean;
    out.sigma = out.factor * std::hypot(c.sem / c.mean, q.sem / q.mean);
    return out;
}

}  // namespace

double NoiseCurve::value(double o) const {
    return coeffs[0] + o * (coeffs[1] + o * (coeffs[2] + o * coeffs[3]));
}

double NoiseCurve::slope(double o) const {
    return coeffs[1] + o * (2.0 * coeffs[2] + o * 3.0 * coeffs[3]);
}

NoiseCurve fit_noise_curve(std::vector<CurvePoint> points, Technique technique,
                           const FitOptions& options) {
    if (points.size() < 5) {
        throw std::invalid_argument("noise curve fit needs at least 5 points");
    }
    std::sort(points.begin(), points.end(),
              [](const CurvePoint& a, const CurvePoint& b) { return a.overlap < b.overlap; });
    for (std::size_t k = 0; k < points.size(); ++k) {
        const double o = points[k].overlap;
        if (!(o >= 0.0 && o <= 1.0)) {
            throw std::invalid_argument("curve overlaps must lie in [0, 1]");
        }
        if (k > 0 && !(o > points[k - 1].overlap)) {
            throw std::invalid_argument("degenerate abscissae: repeated overlap value");
        }
        if (!(points[k].n_sem >= 0.0)) {
            throw std::invalid_argument("curve point standard error must be >= 0");
        }
    }

    const std::size_t n = points.size();
    std::vector<std::size_t> upper;
    for (std::size_t k = 0; k < n; ++k) {
        if (points[k].overlap > options.line_threshold) {
            upper.push_back(k);
        }
    }
    if (upper.size() < 2) {
        throw std::invalid_argument("noise curve fit needs at least 2 points above the line "
                                    "threshold");
    }

    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        y(static_cast<Eigen::Index>(k)) = points[k].measurement.n;
    }

    // Stage one: line through the high-overlap subset, extrapolated to O = 1.
    std::vector<double> upper_x;
    for (std::size_t k : upper) {
        upper_x.push_back(points[k].overlap);
    }
    const Eigen::MatrixXd line_pinv = polynomial_pseudo_inverse(upper_x, 1);
    // synthetic = ell . y
    Eigen::RowVectorXd ell = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < upper.size(); ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        ell(static_cast<Eigen::Index>(upper[j])) = line_pinv(0, col) + line_pinv(1, col);
    }

    // Stage two: cubic through the points plus the synthetic one.
    std::vector<double> aug_x;
    for (const CurvePoint& p : points) {
        aug_x.push_back(p.overlap);
    }
    aug_x.push_back(1.0);
    const Eigen::MatrixXd cubic_pinv = polynomial_pseudo_inverse(aug_x, 3);
    const auto ni = static_cast<Eigen::Index>(n);
    // coeffs = M y with M = P[:, :n] + P[:, n] ell.
    const Eigen::MatrixXd m = cubic_pinv.leftCols(ni) + cubic_pinv.col(ni) * ell;

    NoiseCurve curve;
    curve.technique = technique;
    Eigen::VectorXd line_coeffs = Eigen::VectorXd::Zero(2);
    for (std::size_t j = 0; j < upper.size(); ++j) {
        line_coeffs += line_pinv.col(static_cast<Eigen::Index>(j)) *
                       points[upper[j]].measurement.n;
    }
    curve.line_intercept = line_coeffs(0);
    curve.line_slope = line_coeffs(1);
    curve.synthetic_n = curve.line_intercept + curve.line_slope;

    Eigen::VectorXd y_aug(ni + 1);
    y_aug << y, curve.synthetic_n;
    const Eigen::VectorXd c = cubic_pinv * y_aug;

    Eigen::VectorXd var = Eigen::VectorXd::Zero(ni);
    for (std::size_t k = 0; k < n; ++k) {
        var(static_cast<Eigen::Index>(k)) = points[k].n_sem * points[k].n_sem;
    }
    const Eigen::MatrixXd coeff_cov = m * var.asDiagonal() * m.transpose();
    for (int j = 0; j < 4; ++j) {
        curve.coeffs[static_cast<std::size_t>(j)] = c(j);
        curve.coeff_sigma[static_cast<std::size_t>(j)] = std::sqrt(std::max(0.0, coeff_cov(j, j)));
    }

    double ss = 0.0;
    for (std::size_t k = 0; k < aug_x.size(); ++k) {
        const double r = y_aug(static_cast<Eigen::Index>(k)) - curve.value(aug_x[k]);
        ss += r * r;
    }
    curve.residual_rms = std::sqrt(ss / static_cast<double>(aug_x.size()));
    curve.points = std::move(points);
    return curve;
}

InsensitivePointError::InsensitivePointError(double overlap, double slope)
    : std::domain_error([&] {
          std::ostringstream msg;
          msg << "insensitive point: |dN/dO| = " << std::abs(slope) << " at O = " << overlap
              << " is below the slope floor";
          return msg.str();
      }()),
      overlap_(overlap),
      slope_(slope) {}

double overlap_uncertainty(const NoiseCurve& curve, double o, double delta_n, double slope_floor) {
    const double slope = curve.slope(o);
    if (!(std::abs(slope) >= slope_floor)) {
        throw InsensitivePointError(o, slope);
    }
    return delta_n / std::abs(slope);
}

std::vector<DeltaOPoint> delta_o_table(const NoiseCurve& curve, double slope_floor) {
    std::vector<DeltaOPoint> out;
    out.reserve(curve.points.size());
    for (const CurvePoint& p : curve.points) {
        DeltaOPoint row;
        row.overlap = p.overlap;
        try {
            row.delta_o = overlap_uncertainty(curve, p.overlap, p.measurement.delta_n, slope_floor);
        } catch (const InsensitivePointError&) {
            row.sensitive = false;
            row.delta_o = 0.0;
        }
        out.push_back(row);
    }
    return out;
}

Enhancement enhancement(std::span<const DeltaOPoint> classical, std::span<const DeltaOPoint> quantum,
                        double threshold) {
    auto select = [threshold](std::span<const DeltaOPoint> rows) {
        std::vector<double> out;
        for (const DeltaOPoint& r : rows) {
            if (r.sensitive && r.overlap >= threshold) {
                out.push_back(r.delta_o);
            }
        }
        return out;
    };
    return ratio_of_means(select(classical), select(quantum));
}

AngleCalibration AngleCalibration::ideal_wedges(double half_angle) {
    if (!(half_angle > 0.0)) {
        throw std::invalid_argument("wedge half-angle must be > 0");
    }
    AngleCalibration cal;
    cal.half_angle_ = half_angle;
    return cal;
}

AngleCalibration AngleCalibration::from_lookup(std::vector<std::pair<double, double>> table) {
    if (table.size() < 2) {
        throw std::invalid_argument("angle calibration needs at least two points");
    }
    std::sort(table.begin(), table.end());
    AngleCalibration cal;
    for (std::size_t k = 0; k < table.size(); ++k) {
        const auto [delta, o] = table[k];
        if (delta < 0.0) {
            throw std::invalid_argument("angle calibration uses the delta >= 0 branch");
        }
        if (k > 0 && !(delta > table[k - 1].first)) {
            throw std::invalid_argument("angle calibration has a repeated angle");
        }
        if (k > 0 && !(o < table[k - 1].second)) {
            throw std::invalid_argument("angle calibration is not monotone on the small-angle "
                                        "branch");
        }
        cal.angles_.push_back(delta);
        cal.overlaps_.push_back(o);
    }

    // Three-point, non-uniform finite differences at the nodes.
    const std::size_t n = cal.angles_.size();
    const auto& x = cal.angles_;
    const auto& f = cal.overlaps_;
    cal.node_slopes_.resize(n);
    if (n == 2) {
        const double s = (f[1] - f[0]) / (x[1] - x[0]);
        cal.node_slopes_ = {s, s};
        return cal;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = std::clamp<std::size_t>(k, 1, n - 2);
        const double h1 = x[i] - x[i - 1];
        const double h2 = x[i + 1] - x[i];
        double d = 0.0;
        if (k == 0) {
            d = -(2 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] -
                h1 / (h2 * (h1 + h2)) * f[2];
        } else if (k == n - 1) {
            d = h2 / (h1 * (h1 + h2)) * f[n - 3] - (h1 + h2) / (h1 * h2) * f[n - 2] +
                (2 * h2 + h1) / (h2 * (h1 + h2)) * f[n - 1];
        } else {
            d = -h2 / (h1 * (h1 + h2)) * f[k - 1] + (h2 - h1) / (h1 * h2) * f[k] +
                h1 / (h2 * (h1 + h2)) * f[k + 1];
        }
        cal.node_slopes_[k] = d;
    }
    return cal;
}

double AngleCalibration::overlap_at(double delta) const {
    if (half_angle_ > 0.0) {
        return std::max(0.0, 1.0 - std::abs(delta) / (2.0 * half_angle_));
    }
    const double a = std::clamp(std::abs(delta), angles_.front(), angles_.back());
    const auto hi = std::upper_bound(angles_.begin(), angles_.end(), a);
    if (hi == angles_.end()) {
        return overlaps_.back();
    }
    const std::size_t k = static_cast<std::size_t>(hi - angles_.begin());
    const double t = (a - angles_[k - 1]) / (angles_[k] - angles_[k - 1]);
    return overlaps_[k - 1] + t * (overlaps_[k] - overlaps_[k - 1]);
}

double AngleCalibration::slope_at(double delta) const {
    if (half_angle_ > 0.0) {
        return -1.0 / (2.0 * half_angle_);
    }
    const double a = std::clamp(std::abs(delta), angles_.front(), angles_.back());
    const auto hi = std::upper_bound(angles_.begin(), angles_.end(), a);
    if (hi == angles_.end()) {
        return node_slopes_.back();
    }
    const std::size_t k = static_cast<std::size_t>(hi - angles_.begin());
    const double t = (a - angles_[k - 1]) / (angles_[k] - angles_[k - 1]);
    return node_slopes_[k - 1] + t * (node_slopes_[k] - node_slopes_[k - 1]);
}

double AngleCalibration::angle_at(double o) const {
    if (half_angle_ > 0.0) {
        return 2.0 * half_angle_ * (1.0 - std::clamp(o, 0.0, 1.0));
    }
    if (o >= overlaps_.front()) {
        return angles_.front();
    }
    if (o <= overlaps_.back()) {
        return angles_.back();
    }
    // overlaps_ is strictly decreasing.
    std::size_t k = 1;
    while (overlaps_[k] > o) {
        ++k;
    }
    const double t = (o - overlaps_[k - 1]) / (overlaps_[k] - overlaps_[k - 1]);
    return angles_[k - 1] + t * (angles_[k] - angles_[k - 1]);
}

double AngleCalibration::angle_uncertainty(double o, double delta_o) const {
    const double slope = slope_at(angle_at(o));
    if (slope == 0.0) {
        throw std::domain_error("angle calibration is flat at this overlap");
    }
    return delta_o / std::abs(slope);
}

Enhancement angle_enhancement(std::span<const DeltaOPoint> classical,
                              std::span<const DeltaOPoint> quantum,
                              const AngleCalibration& calibration, double threshold) {
    auto select = [&](std::span<const DeltaOPoint> rows) {
        std::vector<double> out;
        for (const DeltaOPoint& r : rows) {
            if (r.sensitive && r.overlap >= threshold) {
                out.push_back(calibration.angle_uncertainty(r.overlap, r.delta_o));
            }
        }
        return out;
    };
    return ratio_of_means(select(classical), select(quantum));
}

}  // namespace qnoise
