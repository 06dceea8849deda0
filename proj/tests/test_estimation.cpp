#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qnoise/estimation.hpp"
#include "qnoise/noise_model.hpp"
#include "qnoise/seeding.hpp"
#include "qnoise/trace_sim.hpp"

using namespace qnoise;

namespace {

constexpr double kR = 0.2532843602293451;

CurvePoint point(double o, double n, double delta_n = 0.01, double sem = 0.001) {
    CurvePoint p;
    p.overlap = o;
    p.measurement.n = n;
    p.measurement.delta_n = delta_n;
    p.n_sem = sem;
    return p;
}

std::vector<double> grid15() {
    std::vector<double> o;
    for (int k = 0; k < 15; ++k) {
        o.push_back(1.0 - k / 15.0);
    }
    return o;
}

// Noise-free curve from the model, with delta_n proportional to N.
NoiseCurve exact_curve(Technique technique, const TwinBeamParams& p, double rel = 0.024) {
    std::vector<CurvePoint> pts;
    for (double o : grid15()) {
        const double n = noise(technique, CellDecomposition::binary(o), p);
        pts.push_back(point(o, n, rel * n, 0.0));
    }
    return fit_noise_curve(pts, technique);
}

double cubic(const std::array<double, 4>& c, double o) {
    return c[0] + o * (c[1] + o * (c[2] + o * c[3]));
}

}  // namespace

TEST(Fit, LineIsReproduced) {
    std::vector<CurvePoint> pts;
    for (double o : grid15()) {
        pts.push_back(point(o, 0.7 + 0.25 * o));
    }
    const NoiseCurve c = fit_noise_curve(pts, Technique::classical);
    EXPECT_NEAR(c.coeffs[0], 0.7, 1e-9);
    EXPECT_NEAR(c.coeffs[1], 0.25, 1e-9);
    EXPECT_LT(std::abs(c.coeffs[2]), 1e-9);
    EXPECT_LT(std::abs(c.coeffs[3]), 1e-9);
    EXPECT_LT(c.residual_rms, 1e-12);
}

TEST(Fit, SyntheticPointIsTheHighOverlapLine) {
    std::vector<CurvePoint> pts;
    for (double o : grid15()) {
        pts.push_back(point(o, 1.0 - 0.3 * o * o));
    }
    const NoiseCurve c = fit_noise_curve(pts, Technique::quantum);
    // Independent least-squares line over the O > 0.8 subset.
    std::vector<double> xs, ys;
    for (const CurvePoint& p : c.points) {
        if (p.overlap > 0.8) {
            xs.push_back(p.overlap);
            ys.push_back(p.measurement.n);
        }
    }
    ASSERT_GE(xs.size(), 2u);
    const double count = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / count;
        my += ys[i] / count;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    EXPECT_NEAR(c.line_slope, slope, 1e-12);
    EXPECT_NEAR(c.synthetic_n, my + slope * (1.0 - mx), 1e-12);
    EXPECT_DOUBLE_EQ(c.synthetic_n, c.line_intercept + c.line_slope);
}

TEST(Fit, Preconditions) {
    std::vector<CurvePoint> few{point(0.9, 1), point(0.95, 1), point(1.0, 1), point(0.2, 1)};
    EXPECT_THROW(fit_noise_curve(few, Technique::quantum), std::invalid_argument);
    std::vector<CurvePoint> low{point(0.1, 1), point(0.2, 1), point(0.3, 1), point(0.4, 1),
                                point(0.9, 1)};
    EXPECT_THROW(fit_noise_curve(low, Technique::quantum), std::invalid_argument);
    std::vector<CurvePoint> repeated{point(0.1, 1), point(0.1, 1), point(0.3, 1),
                                     point(0.85, 1), point(0.9, 1)};
    EXPECT_THROW(fit_noise_curve(repeated, Technique::quantum), std::invalid_argument);
    std::vector<CurvePoint> outside{point(0.1, 1), point(0.2, 1), point(0.3, 1),
                                    point(0.85, 1), point(1.2, 1)};
    EXPECT_THROW(fit_noise_curve(outside, Technique::quantum), std::invalid_argument);
}

TEST(Fit, PointsAreSorted) {
    std::vector<CurvePoint> pts;
    for (double o : grid15()) {
        pts.push_back(point(o, 1 + o));
    }
    const NoiseCurve c = fit_noise_curve(pts, Technique::classical);
    for (std::size_t k = 1; k < c.points.size(); ++k) {
        EXPECT_LT(c.points[k - 1].overlap, c.points[k].overlap);
    }
}

TEST(Fit, ClassicalSlopeMatchesModel) {
    // Full pipeline on binary cells: ten traces per overlap, shared seeds
    // across overlaps.
    TwinBeamParams p;
    p.r = kR;
    p.lock_noise = 0.0;
    std::vector<CurvePoint> pts;
    int k = 0;
    for (double o : grid15()) {
        const double n_true = classical_noise(CellDecomposition::binary(o), p);
        std::vector<double> ns;
        double dn = 0.0;
        for (int s = 0; s < 10; ++s) {
            AcquisitionConfig cfg;
            cfg.rng_seed = derive_seed(99, "fit-test", static_cast<std::uint64_t>(k * 100 + s));
            const NoiseMeasurement m = segment_stats(simulate_trace(n_true, cfg));
            ns.push_back(m.n);
            dn += m.delta_n / 10;
        }
        double mean = 0.0, ss = 0.0;
        for (double v : ns) {
            mean += v / 10;
        }
        for (double v : ns) {
            ss += (v - mean) * (v - mean);
        }
        pts.push_back(point(o, mean, dn, std::sqrt(ss / 9 / 10)));
        ++k;
    }
    const NoiseCurve c = fit_noise_curve(pts, Technique::classical);
    // Conservative propagated error of N'(1) = c1 + 2 c2 + 3 c3.
    const double sigma = c.coeff_sigma[1] + 2 * c.coeff_sigma[2] + 3 * c.coeff_sigma[3];
    EXPECT_LT(std::abs(c.slope(1.0) - (std::cosh(2 * kR) - 1)), 2 * sigma);
    EXPECT_LT(std::abs(c.coeffs[2]), 3 * c.coeff_sigma[2]);
    EXPECT_LT(std::abs(c.coeffs[3]), 3 * c.coeff_sigma[3]);
}

TEST(Fit, CoefficientErrorsMatchMonteCarlo) {
    // Gaussian noise of known SEM on a fixed cubic: the propagated sigmas
    // should match the scatter of refitted coefficients.
    const std::array<double, 4> truth{1.05, -0.4, -0.1, 0.05};
    const double sem = 0.004;
    std::mt19937_64 rng(17);
    std::normal_distribution<double> noise_draw(0.0, sem);
    std::array<double, 4> sum{}, sum_sq{};
    std::array<double, 4> propagated{};
    constexpr int kTrials = 2000;
    for (int t = 0; t < kTrials; ++t) {
        std::vector<CurvePoint> pts;
        for (double o : grid15()) {
            pts.push_back(point(o, cubic(truth, o) + noise_draw(rng), 0.02, sem));
        }
        const NoiseCurve c = fit_noise_curve(pts, Technique::quantum);
        for (int j = 0; j < 4; ++j) {
            sum[j] += c.coeffs[j];
            sum_sq[j] += c.coeffs[j] * c.coeffs[j];
        }
        propagated = c.coeff_sigma;
    }
    for (int j = 0; j < 4; ++j) {
        const double mean = sum[j] / kTrials;
        const double sd = std::sqrt(sum_sq[j] / kTrials - mean * mean);
        EXPECT_NEAR(sd / propagated[j], 1.0, 0.08) << j;
    }
}

TEST(OverlapUncertainty, LinearInDeltaN) {
    TwinBeamParams p;
    p.r = kR;
    p.lock_noise = 0.0;
    const NoiseCurve q = exact_curve(Technique::quantum, p);
    const double a = overlap_uncertainty(q, 0.95, 0.01);
    EXPECT_NEAR(overlap_uncertainty(q, 0.95, 0.02), 2 * a, 1e-15);
    EXPECT_GT(a, 0.0);
}

TEST(OverlapUncertainty, FlatCurveIsInsensitive) {
    std::vector<CurvePoint> pts;
    for (double o : grid15()) {
        pts.push_back(point(o, 1.0));
    }
    const NoiseCurve flat = fit_noise_curve(pts, Technique::quantum);
    EXPECT_THROW(overlap_uncertainty(flat, 0.95, 0.01), InsensitivePointError);
    try {
        overlap_uncertainty(flat, 0.5, 0.01);
    } catch (const InsensitivePointError& e) {
        EXPECT_DOUBLE_EQ(e.overlap(), 0.5);
        EXPECT_LT(std::abs(e.slope()), kDefaultSlopeFloor);
    }
    const auto table = delta_o_table(flat);
    for (const DeltaOPoint& row : table) {
        EXPECT_FALSE(row.sensitive);
    }
}

TEST(OverlapUncertainty, AnalyticRatioAtFullOverlap) {
    // N / |N'| at O = 1: quantum e^{-2r} / (cosh^2 r - e^{-2r}), classical
    // cosh 2r / (cosh 2r - 1). Frozen values at r = kR.
    TwinBeamParams p;
    p.r = kR;
    p.lock_noise = 0.0;
    const NoiseCurve q = exact_curve(Technique::quantum, p);
    const NoiseCurve c = exact_curve(Technique::classical, p);
    const double dq = overlap_uncertainty(q, 1.0, q.value(1.0));
    const double dc = overlap_uncertainty(c, 1.0, c.value(1.0));
    EXPECT_NEAR(dq, 1.301489139901332, 1e-8);
    EXPECT_NEAR(dc, 8.62932196119217, 1e-8);
    EXPECT_NEAR(dc / dq, 6.630344961500311, 1e-7);
}

TEST(Enhancement, IdenticalInputsGiveOne) {
    std::vector<DeltaOPoint> rows{{0.9, 0.1, true}, {0.95, 0.12, true}, {1.0, 0.11, true}};
    const Enhancement e = enhancement(rows, rows);
    EXPECT_DOUBLE_EQ(e.factor, 1.0);
    EXPECT_EQ(e.classical_count, 3);
}

TEST(Enhancement, SelectsSensitiveHighOverlapPoints) {
    std::vector<DeltaOPoint> c{{0.5, 100.0, true}, {0.92, 0.6, true}, {1.0, 0.8, true},
                               {0.95, 1e6, false}};
    std::vector<DeltaOPoint> q{{0.5, 1.0, true}, {0.92, 0.1, true}, {1.0, 0.1, true}};
    const Enhancement e = enhancement(c, q);
    EXPECT_DOUBLE_EQ(e.factor, 7.0);
    EXPECT_EQ(e.classical_count, 2);
    // SEMs: classical 0.1, quantum 0.
    EXPECT_NEAR(e.sigma, 7.0 * 0.1 / 0.7, 1e-12);
    std::vector<DeltaOPoint> none{{0.5, 1.0, true}};
    EXPECT_THROW(enhancement(none, q), std::invalid_argument);
}

TEST(Enhancement, LockNoiseReducesIt) {
    TwinBeamParams p;
    p.r = kR;
    p.lock_noise = 0.0;
    auto factor = [](const TwinBeamParams& params) {
        const auto c = delta_o_table(exact_curve(Technique::classical, params));
        const auto q = delta_o_table(exact_curve(Technique::quantum, params));
        return enhancement(c, q).factor;
    };
    const double clean = factor(p);
    p.lock_noise = 0.02;
    const double locked = factor(p);
    EXPECT_LT(locked, clean);
    EXPECT_GT(locked, 1.0);
}

TEST(Enhancement, AtLeastOneWhenBalancedAndClean) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 25; ++i) {
        TwinBeamParams p;
        p.r = 0.02 + 1.5 * u(rng);
        p.t_probe = p.t_conj = 0.3 + 0.7 * u(rng);
        p.lock_noise = 0.0;
        const auto c = delta_o_table(exact_curve(Technique::classical, p));
        const auto q = delta_o_table(exact_curve(Technique::quantum, p));
        EXPECT_GE(enhancement(c, q).factor, 1.0) << p.r << " " << p.t_probe;
    }
}

TEST(Pipeline, RecoversAnalyticDeltaO) {
    // Synthetic data from a known cubic with known delta_n.
    const std::array<double, 4> truth{1.0655, -0.3, -0.12, -0.04};
    const double sem = 0.003;
    const double delta_n = 0.015;
    std::mt19937_64 rng(8);
    std::normal_distribution<double> draw(0.0, sem);
    const double o = 0.95;
    const double slope = truth[1] + 2 * truth[2] * o + 3 * truth[3] * o * o;
    const double analytic = delta_n / std::abs(slope);
    double total = 0.0;
    for (int s = 0; s < 100; ++s) {
        std::vector<CurvePoint> pts;
        for (double x : grid15()) {
            pts.push_back(point(x, cubic(truth, x) + draw(rng), delta_n, sem));
        }
        total += overlap_uncertainty(fit_noise_curve(pts, Technique::quantum), o, delta_n);
    }
    EXPECT_NEAR(total / 100 / analytic, 1.0, 0.10);
}

TEST(AngleCalibration, IdealWedges) {
    const double alpha = 0.3927;
    const AngleCalibration cal = AngleCalibration::ideal_wedges(alpha);
    EXPECT_DOUBLE_EQ(cal.overlap_at(0.0), 1.0);
    EXPECT_NEAR(cal.overlap_at(alpha), 0.5, 1e-15);
    EXPECT_NEAR(cal.angle_at(0.75), alpha / 2, 1e-15);
    EXPECT_NEAR(cal.slope_at(0.1), -1 / (2 * alpha), 1e-15);

    std::vector<DeltaOPoint> c{{0.9, 0.5, true}, {0.96, 0.7, true}};
    std::vector<DeltaOPoint> q{{0.9, 0.1, true}, {0.96, 0.08, true}};
    EXPECT_NEAR(angle_enhancement(c, q, cal).factor, enhancement(c, q).factor, 1e-12);
    EXPECT_THROW(AngleCalibration::ideal_wedges(0.0), std::invalid_argument);
}

TEST(AngleCalibration, LookupInterpolates) {
    std::vector<std::pair<double, double>> table;
    for (int k = 0; k < 8; ++k) {
        const double d = 0.05 * k;
        table.emplace_back(d, 1.0 - 0.8 * d);
    }
    const AngleCalibration cal = AngleCalibration::from_lookup(table);
    EXPECT_NEAR(cal.overlap_at(0.0), 1.0, 1e-15);
    EXPECT_NEAR(cal.overlap_at(0.123), 1.0 - 0.8 * 0.123, 1e-12);
    EXPECT_NEAR(cal.slope_at(0.123), -0.8, 1e-12);
    EXPECT_NEAR(cal.angle_at(cal.overlap_at(0.2)), 0.2, 1e-12);
    EXPECT_NEAR(cal.angle_uncertainty(0.9, 0.08), 0.1, 1e-12);
}

TEST(AngleCalibration, RejectsNonMonotoneLookup) {
    EXPECT_THROW(AngleCalibration::from_lookup({{0.0, 1.0}, {0.1, 0.9}, {0.2, 0.95}}),
                 std::invalid_argument);
    EXPECT_THROW(AngleCalibration::from_lookup({{0.0, 1.0}, {0.0, 0.9}}), std::invalid_argument);
    EXPECT_THROW(AngleCalibration::from_lookup({{-0.1, 1.0}, {0.1, 0.9}}),
                 std::invalid_argument);
    EXPECT_THROW(AngleCalibration::from_lookup({{0.0, 1.0}}), std::invalid_argument);
}

TEST(AngleCalibration, CurvedCalibrationSeparatesTheFactors) {
    // A calibration that steepens away from delta = 0 (as a peaked beam
    // profile gives) weights the O >= 0.9 points unequally.
    std::vector<std::pair<double, double>> table;
    for (int k = 0; k < 15; ++k) {
        const double d = 0.02 * k;
        table.emplace_back(d, 1.0 - 0.5 * d - 3.0 * d * d);
    }
    const AngleCalibration cal = AngleCalibration::from_lookup(table);
    std::vector<DeltaOPoint> c{{1.0, 0.30, true}, {0.98, 0.32, true}, {0.95, 0.36, true}};
    std::vector<DeltaOPoint> q{{1.0, 0.03, true}, {0.98, 0.06, true}, {0.95, 0.09, true}};
    const double overlap_factor = enhancement(c, q).factor;
    const double angle_factor = angle_enhancement(c, q, cal).factor;
    EXPECT_GT(std::abs(angle_factor - overlap_factor), 0.05 * overlap_factor);
}
