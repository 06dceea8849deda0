#include "qnoise/gaussian_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

namespace qnoise {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_mode(const CovMatrix& cov, int mode_index) {
    if (mode_index < 0 || mode_index >= cov.modes()) {
        throw std::out_of_range("mode index " + std::to_string(mode_index) + " out of range for " +
                                std::to_string(cov.modes()) + "-mode state");
    }
}

Eigen::MatrixXd symplectic_form(int modes) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
    for (int k = 0; k < modes; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

Eigen::VectorXd quadrature_direction(int modes, int mode_index, double theta) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * modes);
    u(2 * mode_index) = std::cos(theta);
    u(2 * mode_index + 1) = std::sin(theta);
    return u;
}

}  // namespace

CovMatrix::CovMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || (entries_.rows() != 2 && entries_.rows() != 4)) {
        throw std::invalid_argument("covariance matrix must be 2x2 or 4x4");
    }
    if (!entries_.allFinite()) {
        throw std::invalid_argument("covariance matrix has non-finite entries");
    }
    if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("covariance matrix is not symmetric");
    }
}

Eigen::VectorXd CovMatrix::symplectic_eigenvalues() const {
    // Omega V has eigenvalues +-i nu_k.
    const Eigen::MatrixXd ov = symplectic_form(modes()) * entries_;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(ov, /*computeEigenvectors=*/false);
    std::vector<double> magnitudes;
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
        magnitudes.push_back(std::abs(solver.eigenvalues()(k).imag()));
    }
    std::sort(magnitudes.begin(), magnitudes.end());
    Eigen::VectorXd nu(modes());
    for (int k = 0; k < modes(); ++k) {
        nu(k) = 0.5 * (magnitudes[2 * k] + magnitudes[2 * k + 1]);
    }
    return nu;
}

bool CovMatrix::is_physical(double tol) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> diag(entries_, Eigen::EigenvaluesOnly);
    if (diag.eigenvalues().minCoeff() <= 0.0) {
        return false;
    }
    return symplectic_eigenvalues().minCoeff() >= kVacuumVariance - tol;
}

double reduce_phase(double theta) {
    double reduced = std::fmod(theta, kTwoPi);
    if (reduced < 0.0) {
        reduced += kTwoPi;
    }
    // fmod of a tiny negative number can land exactly on 2pi after the shift.
    return reduced >= kTwoPi ? 0.0 : reduced;
}

QuadratureSpec QuadratureSpec::make(int mode_index, double theta) {
    return QuadratureSpec{mode_index, reduce_phase(theta)};
}

CovMatrix vacuum_cov(int modes) {
    if (modes != 1 && modes != 2) {
        throw std::invalid_argument("vacuum_cov: mode count must be 1 or 2, got " +
                                    std::to_string(modes));
    }
    return CovMatrix(kVacuumVariance * Eigen::MatrixXd::Identity(2 * modes, 2 * modes));
}

CovMatrix single_mode_squeezed_cov(double r) {
    if (!std::isfinite(r) || r < 0.0) {
        throw std::invalid_argument("squeezing parameter must be finite and >= 0");
    }
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2, 2);
    v(0, 0) = kVacuumVariance * std::exp(-2.0 * r);
    v(1, 1) = kVacuumVariance * std::exp(2.0 * r);
    return CovMatrix(std::move(v));
}

CovMatrix two_mode_squeezed_cov(double r) {
    if (!std::isfinite(r) || r < 0.0) {
        throw std::invalid_argument("squeezing parameter must be finite and >= 0");
    }
    const double c = kVacuumVariance * std::cosh(2.0 * r);
    const double s = kVacuumVariance * std::sinh(2.0 * r);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(4, 4);
    v(0, 0) = v(1, 1) = v(2, 2) = v(3, 3) = c;
    v(0, 2) = v(2, 0) = -s;
    v(1, 3) = v(3, 1) = s;
    return CovMatrix(std::move(v));
}

CovMatrix apply_loss(const CovMatrix& cov, int mode_index, double transmission) {
    check_mode(cov, mode_index);
    if (!(transmission >= 0.0 && transmission <= 1.0)) {
        throw std::invalid_argument("transmission must lie in [0, 1]");
    }
    // X = diag(sqrt t on the lossy mode, 1 elsewhere); V -> X V X + (1 - t)/2 on that block.
    Eigen::MatrixXd v = cov.entries();
    const double amp = std::sqrt(transmission);
    const int a = 2 * mode_index;
    v.row(a) *= amp;
    v.row(a + 1) *= amp;
    v.col(a) *= amp;
    v.col(a + 1) *= amp;
    v(a, a) += (1.0 - transmission) * kVacuumVariance;
    v(a + 1, a + 1) += (1.0 - transmission) * kVacuumVariance;
    return CovMatrix(std::move(v));
}

CovMatrix phase_rotate(const CovMatrix& cov, int mode_index, double phi) {
    check_mode(cov, mode_index);
    Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(cov.entries().rows(), cov.entries().cols());
    const int a = 2 * mode_index;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    rot(a, a) = c;
    rot(a, a + 1) = -s;
    rot(a + 1, a) = s;
    rot(a + 1, a + 1) = c;
    Eigen::MatrixXd v = rot * cov.entries() * rot.transpose();
    // Re-symmetrise to keep round-off from tripping the symmetry check.
    v = 0.5 * (v + v.transpose()).eval();
    return CovMatrix(std::move(v));
}

double quad_variance(const CovMatrix& cov, const QuadratureSpec& spec) {
    check_mode(cov, spec.mode_index);
    const Eigen::VectorXd u = quadrature_direction(cov.modes(), spec.mode_index, spec.theta);
    return std::max(0.0, u.dot(cov.entries() * u));
}

double joint_quad_variance(const CovMatrix& cov, double theta_p, double theta_c) {
    if (cov.modes() != 2) {
        throw std::invalid_argument("joint quadrature needs a two-mode state");
    }
    Eigen::VectorXd u = quadrature_direction(2, 0, theta_p) - quadrature_direction(2, 1, theta_c);
    return std::max(0.0, u.dot(cov.entries() * u));
}

LockedJointQuadrature lock_joint_quadrature(const CovMatrix& cov, double theta_p) {
    if (cov.modes() != 2) {
        throw std::invalid_argument("joint quadrature needs a two-mode state");
    }
    auto variance_at = [&](double theta_c) { return joint_quad_variance(cov, theta_p, theta_c); };

    // Coarse scan, then Brent refinement around the best grid point.
    constexpr int kGrid = 64;
    constexpr double kStep = kTwoPi / kGrid;
    int best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kGrid; ++k) {
        const double value = variance_at(k * kStep);
        if (value < best_value) {
            best_value = value;
            best = k;
        }
    }
    const double lo = (best - 1) * kStep;
    const double hi = (best + 1) * kStep;
    const auto [theta_c, value] = boost::math::tools::brent_find_minima(
        variance_at, lo, hi, std::numeric_limits<double>::digits / 2);
    if (value <= best_value) {
        return {reduce_phase(theta_p), reduce_phase(theta_c), value};
    }
    return {reduce_phase(theta_p), reduce_phase(best * kStep), best_value};
}

double r_from_lossless_db(double db) {
    return -db * std::log(10.0) / 20.0;
}

double lossless_db_from_r(double r) {
    return 10.0 * std::log10(std::exp(-2.0 * r));
}

}  // namespace qnoise
