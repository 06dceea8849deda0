#pragma once

// Covariance-matrix algebra for one- and two-mode Gaussian states.
//
// Quadratures are ordered (x_0, p_0, x_1, p_1) and normalised so that the
// vacuum has variance 1/2 in every direction ([x, p] = i). Mode 0 is the
// probe, mode 1 the conjugate.

#include <Eigen/Dense>

namespace qnoise {

inline constexpr double kVacuumVariance = 0.5;

class CovMatrix {
  public:
    // Wraps a 2x2 or 4x4 matrix. Throws std::invalid_argument if the size is
    // wrong or the matrix is not symmetric to 1e-12.
    explicit CovMatrix(Eigen::MatrixXd entries);

    int modes() const { return static_cast<int>(entries_.rows() / 2); }
    const Eigen::MatrixXd& entries() const { return entries_; }
    double operator()(int row, int col) const { return entries_(row, col); }

    // Williamson spectrum: one value per mode, ascending. Vacuum gives 1/2.
    Eigen::VectorXd symplectic_eigenvalues() const;

    // Uncertainty principle V + (i/2) Omega >= 0, i.e. every symplectic
    // eigenvalue is at least 1/2 - tol.
    bool is_physical(double tol = 1e-9) const;

  private:
    Eigen::MatrixXd entries_;
};

struct QuadratureSpec {
    int mode_index = 0;
    double theta = 0.0;  // reduced to [0, 2pi) by make()

    static QuadratureSpec make(int mode_index, double theta);
};

double reduce_phase(double theta);

CovMatrix vacuum_cov(int modes);

// diag(e^{-2r}/2, e^{2r}/2): amplitude-squeezed single mode.
CovMatrix single_mode_squeezed_cov(double r);

// Two-mode squeezed vacuum. Each arm is thermal with variance cosh(2r)/2;
// the cross block is -sinh(2r)/2 * diag(1, -1) so that the joint quadrature
// x_p(theta_p) - x_c(theta_c) is squeezed to e^{-2r} when theta_p + theta_c = pi.
CovMatrix two_mode_squeezed_cov(double r);

// Beamsplitter admixture of vacuum with power transmission t on one mode.
CovMatrix apply_loss(const CovMatrix& cov, int mode_index, double transmission);

// Rotates the quadrature frame of one mode by phi.
CovMatrix phase_rotate(const CovMatrix& cov, int mode_index, double phi);

double quad_variance(const CovMatrix& cov, const QuadratureSpec& spec);

// Var(x_p(theta_p) - x_c(theta_c)) for a two-mode state.
double joint_quad_variance(const CovMatrix& cov, double theta_p, double theta_c);

struct LockedJointQuadrature {
    double theta_p = 0.0;
    double theta_c = 0.0;
    double variance = 0.0;
};

// Holds theta_p fixed and scans theta_c for the minimum joint variance, the
// same single-actuator lock the experiment uses.
LockedJointQuadrature lock_joint_quadrature(const CovMatrix& cov, double theta_p = 0.0);

// Lossless map between a squeezing level in dB (negative below the SNL) and
// the squeezing parameter: 10 log10 e^{-2r} = db.
double r_from_lossless_db(double db);
double lossless_db_from_r(double r);

}  // namespace qnoise
