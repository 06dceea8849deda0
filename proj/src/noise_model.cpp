#include "qnoise/noise_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "qnoise/gaussian_core.hpp"

namespace qnoise {

namespace {

constexpr int kProbe = 0;
constexpr int kConj = 1;

void require_fraction(double value, const char* field) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::invalid_argument(std::string(field) + " must lie in [0, 1]");
    }
}

// Per-cell variances only depend on T_i; binary and coarse-grid
// decompositions repeat the same few values many times.
template <typename CellVariance>
double weighted_cell_sum(const CellDecomposition& decomposition, CellVariance&& variance) {
    std::unordered_map<double, double> memo;
    double sum = 0.0;
    for (const Cell& cell : decomposition.cells) {
        auto it = memo.find(cell.transmission);
        if (it == memo.end()) {
            it = memo.emplace(cell.transmission, variance(cell.transmission)).first;
        }
        sum += cell.weight * it->second;
    }
    return sum;
}

}  // namespace

std::string_view to_string(Technique technique) {
    return technique == Technique::classical ? "classical" : "quantum";
}

void TwinBeamParams::validate() const {
    if (!std::isfinite(r) || r < 0.0) {
        throw std::invalid_argument("r must be finite and >= 0");
    }
    require_fraction(t_probe, "t_probe");
    require_fraction(t_conj, "t_conj");
    if (!std::isfinite(lock_noise) || lock_noise < 0.0) {
        throw std::invalid_argument("lock_noise must be finite and >= 0");
    }
    if (!std::isfinite(electronic_floor) || electronic_floor < 0.0) {
        throw std::invalid_argument("electronic_floor must be finite and >= 0");
    }
}

double twin_beam_snl() {
    return joint_quad_variance(vacuum_cov(2), 0.0, std::numbers::pi);
}

double single_beam_snl() {
    return quad_variance(vacuum_cov(1), QuadratureSpec::make(0, 0.0));
}

double quantum_noise(const CellDecomposition& decomposition, const TwinBeamParams& params) {
    params.validate();
    decomposition.validate();
    const CovMatrix source = apply_loss(two_mode_squeezed_cov(params.r), kProbe, params.t_probe);
    const double snl = twin_beam_snl();
    const double sum = weighted_cell_sum(decomposition, [&](double transmission) {
        const CovMatrix cell = apply_loss(source, kConj, params.t_conj * transmission);
        return lock_joint_quadrature(cell).variance;
    });
    return sum / snl + params.lock_noise;
}

double classical_noise(const CellDecomposition& decomposition, const TwinBeamParams& params) {
    params.validate();
    decomposition.validate();
    const CovMatrix source = two_mode_squeezed_cov(params.r);
    const double snl = single_beam_snl();
    const double sum = weighted_cell_sum(decomposition, [&](double transmission) {
        const CovMatrix cell = apply_loss(source, kConj, params.t_conj * transmission);
        // The conjugate alone is thermal, so any LO phase will do.
        return quad_variance(cell, QuadratureSpec::make(kConj, 0.0));
    });
    return sum / snl;
}

double noise(Technique technique, const CellDecomposition& decomposition,
             const TwinBeamParams& params) {
    return technique == Technique::quantum ? quantum_noise(decomposition, params)
                                           : classical_noise(decomposition, params);
}

bool lo_power_check(const Bitmap& lo, const TwinBeamParams& params, double power_per_pixel) {
    const std::size_t pixels = lo.count();
    if (pixels == 0) {
        return false;
    }
    return static_cast<double>(pixels) * power_per_pixel >= params.electronic_floor;
}

double detected_noise(const TwinBeamParams& params) {
    return quantum_noise(CellDecomposition::uniform(1.0), params);
}

double to_db(double n) {
    return 10.0 * std::log10(n);
}

double calibrate_detected_r(double target_db, TwinBeamParams params) {
    if (!std::isfinite(target_db)) {
        throw std::invalid_argument("target squeezing must be finite");
    }
    params.r = 0.0;
    params.validate();
    const double target = std::pow(10.0, target_db / 10.0);
    auto detected = [&](double r) {
        TwinBeamParams p = params;
        p.r = r;
        return detected_noise(p);
    };

    const double at_zero = detected(0.0);
    if (target > at_zero + 1e-12) {
        std::ostringstream msg;
        msg << "target " << target_db << " dB lies above the unsqueezed level "
            << to_db(at_zero) << " dB";
        throw std::domain_error(msg.str());
    }
    if (std::abs(target - at_zero) <= 1e-12) {
        return 0.0;
    }

    // Balanced losses give a monotone decrease towards 1 - t (+ lock noise);
    // unbalanced losses turn it around, so locate the minimum first.
    constexpr double kMaxR = 8.0;
    const auto [r_best, best] =
        boost::math::tools::brent_find_minima(detected, 0.0, kMaxR, 40);
    if (target < best) {
        std::ostringstream msg;
        msg << "target " << target_db << " dB is beyond the loss-limited bound "
            << to_db(best) << " dB";
        if (params.t_probe == params.t_conj) {
            msg << " (balanced arms: 10*log10(1 - t + lock_noise) = "
                << to_db(1.0 - params.t_conj + params.lock_noise) << " dB as r -> inf)";
        }
        throw std::domain_error(msg.str());
    }
    boost::uintmax_t iterations = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(
        [&](double r) { return detected(r) - target; }, 0.0, r_best, at_zero - target,
        best - target, boost::math::tools::eps_tolerance<double>(50), iterations);
    return 0.5 * (lo + hi);
}

}  // namespace qnoise
