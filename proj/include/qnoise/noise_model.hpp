#pragma once

// Detected noise power, in shot-noise-limited units, for the single-beam
// (classical) and twin-beam difference (quantum) techniques.
//
// Each coherence cell is an independent two-mode squeezed vacuum. The mask
// and the conjugate detection loss compose into one beamsplitter of power
// transmission t_conj * T_i on the conjugate; partial blocking inside a cell
// therefore scales the cross-correlation by sqrt(T_i), not T_i.

#include <string_view>

#include "qnoise/bitmap.hpp"
#include "qnoise/spatial_scene.hpp"

namespace qnoise {

enum class Technique { classical, quantum };

std::string_view to_string(Technique technique);

struct TwinBeamParams {
    double r = 0.0;              // squeezing parameter
    double t_probe = 1.0;        // QE x path transmission, probe arm
    double t_conj = 1.0;         // QE x path transmission, conjugate arm
    double lock_noise = 0.02;    // additive, quantum difference signal only (SNL units)
    double electronic_floor = 0.0;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct NoiseMeasurement {
    double n = 0.0;        // noise power, SNL = 1
    double delta_n = 0.0;  // standard deviation of n
    bool valid = true;     // false when the LO cannot lift the signal above the electronic floor
    Technique technique = Technique::quantum;
};

// Shot-noise references computed from vacuum states: the two-beam difference
// (1 in these units) and a single arm (1/2).
double twin_beam_snl();
double single_beam_snl();

// N = sum_i w_i V_i / V_SNL + lock_noise, with V_i the phase-locked minimum
// of the joint quadrature for cell i.
double quantum_noise(const CellDecomposition& decomposition, const TwinBeamParams& params);

// N = sum_i w_i Var_i / V_SNL for the conjugate alone (probe blocked).
double classical_noise(const CellDecomposition& decomposition, const TwinBeamParams& params);

double noise(Technique technique, const CellDecomposition& decomposition,
             const TwinBeamParams& params);

// True when lo.count() * power_per_pixel reaches the electronic floor.
// An empty LO is never valid.
bool lo_power_check(const Bitmap& lo, const TwinBeamParams& params, double power_per_pixel);

// Quantum noise at full overlap with the configured losses and lock noise:
// what the locked homodyne reads without a mask.
double detected_noise(const TwinBeamParams& params);

double to_db(double n);

// Solves for r so that detected_noise() equals 10^{db/10}. Throws
// std::domain_error when the target lies beyond what the losses allow; the
// message states the bound.
double calibrate_detected_r(double target_db, TwinBeamParams params);

}  // namespace qnoise
