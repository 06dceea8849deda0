#pragma once

// The three batch commands behind the CLI. Each run_* function is pure
// computation on a validated config; the write_* functions emit its files.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qnoise/alphabet.hpp"
#include "qnoise/estimation.hpp"
#include "qnoise/run_config.hpp"

namespace qnoise {

inline constexpr const char* kSweepSchema = "qnoise.sweep.v1";
inline constexpr const char* kAlphabetSchema = "qnoise.alphabet.v1";

struct SweepRow {
    double angle_deg = 0.0;
    double overlap = 0.0;
    Technique technique = Technique::quantum;
    int series = 0;
    double n_model = 0.0;  // noise-model value the trace was drawn around
    NoiseMeasurement measurement;
};

struct SweepResult {
    RunConfig config;
    TwinBeamParams params;  // r resolved
    std::vector<double> angles_deg;
    std::vector<double> overlaps;  // per angle
    std::vector<SweepRow> rows;    // angle-major, classical before quantum, then series

    NoiseCurve classical_curve;
    NoiseCurve quantum_curve;
    std::vector<DeltaOPoint> classical_delta_o;
    std::vector<DeltaOPoint> quantum_delta_o;

    std::optional<Enhancement> enhancement;
    std::optional<Enhancement> angle_enhancement;
    std::string enhancement_error;  // set when enhancement is absent

    // Where the fitted quantum curve crosses the SNL, if it does on [0, 1].
    std::optional<double> o_cross;
};

// Overlap sweep: the LO bow tie is rotated through the configured angles
// against a fixed bow tie mask. Trace seeds depend on the angle and series
// only, so both techniques share detector noise realisations.
SweepResult run_sweep(const RunConfig& config);

// sweep.csv, fits.json and summary.json.
void write_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir);

struct AlphabetRun {
    RunConfig config;
    TwinBeamParams params;
    char mask = 'Z';
    AlphabetResult result;
};

// Throws ConfigError("alphabet.mask", ...) for a letter missing from the font.
AlphabetRun run_alphabet(const RunConfig& config, char mask_letter);

// alphabet.csv and ranking.json.
void write_alphabet_outputs(const AlphabetRun& run, const std::filesystem::path& dir);

struct CalibrationResult {
    RunConfig config;  // squeezing set to the target and r materialised
    double r = 0.0;
    double detected_db = 0.0;   // detected_noise() in dB at the solved r
    double intrinsic_db = 0.0;  // lossless squeezing of that r
};

CalibrationResult calibrate(const RunConfig& config, double target_db);

// calibrated.ini and calibration.json.
void write_calibration_outputs(const CalibrationResult& result, const std::filesystem::path& dir);

}  // namespace qnoise
