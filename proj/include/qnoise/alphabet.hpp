#pragma once

// Letter recognition: every glyph of a font is tried as the LO shape against
// a fixed mask, and the change in noise on inserting the mask,
// D = N_masked / N_baseline, ranks the guesses.

#include <string>
#include <vector>

#include "qnoise/noise_model.hpp"
#include "qnoise/spatial_scene.hpp"
#include "qnoise/trace_sim.hpp"

namespace qnoise {

struct DeviationRecord {
    char letter = '?';
    double d = 0.0;
    double sigma_d = 0.0;
    bool valid = false;
    NoiseMeasurement masked;
    NoiseMeasurement baseline;
    double overlap = 0.0;   // LO-mask overlap for this letter
    bool sub_snl = false;   // masked noise below the shot-noise limit
    std::string exclusion;  // reason when !valid
};

// D = N_m / N_b with sigma_D = D sqrt((dN_m/N_m)^2 + (dN_b/N_b)^2).
DeviationRecord deviation(char letter, const NoiseMeasurement& masked,
                          const NoiseMeasurement& baseline);

struct LetterRanking {
    Technique technique = Technique::quantum;
    std::vector<DeviationRecord> ranked;  // valid letters, best first
    char best = '?';
    char runner_up = '?';
    double sigma_separation = 0.0;  // |D_best - D_runner| / sqrt(sigma_best^2 + sigma_runner^2)
    std::string sub_snl_letters;
};

// Classical: largest D first (excess noise kept). Quantum: smallest D first
// (squeezing kept); sub_snl_letters lists the letters still below the SNL.
// Ties break alphabetically. Throws std::invalid_argument when no record is
// valid.
LetterRanking rank_letters(const std::vector<DeviationRecord>& records, Technique technique);

struct AlphabetOptions {
    int grid = 64;                               // square grid the glyphs are centred in
    CoherenceGrid cells{8, 0, 0};
    double lo_power_per_pixel = 1.0 / 4096.0;    // relative LO power per lit pixel
    int series = 1;                              // traces averaged per run
};

struct AlphabetResult {
    std::vector<DeviationRecord> classical;  // one per font letter, alphabetical
    std::vector<DeviationRecord> quantum;
    LetterRanking classical_ranking;
    LetterRanking quantum_ranking;
    std::string excluded_letters;
};

// Baseline run (no mask) and masked run for every letter of the font, for
// both techniques. Trace seeds depend on the letter and run kind only, so the
// two techniques see the same detector noise realisation.
AlphabetResult alphabet_gun(const Bitmap& mask, const Font& font, const TwinBeamParams& params,
                            const AcquisitionConfig& acquisition, const AlphabetOptions& options);

}  // namespace qnoise
