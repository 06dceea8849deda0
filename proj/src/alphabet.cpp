#include "qnoise/alphabet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "parallel.hpp"
#include "qnoise/seeding.hpp"

namespace qnoise {

namespace {

// Mean of k runs; each run's delta_n is its own uncertainty, so the mean
// carries sqrt(sum delta_n^2) / k.
NoiseMeasurement run_measurement(double n_true, const AcquisitionConfig& acquisition,
                                 std::string_view component, std::uint64_t index, int series,
                                 Technique technique) {
    double sum_n = 0.0;
    double sum_var = 0.0;
    for (int s = 0; s < series; ++s) {
        AcquisitionConfig cfg = acquisition;
        cfg.rng_seed = derive_seed(acquisition.rng_seed, component,
                                   index * 1024 + static_cast<std::uint64_t>(s));
        const NoiseMeasurement m = segment_stats(simulate_trace(n_true, cfg), technique);
        sum_n += m.n;
        sum_var += m.delta_n * m.delta_n;
    }
    NoiseMeasurement out;
    out.n = sum_n / series;
    out.delta_n = std::sqrt(sum_var) / series;
    out.valid = true;
    out.technique = technique;
    return out;
}

}  // namespace

DeviationRecord deviation(char letter, const NoiseMeasurement& masked,
                          const NoiseMeasurement& baseline) {
    if (!(masked.n > 0.0) || !(baseline.n > 0.0)) {
        throw std::invalid_argument("deviation needs positive noise powers");
    }
    DeviationRecord rec;
    rec.letter = letter;
    rec.masked = masked;
    rec.baseline = baseline;
    rec.valid = masked.valid && baseline.valid;
    rec.d = masked.n / baseline.n;
    rec.sigma_d = rec.d * std::hypot(masked.delta_n / masked.n, baseline.delta_n / baseline.n);
    rec.sub_snl = masked.n < 1.0;
    return rec;
}

LetterRanking rank_letters(const std::vector<DeviationRecord>& records, Technique technique) {
    LetterRanking out;
    out.technique = technique;
    for (const DeviationRecord& r : records) {
        if (r.valid) {
            out.ranked.push_back(r);
        }
    }
    if (out.ranked.empty()) {
        throw std::invalid_argument("no valid letters to rank");
    }
    std::stable_sort(out.ranked.begin(), out.ranked.end(),
                     [technique](const DeviationRecord& a, const DeviationRecord& b) {
                         if (a.d != b.d) {
                             return technique == Technique::classical ? a.d > b.d : a.d < b.d;
                         }
                         return a.letter < b.letter;
                     });
    out.best = out.ranked.front().letter;
    if (out.ranked.size() > 1) {
        const DeviationRecord& a = out.ranked[0];
        const DeviationRecord& b = out.ranked[1];
        out.runner_up = b.letter;
        const double sigma = std::hypot(a.sigma_d, b.sigma_d);
        out.sigma_separation = sigma > 0.0 ? std::abs(a.d - b.d) / sigma : 0.0;
    }
    for (const DeviationRecord& r : records) {
        if (r.valid && r.sub_snl) {
            out.sub_snl_letters.push_back(r.letter);
        }
    }
    return out;
}

AlphabetResult alphabet_gun(const Bitmap& mask, const Font& font, const TwinBeamParams& params,
                            const AcquisitionConfig& acquisition, const AlphabetOptions& options) {
    params.validate();
    acquisition.validate();
    if (options.series < 1) {
        throw std::invalid_argument("alphabet series must be >= 1");
    }
    if (mask.width() != options.grid || mask.height() != options.grid) {
        throw std::invalid_argument("mask must match the alphabet grid");
    }
    const std::string letters = font.letters();
    const Bitmap open = Bitmap::ones(options.grid, options.grid);

    AlphabetResult result;
    result.classical.resize(letters.size());
    result.quantum.resize(letters.size());
    detail::parallel_for(letters.size(), [&](std::size_t i) {
        const char letter = letters[i];
        const auto index = static_cast<std::uint64_t>(letter - 'A');
        const Bitmap lo = glyph(letter, font, options.grid, options.grid);
        const double o = overlap(lo, mask);
        if (!lo_power_check(lo, params, options.lo_power_per_pixel)) {
            for (auto* records : {&result.classical, &result.quantum}) {
                DeviationRecord& rec = (*records)[i];
                rec.letter = letter;
                rec.overlap = o;
                rec.valid = false;
                rec.exclusion = "LO power below electronic floor";
            }
            return;
        }
        const CellDecomposition baseline_cells = decompose(lo, open, options.cells);
        const CellDecomposition masked_cells = decompose(lo, mask, options.cells);
        for (Technique technique : {Technique::classical, Technique::quantum}) {
            const NoiseMeasurement baseline =
                run_measurement(noise(technique, baseline_cells, params), acquisition,
                                "alphabet-baseline", index, options.series, technique);
            const NoiseMeasurement masked =
                run_measurement(noise(technique, masked_cells, params), acquisition,
                                "alphabet-masked", index, options.series, technique);
            DeviationRecord rec = deviation(letter, masked, baseline);
            rec.overlap = o;
            (technique == Technique::classical ? result.classical : result.quantum)[i] = rec;
        }
    });

    for (const DeviationRecord& r : result.quantum) {
        if (!r.valid) {
            result.excluded_letters.push_back(r.letter);
        }
    }
    result.classical_ranking = rank_letters(result.classical, Technique::classical);
    result.quantum_ranking = rank_letters(result.quantum, Technique::quantum);
    return result;
}

}  // namespace qnoise
