#pragma once

// Run configuration: a sectioned key = value text file (INI). Every key is
// optional; missing keys take the defaults below. Unknown sections or keys
// are rejected so typos do not silently fall back to defaults.
//
//   [source]       squeezing_db, squeezing_convention (detected | intrinsic),
//                  r (overrides squeezing_db when present), t_probe, t_conj,
//                  lock_noise, electronic_floor
//   [scene]        grid, cell_size, origin_x, origin_y, bowtie_half_angle_deg,
//                  bowtie_radius, weight_map, font_dir
//   [acquisition]  points_per_trace, segment_length, samples_per_point,
//                  point_correlation, seed, series, angles_deg (comma list)
//   [alphabet]     mask, grid, cell_size, lo_power_per_pixel, series
//   [analysis]     slope_floor, enhancement_threshold, fit_line_threshold
//   [output]       dir

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnoise/alphabet.hpp"
#include "qnoise/noise_model.hpp"
#include "qnoise/spatial_scene.hpp"
#include "qnoise/trace_sim.hpp"

namespace qnoise {

class ConfigError : public std::invalid_argument {
  public:
    ConfigError(std::string field, const std::string& message);
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

struct SourceConfig {
    // Squeezing level; the sign is ignored (2.2 and -2.2 both mean 2.2 dB
    // below the SNL).
    double squeezing_db = -2.2;
    // "detected": the locked, lossy homodyne reads squeezing_db at O = 1
    // (lock noise included). "intrinsic": squeezing_db is the lossless level,
    // r = |db| ln10 / 20.
    std::string squeezing_convention = "detected";
    std::optional<double> r;
    double t_probe = 1.0;
    double t_conj = 1.0;
    double lock_noise = 0.02;
    double electronic_floor = 0.3;

    bool operator==(const SourceConfig&) const = default;
};

struct SceneConfig {
    int grid = 256;
    int cell_size = 16;
    int origin_x = 0;
    int origin_y = 0;
    double bowtie_half_angle_deg = 22.5;
    double bowtie_radius = 120.0;
    std::string weight_map;  // optional P2 file, grid x grid
    std::string font_dir;    // empty: bundled font

    bool operator==(const SceneConfig&) const = default;
};

struct AcquisitionSection {
    int points_per_trace = 460;
    int segment_length = 10;
    int samples_per_point = 300;
    double point_correlation = 0.5;
    std::uint64_t seed = 1;
    int series = 10;
    std::vector<double> angles_deg{0, 3, 6, 9, 12, 15, 18, 21, 24, 27, 30, 33, 36, 39, 42};

    AcquisitionConfig trace_config() const;
    bool operator==(const AcquisitionSection&) const = default;
};

struct AlphabetSection {
    char mask = 'Z';
    int grid = 64;
    int cell_size = 8;
    double lo_power_per_pixel = 1.0 / 4096.0;
    int series = 1;

    AlphabetOptions options() const;
    bool operator==(const AlphabetSection&) const = default;
};

struct AnalysisConfig {
    double slope_floor = 1e-3;
    double enhancement_threshold = 0.9;
    double fit_line_threshold = 0.8;

    bool operator==(const AnalysisConfig&) const = default;
};

struct RunConfig {
    SourceConfig source;
    SceneConfig scene;
    AcquisitionSection acquisition;
    AlphabetSection alphabet;
    AnalysisConfig analysis;
    std::string output_dir = "out";

    // Throws ConfigError for the first invalid field. Referenced files must
    // exist.
    void validate() const;

    // Source parameters with r resolved from the squeezing level when r is
    // not given explicitly.
    TwinBeamParams twin_beam_params() const;

    CoherenceGrid coherence_grid() const;
    std::filesystem::path font_path() const;

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

// Writes every field, so parse_config(write_config(c)) == c exactly.
void write_config(std::ostream& out, const RunConfig& config);
void save_config(const std::filesystem::path& path, const RunConfig& config);

}  // namespace qnoise
