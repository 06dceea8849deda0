#pragma once

// Binary masks and local-oscillator shapes, the coherence-area partition of
// the transverse plane, and the overlap / per-cell decomposition that feeds
// the noise model.

#include <array>
#include <cstddef>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "qnoise/bitmap.hpp"

namespace qnoise {

struct BowtieGeometry {
    double rotation = 0.0;                      // radians
    double half_angle = std::numbers::pi / 8;   // wedge half-angle alpha, in (0, pi/2)
    double radius = 120.0;                      // pixels
    int width = 256;
    int height = 256;
};

// Two opposed wedges about the grid centre, rotated by geometry.rotation.
// Pixel centres are sampled; the result is exactly point-symmetric.
Bitmap bowtie(const BowtieGeometry& geometry);

// Square coherence cells. Cell boundaries sit at origin + k * cell_size;
// cells cut by the grid edge are kept with proportionally smaller weight.
struct CoherenceGrid {
    int cell_size = 16;
    int origin_x = 0;
    int origin_y = 0;
};

struct Cell {
    double weight = 0.0;        // w_i: share of the LO power in this cell
    double transmission = 0.0;  // T_i: mask power transmission seen by the LO in this cell
};

struct CellDecomposition {
    std::vector<Cell> cells;
    std::size_t lo_pixel_count = 0;

    // Sum of w_i T_i.
    double overlap() const;

    // Throws std::invalid_argument unless weights are non-negative and sum to
    // one and every transmission lies in [0, 1].
    void validate() const;

    // One cell with the given transmission.
    static CellDecomposition uniform(double transmission);
    // Binary cells: a fraction `overlap` fully transmitted, the rest blocked.
    static CellDecomposition binary(double overlap);
};

// O = |lo & mask| / |lo|, or its intensity-weighted form when weights are
// given. Throws on dimension mismatch or an empty (zero-power) LO.
double overlap(const Bitmap& lo, const Bitmap& mask, const WeightMap* weights = nullptr);

// Per-cell split of the overlap; cells without LO power are omitted. Cells
// are listed in row-major cell order.
CellDecomposition decompose(const Bitmap& lo, const Bitmap& mask, const CoherenceGrid& grid,
                            const WeightMap* weights = nullptr);

// A set of A-Z glyphs sharing one bounding box, loaded from <dir>/<L>.pbm.
class Font {
  public:
    static Font load(const std::filesystem::path& dir);
    static std::filesystem::path bundled_dir();

    const Bitmap& glyph(char letter) const;
    bool has(char letter) const;
    std::string letters() const;
    int box_width() const { return box_width_; }
    int box_height() const { return box_height_; }

  private:
    Font() = default;

    std::array<std::vector<Bitmap>, 26> glyphs_;  // 0 or 1 entry per letter
    int box_width_ = 0;
    int box_height_ = 0;
};

// The glyph for `letter`, centred in a width x height grid.
Bitmap glyph(char letter, const Font& font, int width, int height);

}  // namespace qnoise
