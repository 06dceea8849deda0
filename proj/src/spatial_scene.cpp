#include "qnoise/spatial_scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace qnoise {

namespace {

int floor_div(int a, int b) {
    int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

void check_pair(const Bitmap& lo, const Bitmap& mask, const WeightMap* weights) {
    if (!lo.same_shape(mask)) {
        throw std::invalid_argument("LO and mask dimensions differ");
    }
    if (weights != nullptr &&
        (weights->width() != lo.width() || weights->height() != lo.height())) {
        throw std::invalid_argument("weight map dimensions differ from the LO");
    }
}

double pixel_weight(const WeightMap* weights, int x, int y) {
    return weights == nullptr ? 1.0 : weights->at(x, y);
}

}  // namespace

Bitmap bowtie(const BowtieGeometry& g) {
    if (!(g.half_angle > 0.0 && g.half_angle < std::numbers::pi / 2)) {
        throw std::invalid_argument("bow tie half-angle must lie in (0, pi/2)");
    }
    if (!(g.radius > 0.0) || 2.0 * g.radius > std::min(g.width, g.height)) {
        throw std::invalid_argument("bow tie radius must be positive and fit in the grid");
    }
    Bitmap out(g.width, g.height);
    const double cx = 0.5 * g.width;
    const double cy = 0.5 * g.height;
    const double ax = std::cos(g.rotation);
    const double ay = std::sin(g.rotation);
    const double tan_alpha = std::tan(g.half_angle);
    const double r2 = g.radius * g.radius;
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const double px = x + 0.5 - cx;
            const double py = y + 0.5 - cy;
            if (px * px + py * py > r2) {
                continue;
            }
            // |angle to the axis| <= alpha, modulo pi.
            const double along = px * ax + py * ay;
            const double across = px * ay - py * ax;
            if (std::abs(across) <= tan_alpha * std::abs(along)) {
                out.set(x, y, true);
            }
        }
    }
    return out;
}

double CellDecomposition::overlap() const {
    double sum = 0.0;
    for (const Cell& c : cells) {
        sum += c.weight * c.transmission;
    }
    // Rounding in the weights can push a full overlap a few ulp past 1.
    return std::clamp(sum, 0.0, 1.0);
}

void CellDecomposition::validate() const {
    if (cells.empty()) {
        throw std::invalid_argument("decomposition has no cells");
    }
    double total = 0.0;
    for (const Cell& c : cells) {
        if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
            throw std::invalid_argument("cell weight must be finite and >= 0");
        }
        if (!(c.transmission >= 0.0 && c.transmission <= 1.0)) {
            throw std::invalid_argument("cell transmission must lie in [0, 1]");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("cell weights must sum to 1");
    }
}

CellDecomposition CellDecomposition::uniform(double transmission) {
    CellDecomposition d;
    d.cells.push_back({1.0, transmission});
    d.lo_pixel_count = 1;
    d.validate();
    return d;
}

CellDecomposition CellDecomposition::binary(double overlap_fraction) {
    if (!(overlap_fraction >= 0.0 && overlap_fraction <= 1.0)) {
        throw std::invalid_argument("overlap must lie in [0, 1]");
    }
    CellDecomposition d;
    if (overlap_fraction > 0.0) {
        d.cells.push_back({overlap_fraction, 1.0});
    }
    if (overlap_fraction < 1.0) {
        d.cells.push_back({1.0 - overlap_fraction, 0.0});
    }
    d.lo_pixel_count = 2;
    return d;
}

double overlap(const Bitmap& lo, const Bitmap& mask, const WeightMap* weights) {
    check_pair(lo, mask, weights);
    double lo_power = 0.0;
    double passed = 0.0;
    for (int y = 0; y < lo.height(); ++y) {
        for (int x = 0; x < lo.width(); ++x) {
            if (!lo.at(x, y)) {
                continue;
            }
            const double w = pixel_weight(weights, x, y);
            lo_power += w;
            if (mask.at(x, y)) {
                passed += w;
            }
        }
    }
    if (!(lo_power > 0.0)) {
        throw std::invalid_argument("LO is empty");
    }
    return passed / lo_power;
}

CellDecomposition decompose(const Bitmap& lo, const Bitmap& mask, const CoherenceGrid& grid,
                            const WeightMap* weights) {
    check_pair(lo, mask, weights);
    if (grid.cell_size < 1) {
        throw std::invalid_argument("cell size must be >= 1");
    }
    struct Accum {
        double lo_power = 0.0;
        double passed = 0.0;
    };
    // Keyed by (cell row, cell column) so iteration is row-major.
    std::map<std::pair<int, int>, Accum> cells;
    double total = 0.0;
    std::size_t lo_pixels = 0;
    for (int y = 0; y < lo.height(); ++y) {
        const int cy = floor_div(y - grid.origin_y, grid.cell_size);
        for (int x = 0; x < lo.width(); ++x) {
            if (!lo.at(x, y)) {
                continue;
            }
            ++lo_pixels;
            const double w = pixel_weight(weights, x, y);
            if (w <= 0.0) {
                continue;
            }
            const int cx = floor_div(x - grid.origin_x, grid.cell_size);
            Accum& a = cells[{cy, cx}];
            a.lo_power += w;
            if (mask.at(x, y)) {
                a.passed += w;
            }
            total += w;
        }
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("LO is empty");
    }
    CellDecomposition d;
    d.lo_pixel_count = lo_pixels;
    d.cells.reserve(cells.size());
    for (const auto& [key, a] : cells) {
        d.cells.push_back({a.lo_power / total, std::min(1.0, a.passed / a.lo_power)});
    }
    return d;
}

Font Font::load(const std::filesystem::path& dir) {
    Font font;
    for (char letter = 'A'; letter <= 'Z'; ++letter) {
        const auto path = dir / (std::string(1, letter) + ".pbm");
        if (!std::filesystem::exists(path)) {
            continue;
        }
        Bitmap g = load_pbm(path);
        if (font.box_width_ == 0) {
            font.box_width_ = g.width();
            font.box_height_ = g.height();
        } else if (g.width() != font.box_width_ || g.height() != font.box_height_) {
            throw std::runtime_error("glyph " + std::string(1, letter) +
                                     " does not share the font's bounding box");
        }
        font.glyphs_[static_cast<std::size_t>(letter - 'A')].push_back(std::move(g));
    }
    if (font.box_width_ == 0) {
        throw std::runtime_error("no glyphs found in " + dir.string());
    }
    return font;
}

std::filesystem::path Font::bundled_dir() {
    return std::filesystem::path(QNOISE_DATA_DIR) / "font";
}

bool Font::has(char letter) const {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(letter)));
    return up >= 'A' && up <= 'Z' && !glyphs_[static_cast<std::size_t>(up - 'A')].empty();
}

const Bitmap& Font::glyph(char letter) const {
    if (!has(letter)) {
        throw std::invalid_argument("unknown letter '" + std::string(1, letter) + "' in font");
    }
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(letter)));
    return glyphs_[static_cast<std::size_t>(up - 'A')].front();
}

std::string Font::letters() const {
    std::string out;
    for (char letter = 'A'; letter <= 'Z'; ++letter) {
        if (has(letter)) {
            out.push_back(letter);
        }
    }
    return out;
}

Bitmap glyph(char letter, const Font& font, int width, int height) {
    const Bitmap& g = font.glyph(letter);
    if (g.width() > width || g.height() > height) {
        throw std::invalid_argument("grid is smaller than the font's glyph box");
    }
    Bitmap out(width, height);
    const int ox = (width - g.width()) / 2;
    const int oy = (height - g.height()) / 2;
    for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) {
            if (g.at(x, y)) {
                out.set(ox + x, oy + y, true);
            }
        }
    }
    return out;
}

}  // namespace qnoise
