#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace qnoise {

// Binary transverse shape on a pixel grid, row-major.
class Bitmap {
  public:
    Bitmap(int width, int height);

    static Bitmap zeros(int width, int height) { return Bitmap(width, height); }
    static Bitmap ones(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }
    bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool value) { bits_[index(x, y)] = value ? 1 : 0; }
    std::size_t count() const;
    bool same_shape(const Bitmap& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Bitmap&, const Bitmap&) = default;

  private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_;
    int height_;
    std::vector<std::uint8_t> bits_;
};

// Per-pixel intensity weights (non-negative). Used to fold a non-uniform
// beam profile into overlaps.
class WeightMap {
  public:
    WeightMap(int width, int height, std::vector<double> values);

    int width() const { return width_; }
    int height() const { return height_; }
    double at(int x, int y) const {
        return values_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                       static_cast<std::size_t>(x)];
    }

  private:
    int width_;
    int height_;
    std::vector<double> values_;
};

// Plain (ASCII) portable bitmap, magic "P1". '#' comments are allowed
// anywhere between tokens; pixel digits may be packed without separators.
Bitmap read_pbm(std::istream& in);
Bitmap load_pbm(const std::filesystem::path& path);
void write_pbm(std::ostream& out, const Bitmap& bitmap);
void save_pbm(const std::filesystem::path& path, const Bitmap& bitmap);

// Plain graymap, magic "P2"; values are divided by maxval.
WeightMap read_pgm_weights(std::istream& in);
WeightMap load_pgm_weights(const std::filesystem::path& path);

}  // namespace qnoise
