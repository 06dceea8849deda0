#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "qnoise/bitmap.hpp"
#include "qnoise/spatial_scene.hpp"

using namespace qnoise;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Bitmap random_bitmap(int w, int h, double p, std::mt19937_64& rng) {
    std::bernoulli_distribution bit(p);
    Bitmap b(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            b.set(x, y, bit(rng));
        }
    }
    return b;
}

}  // namespace

TEST(Pbm, RoundTrip) {
    std::mt19937_64 rng(3);
    const Bitmap b = random_bitmap(13, 7, 0.4, rng);
    std::stringstream s;
    write_pbm(s, b);
    EXPECT_EQ(read_pbm(s), b);
}

TEST(Pbm, CommentsAndPackedDigits) {
    std::istringstream s("P1\n# a comment\n3 2 # trailing\n101\n0 1 0\n");
    const Bitmap b = read_pbm(s);
    EXPECT_EQ(b.width(), 3);
    EXPECT_TRUE(b.at(0, 0));
    EXPECT_FALSE(b.at(1, 0));
    EXPECT_TRUE(b.at(1, 1));
    EXPECT_EQ(b.count(), 3u);
}

TEST(Pbm, RejectsMalformed) {
    std::istringstream bad_magic("P4\n1 1\n1\n");
    EXPECT_THROW(read_pbm(bad_magic), std::runtime_error);
    std::istringstream short_data("P1\n2 2\n1 0 1\n");
    EXPECT_THROW(read_pbm(short_data), std::runtime_error);
    std::istringstream bad_pixel("P1\n1 1\n2\n");
    EXPECT_THROW(read_pbm(bad_pixel), std::runtime_error);
}

TEST(Pgm, WeightsScaledByMaxval) {
    std::istringstream s("P2\n2 1\n4\n4 1\n");
    const WeightMap w = read_pgm_weights(s);
    EXPECT_DOUBLE_EQ(w.at(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(w.at(1, 0), 0.25);
}

TEST(Bowtie, PointSymmetric) {
    for (double rot : {0.0, 7.0, 33.0}) {
        BowtieGeometry g;
        g.rotation = rot * kDeg;
        const Bitmap b = bowtie(g);
        for (int y = 0; y < g.height; ++y) {
            for (int x = 0; x < g.width; ++x) {
                ASSERT_EQ(b.at(x, y), b.at(g.width - 1 - x, g.height - 1 - y));
            }
        }
    }
}

TEST(Bowtie, AreaIsTwoAlphaRSquared) {
    BowtieGeometry g;
    const double area = 2.0 * g.half_angle * g.radius * g.radius;
    EXPECT_NEAR(static_cast<double>(bowtie(g).count()) / area, 1.0, 0.01);
}

TEST(Bowtie, OverlapFollowsIdealWedges) {
    BowtieGeometry g;
    const Bitmap mask = bowtie(g);
    for (double deg = 0.0; deg < 45.0; deg += 3.0) {
        BowtieGeometry lo = g;
        lo.rotation = deg * kDeg;
        const double ideal = 1.0 - deg / 45.0;
        EXPECT_NEAR(overlap(bowtie(lo), mask), ideal, 0.01) << deg;
    }
}

TEST(Bowtie, RasterizationConverges) {
    auto error_at = [](int size) {
        BowtieGeometry g;
        g.width = g.height = size;
        g.radius = 0.45 * size;
        const Bitmap mask = bowtie(g);
        g.rotation = 10.0 * kDeg;
        return std::abs(overlap(bowtie(g), mask) - (1.0 - 10.0 / 45.0));
    };
    EXPECT_LT(error_at(512), error_at(32));
    EXPECT_LT(error_at(512), 0.005);
}

TEST(Bowtie, RejectsBadGeometry) {
    BowtieGeometry g;
    g.half_angle = 0.0;
    EXPECT_THROW(bowtie(g), std::invalid_argument);
    g = BowtieGeometry{};
    g.radius = 200.0;
    EXPECT_THROW(bowtie(g), std::invalid_argument);
}

TEST(Overlap, Basics) {
    const Bitmap lo = Bitmap::ones(8, 8);
    EXPECT_DOUBLE_EQ(overlap(lo, lo), 1.0);
    EXPECT_DOUBLE_EQ(overlap(lo, Bitmap::zeros(8, 8)), 0.0);
    EXPECT_THROW(overlap(Bitmap::zeros(8, 8), lo), std::invalid_argument);
    EXPECT_THROW(overlap(lo, Bitmap::ones(4, 8)), std::invalid_argument);
}

TEST(Overlap, UniformWeightsChangeNothing) {
    std::mt19937_64 rng(5);
    const Bitmap lo = random_bitmap(20, 20, 0.6, rng);
    const Bitmap mask = random_bitmap(20, 20, 0.5, rng);
    const WeightMap flat(20, 20, std::vector<double>(400, 0.37));
    EXPECT_NEAR(overlap(lo, mask, &flat), overlap(lo, mask), 1e-14);
}

TEST(Decompose, FuzzedInvariants) {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> size(4, 40);
    std::uniform_int_distribution<int> cell(1, 12);
    std::uniform_int_distribution<int> origin(-5, 5);
    std::uniform_real_distribution<double> fill(0.05, 0.95);
    for (int trial = 0; trial < 300; ++trial) {
        const int w = size(rng);
        const int h = size(rng);
        Bitmap lo = random_bitmap(w, h, fill(rng), rng);
        if (lo.count() == 0) {
            lo.set(0, 0, true);
        }
        const Bitmap mask = random_bitmap(w, h, fill(rng), rng);
        const CoherenceGrid grid{cell(rng), origin(rng), origin(rng)};
        const CellDecomposition d = decompose(lo, mask, grid);
        ASSERT_NO_THROW(d.validate());
        EXPECT_NEAR(d.overlap(), overlap(lo, mask), 1e-12);
        EXPECT_EQ(d.lo_pixel_count, lo.count());
        if (grid.cell_size == 1) {
            for (const Cell& c : d.cells) {
                EXPECT_TRUE(c.transmission == 0.0 || c.transmission == 1.0);
            }
        }
    }
}

TEST(Decompose, CellCounts) {
    const Bitmap lo = Bitmap::ones(32, 32);
    Bitmap mask(32, 32);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 8; ++x) {
            mask.set(x, y, true);
        }
    }
    const CellDecomposition d = decompose(lo, mask, CoherenceGrid{16, 0, 0});
    ASSERT_EQ(d.cells.size(), 4u);
    // Row-major: (0,0), (0,1), (1,0), (1,1).
    EXPECT_DOUBLE_EQ(d.cells[0].transmission, 0.5);
    EXPECT_DOUBLE_EQ(d.cells[1].transmission, 0.0);
    EXPECT_DOUBLE_EQ(d.cells[2].transmission, 0.5);
    EXPECT_DOUBLE_EQ(d.cells[0].weight, 0.25);

    // Shifted origin: edge cells are cut and carry less weight.
    const CellDecomposition s = decompose(lo, mask, CoherenceGrid{16, 8, 8});
    ASSERT_EQ(s.cells.size(), 9u);
    EXPECT_DOUBLE_EQ(s.cells[0].weight, 64.0 / 1024.0);
    EXPECT_DOUBLE_EQ(s.cells[4].weight, 256.0 / 1024.0);
    EXPECT_DOUBLE_EQ(s.overlap(), 0.25);
}

TEST(Decompose, Factories) {
    EXPECT_DOUBLE_EQ(CellDecomposition::binary(0.3).overlap(), 0.3);
    EXPECT_EQ(CellDecomposition::binary(1.0).cells.size(), 1u);
    EXPECT_THROW(CellDecomposition::binary(1.5), std::invalid_argument);
    EXPECT_THROW(CellDecomposition::uniform(-0.1), std::invalid_argument);
}

TEST(Font, BundledAlphabet) {
    const Font font = Font::load(Font::bundled_dir());
    EXPECT_EQ(font.letters(), "ABCDEFGHIJKLMNOPQRSTUVWXYZ");
    EXPECT_EQ(font.box_width(), 64);
    EXPECT_EQ(font.box_height(), 64);
    EXPECT_THROW(font.glyph('1'), std::invalid_argument);
    EXPECT_TRUE(font.has('z'));
    // Pixel counts come in 8x8 blocks of the upscaled glyphs.
    for (char c : font.letters()) {
        EXPECT_EQ(font.glyph(c).count() % 64, 0u) << c;
    }
    EXPECT_EQ(font.glyph('I').count(), 18u * 64u);
}

TEST(Font, GlyphIsCentred) {
    const Font font = Font::load(Font::bundled_dir());
    const Bitmap g = glyph('Z', font, 96, 80);
    EXPECT_EQ(g.count(), font.glyph('Z').count());
    EXPECT_EQ(g.at(16 + 10, 8 + 10), font.glyph('Z').at(10, 10));
    EXPECT_THROW(glyph('Z', font, 32, 32), std::invalid_argument);
}

TEST(Font, EveryLetterOverlapsZ) {
    const Font font = Font::load(Font::bundled_dir());
    for (char c : font.letters()) {
        const double o = overlap(font.glyph(c), font.glyph('Z'));
        if (c == 'Z') {
            EXPECT_DOUBLE_EQ(o, 1.0);
        } else {
            EXPECT_LT(o, 1.0) << c;
            EXPECT_GT(o, 0.5) << c;
        }
    }
}
