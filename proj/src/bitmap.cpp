#include "qnoise/bitmap.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace qnoise {

namespace {

// Netpbm plain-format tokenizer.
class PnmTokens {
  public:
    explicit PnmTokens(std::istream& in) : in_(in) {}

    std::string next() {
        skip_space_and_comments();
        std::string token;
        while (true) {
            const int c = in_.peek();
            if (c == EOF || std::isspace(c) || c == '#') {
                break;
            }
            token.push_back(static_cast<char>(in_.get()));
        }
        if (token.empty()) {
            throw std::runtime_error("pnm: unexpected end of input");
        }
        return token;
    }

    int next_int(const char* what) {
        const std::string token = next();
        std::size_t used = 0;
        int value = 0;
        try {
            value = std::stoi(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size()) {
            throw std::runtime_error(std::string("pnm: bad ") + what + " '" + token + "'");
        }
        return value;
    }

    // P1 pixels are single digits and may be packed ("0110").
    int next_bit() {
        skip_space_and_comments();
        const int c = in_.get();
        if (c == '0' || c == '1') {
            return c - '0';
        }
        if (c == EOF) {
            throw std::runtime_error("pnm: truncated pixel data");
        }
        throw std::runtime_error(std::string("pnm: bad pixel character '") +
                                 static_cast<char>(c) + "'");
    }

  private:
    void skip_space_and_comments() {
        while (true) {
            const int c = in_.peek();
            if (c == '#') {
                std::string ignored;
                std::getline(in_, ignored);
            } else if (c != EOF && std::isspace(c)) {
                in_.get();
            } else {
                return;
            }
        }
    }

    std::istream& in_;
};

void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("bitmap dimensions must be >= 1");
    }
}

}  // namespace

Bitmap::Bitmap(int width, int height) : width_(width), height_(height) {
    check_dims(width, height);
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

Bitmap Bitmap::ones(int width, int height) {
    Bitmap b(width, height);
    std::fill(b.bits_.begin(), b.bits_.end(), 1);
    return b;
}

std::size_t Bitmap::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

WeightMap::WeightMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    check_dims(width, height);
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw std::invalid_argument("weight map size does not match its dimensions");
    }
    for (double v : values_) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument("weight map values must be finite and >= 0");
        }
    }
}

Bitmap read_pbm(std::istream& in) {
    PnmTokens tokens(in);
    const std::string magic = tokens.next();
    if (magic != "P1") {
        throw std::runtime_error("pbm: expected magic P1, got '" + magic + "'");
    }
    const int width = tokens.next_int("width");
    const int height = tokens.next_int("height");
    check_dims(width, height);
    Bitmap bitmap(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            bitmap.set(x, y, tokens.next_bit() == 1);
        }
    }
    return bitmap;
}

Bitmap load_pbm(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open bitmap " + path.string());
    }
    try {
        return read_pbm(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_pbm(std::ostream& out, const Bitmap& bitmap) {
    out << "P1\n" << bitmap.width() << ' ' << bitmap.height() << '\n';
    for (int y = 0; y < bitmap.height(); ++y) {
        for (int x = 0; x < bitmap.width(); ++x) {
            if (x > 0) {
                out << ' ';
            }
            out << (bitmap.at(x, y) ? '1' : '0');
        }
        out << '\n';
    }
}

void save_pbm(const std::filesystem::path& path, const Bitmap& bitmap) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write bitmap " + path.string());
    }
    write_pbm(out, bitmap);
}

WeightMap read_pgm_weights(std::istream& in) {
    PnmTokens tokens(in);
    const std::string magic = tokens.next();
    if (magic != "P2") {
        throw std::runtime_error("pgm: expected magic P2, got '" + magic + "'");
    }
    const int width = tokens.next_int("width");
    const int height = tokens.next_int("height");
    const int maxval = tokens.next_int("maxval");
    check_dims(width, height);
    if (maxval < 1) {
        throw std::runtime_error("pgm: maxval must be >= 1");
    }
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (int k = 0; k < width * height; ++k) {
        const int v = tokens.next_int("sample");
        if (v < 0 || v > maxval) {
            throw std::runtime_error("pgm: sample outside [0, maxval]");
        }
        values.push_back(static_cast<double>(v) / maxval);
    }
    return WeightMap(width, height, std::move(values));
}

WeightMap load_pgm_weights(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open weight map " + path.string());
    }
    try {
        return read_pgm_weights(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace qnoise
