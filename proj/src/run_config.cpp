#include "qnoise/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "qnoise/gaussian_core.hpp"

namespace qnoise {

namespace pt = boost::property_tree;

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

AcquisitionConfig AcquisitionSection::trace_config() const {
    AcquisitionConfig cfg;
    cfg.points_per_trace = points_per_trace;
    cfg.segment_length = segment_length;
    cfg.samples_per_point = samples_per_point;
    cfg.point_correlation = point_correlation;
    cfg.rng_seed = seed;
    return cfg;
}

AlphabetOptions AlphabetSection::options() const {
    AlphabetOptions opts;
    opts.grid = grid;
    opts.cells = CoherenceGrid{cell_size, 0, 0};
    opts.lo_power_per_pixel = lo_power_per_pixel;
    opts.series = series;
    return opts;
}

namespace {

template <typename T>
T parse_number(const std::string& field, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError(field, "cannot parse '" + text + "' as a number");
    }
    return value;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

class SectionReader {
  public:
    SectionReader(const pt::ptree& root, std::string name, std::set<std::string> keys)
        : name_(std::move(name)) {
        const auto section = root.get_child_optional(pt::ptree::path_type(name_, '\0'));
        if (!section) {
            return;
        }
        node_ = &*section;
        for (const auto& [key, _] : *node_) {
            if (!keys.contains(key)) {
                throw ConfigError(name_ + "." + key, "unknown key");
            }
        }
    }

    std::optional<std::string> raw(const std::string& key) const {
        if (node_ == nullptr) {
            return std::nullopt;
        }
        const auto v = node_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) {
            return std::nullopt;
        }
        return trim(*v);
    }

    template <typename T>
    void number(const std::string& key, T& out) const {
        if (const auto v = raw(key)) {
            out = parse_number<T>(field(key), *v);
        }
    }

    void text(const std::string& key, std::string& out) const {
        if (const auto v = raw(key)) {
            out = *v;
        }
    }

    std::string field(const std::string& key) const { return name_ + "." + key; }

  private:
    std::string name_;
    const pt::ptree* node_ = nullptr;
};

void check(bool ok, const std::string& field, const std::string& message) {
    if (!ok) {
        throw ConfigError(field, message);
    }
}

bool finite_in(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

std::string format_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += (i == 0 ? "" : ", ") + fmt::format("{}", values[i]);
    }
    return out;
}

}  // namespace

RunConfig parse_config(std::istream& in) {
    pt::ptree root;
    try {
        pt::read_ini(in, root);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config", fmt::format("line {}: {}", e.line(), e.message()));
    }
    const std::set<std::string> sections{"source",   "scene",    "acquisition",
                                         "alphabet", "analysis", "output"};
    for (const auto& [name, node] : root) {
        if (!sections.contains(name)) {
            throw ConfigError(name, node.empty() ? "key outside any section" : "unknown section");
        }
    }

    RunConfig c;
    {
        const SectionReader s(root, "source",
                              {"squeezing_db", "squeezing_convention", "r", "t_probe", "t_conj",
                               "lock_noise", "electronic_floor"});
        s.number("squeezing_db", c.source.squeezing_db);
        s.text("squeezing_convention", c.source.squeezing_convention);
        if (const auto r = s.raw("r"); r && !r->empty()) {
            c.source.r = parse_number<double>(s.field("r"), *r);
        }
        s.number("t_probe", c.source.t_probe);
        s.number("t_conj", c.source.t_conj);
        s.number("lock_noise", c.source.lock_noise);
        s.number("electronic_floor", c.source.electronic_floor);
    }
    {
        const SectionReader s(root, "scene",
                              {"grid", "cell_size", "origin_x", "origin_y",
                               "bowtie_half_angle_deg", "bowtie_radius", "weight_map", "font_dir"});
        s.number("grid", c.scene.grid);
        s.number("cell_size", c.scene.cell_size);
        s.number("origin_x", c.scene.origin_x);
        s.number("origin_y", c.scene.origin_y);
        s.number("bowtie_half_angle_deg", c.scene.bowtie_half_angle_deg);
        s.number("bowtie_radius", c.scene.bowtie_radius);
        s.text("weight_map", c.scene.weight_map);
        s.text("font_dir", c.scene.font_dir);
    }
    {
        const SectionReader s(root, "acquisition",
                              {"points_per_trace", "segment_length", "samples_per_point",
                               "point_correlation", "seed", "series", "angles_deg"});
        s.number("points_per_trace", c.acquisition.points_per_trace);
        s.number("segment_length", c.acquisition.segment_length);
        s.number("samples_per_point", c.acquisition.samples_per_point);
        s.number("point_correlation", c.acquisition.point_correlation);
        s.number("seed", c.acquisition.seed);
        s.number("series", c.acquisition.series);
        if (const auto list = s.raw("angles_deg")) {
            c.acquisition.angles_deg.clear();
            std::stringstream items(*list);
            std::string item;
            while (std::getline(items, item, ',')) {
                c.acquisition.angles_deg.push_back(
                    parse_number<double>(s.field("angles_deg"), trim(item)));
            }
        }
    }
    {
        const SectionReader s(root, "alphabet",
                              {"mask", "grid", "cell_size", "lo_power_per_pixel", "series"});
        if (const auto mask = s.raw("mask")) {
            check(mask->size() == 1, s.field("mask"), "expected a single letter");
            c.alphabet.mask = (*mask)[0];
        }
        s.number("grid", c.alphabet.grid);
        s.number("cell_size", c.alphabet.cell_size);
        s.number("lo_power_per_pixel", c.alphabet.lo_power_per_pixel);
        s.number("series", c.alphabet.series);
    }
    {
        const SectionReader s(root, "analysis",
                              {"slope_floor", "enhancement_threshold", "fit_line_threshold"});
        s.number("slope_floor", c.analysis.slope_floor);
        s.number("enhancement_threshold", c.analysis.enhancement_threshold);
        s.number("fit_line_threshold", c.analysis.fit_line_threshold);
    }
    {
        const SectionReader s(root, "output", {"dir"});
        s.text("dir", c.output_dir);
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config", "cannot open " + path.string());
    }
    return parse_config(in);
}

void RunConfig::validate() const {
    const SourceConfig& s = source;
    check(std::isfinite(s.squeezing_db), "source.squeezing_db", "must be finite");
    check(s.squeezing_convention == "detected" || s.squeezing_convention == "intrinsic",
          "source.squeezing_convention", "must be 'detected' or 'intrinsic'");
    if (s.r) {
        check(finite_in(*s.r, 0.0, 8.0), "source.r", "must lie in [0, 8]");
    }
    check(finite_in(s.t_probe, 0.0, 1.0) && s.t_probe > 0.0, "source.t_probe",
          "must lie in (0, 1]");
    check(finite_in(s.t_conj, 0.0, 1.0) && s.t_conj > 0.0, "source.t_conj",
          "must lie in (0, 1]");
    check(finite_in(s.lock_noise, 0.0, 1e6), "source.lock_noise", "must be >= 0");
    check(finite_in(s.electronic_floor, 0.0, 1e6), "source.electronic_floor", "must be >= 0");

    check(scene.grid >= 8 && scene.grid <= 4096, "scene.grid", "must lie in [8, 4096]");
    check(scene.cell_size >= 1, "scene.cell_size", "must be >= 1");
    check(finite_in(scene.bowtie_half_angle_deg, 0.0, 90.0) && scene.bowtie_half_angle_deg > 0.0 &&
              scene.bowtie_half_angle_deg < 90.0,
          "scene.bowtie_half_angle_deg", "must lie in (0, 90)");
    check(std::isfinite(scene.bowtie_radius) && scene.bowtie_radius > 0.0, "scene.bowtie_radius",
          "must be > 0");
    if (!scene.weight_map.empty()) {
        check(std::filesystem::is_regular_file(scene.weight_map), "scene.weight_map",
              "file not found: " + scene.weight_map);
    }
    check(std::filesystem::is_directory(font_path()), "scene.font_dir",
          "directory not found: " + font_path().string());

    const AcquisitionSection& a = acquisition;
    try {
        a.trace_config().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("acquisition", e.what());
    }
    check(a.series >= 1, "acquisition.series", "must be >= 1");
    check(a.angles_deg.size() >= 5, "acquisition.angles_deg", "needs at least 5 angles");
    for (std::size_t i = 0; i < a.angles_deg.size(); ++i) {
        const double d = a.angles_deg[i];
        check(finite_in(d, 0.0, 2.0 * scene.bowtie_half_angle_deg) &&
                  d < 2.0 * scene.bowtie_half_angle_deg,
              "acquisition.angles_deg", "angles must lie in [0, 2 * bowtie_half_angle_deg)");
        check(i == 0 || d > a.angles_deg[i - 1], "acquisition.angles_deg",
              "angles must be strictly increasing");
    }

    check(alphabet.mask >= 'A' && alphabet.mask <= 'Z', "alphabet.mask", "must be a letter A-Z");
    check(alphabet.grid >= 8 && alphabet.grid <= 4096, "alphabet.grid", "must lie in [8, 4096]");
    check(alphabet.cell_size >= 1, "alphabet.cell_size", "must be >= 1");
    check(std::isfinite(alphabet.lo_power_per_pixel) && alphabet.lo_power_per_pixel > 0.0,
          "alphabet.lo_power_per_pixel", "must be > 0");
    check(alphabet.series >= 1, "alphabet.series", "must be >= 1");

    check(finite_in(analysis.slope_floor, 0.0, 1e6) && analysis.slope_floor > 0.0,
          "analysis.slope_floor", "must be > 0");
    check(finite_in(analysis.enhancement_threshold, 0.0, 1.0) &&
              analysis.enhancement_threshold < 1.0,
          "analysis.enhancement_threshold", "must lie in [0, 1)");
    check(finite_in(analysis.fit_line_threshold, 0.0, 1.0) && analysis.fit_line_threshold < 1.0,
          "analysis.fit_line_threshold", "must lie in [0, 1)");
    check(!output_dir.empty(), "output.dir", "must not be empty");
}

TwinBeamParams RunConfig::twin_beam_params() const {
    TwinBeamParams p;
    p.t_probe = source.t_probe;
    p.t_conj = source.t_conj;
    p.lock_noise = source.lock_noise;
    p.electronic_floor = source.electronic_floor;
    if (source.r) {
        p.r = *source.r;
        return p;
    }
    const double db = -std::abs(source.squeezing_db);
    if (source.squeezing_convention == "intrinsic") {
        p.r = r_from_lossless_db(db);
        return p;
    }
    try {
        p.r = calibrate_detected_r(db, p);
    } catch (const std::domain_error& e) {
        throw ConfigError("source.squeezing_db", e.what());
    }
    return p;
}

CoherenceGrid RunConfig::coherence_grid() const {
    return CoherenceGrid{scene.cell_size, scene.origin_x, scene.origin_y};
}

std::filesystem::path RunConfig::font_path() const {
    return scene.font_dir.empty() ? Font::bundled_dir() : std::filesystem::path(scene.font_dir);
}

void write_config(std::ostream& out, const RunConfig& c) {
    out << "[source]\n";
    out << fmt::format("squeezing_db = {}\n", c.source.squeezing_db);
    out << fmt::format("squeezing_convention = {}\n", c.source.squeezing_convention);
    if (c.source.r) {
        out << fmt::format("r = {}\n", *c.source.r);
    }
    out << fmt::format("t_probe = {}\n", c.source.t_probe);
    out << fmt::format("t_conj = {}\n", c.source.t_conj);
    out << fmt::format("lock_noise = {}\n", c.source.lock_noise);
    out << fmt::format("electronic_floor = {}\n", c.source.electronic_floor);

    out << "\n[scene]\n";
    out << fmt::format("grid = {}\n", c.scene.grid);
    out << fmt::format("cell_size = {}\n", c.scene.cell_size);
    out << fmt::format("origin_x = {}\n", c.scene.origin_x);
    out << fmt::format("origin_y = {}\n", c.scene.origin_y);
    out << fmt::format("bowtie_half_angle_deg = {}\n", c.scene.bowtie_half_angle_deg);
    out << fmt::format("bowtie_radius = {}\n", c.scene.bowtie_radius);
    out << fmt::format("weight_map = {}\n", c.scene.weight_map);
    out << fmt::format("font_dir = {}\n", c.scene.font_dir);

    out << "\n[acquisition]\n";
    out << fmt::format("points_per_trace = {}\n", c.acquisition.points_per_trace);
    out << fmt::format("segment_length = {}\n", c.acquisition.segment_length);
    out << fmt::format("samples_per_point = {}\n", c.acquisition.samples_per_point);
    out << fmt::format("point_correlation = {}\n", c.acquisition.point_correlation);
    out << fmt::format("seed = {}\n", c.acquisition.seed);
    out << fmt::format("series = {}\n", c.acquisition.series);
    out << fmt::format("angles_deg = {}\n", format_list(c.acquisition.angles_deg));

    out << "\n[alphabet]\n";
    out << fmt::format("mask = {}\n", c.alphabet.mask);
    out << fmt::format("grid = {}\n", c.alphabet.grid);
    out << fmt::format("cell_size = {}\n", c.alphabet.cell_size);
    out << fmt::format("lo_power_per_pixel = {}\n", c.alphabet.lo_power_per_pixel);
    out << fmt::format("series = {}\n", c.alphabet.series);

    out << "\n[analysis]\n";
    out << fmt::format("slope_floor = {}\n", c.analysis.slope_floor);
    out << fmt::format("enhancement_threshold = {}\n", c.analysis.enhancement_threshold);
    out << fmt::format("fit_line_threshold = {}\n", c.analysis.fit_line_threshold);

    out << "\n[output]\n";
    out << fmt::format("dir = {}\n", c.output_dir);
}

void save_config(const std::filesystem::path& path, const RunConfig& config) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    write_config(out, config);
}

}  // namespace qnoise
