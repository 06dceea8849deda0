#include "qnoise/commands.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "json.hpp"

#include "parallel.hpp"
#include "qnoise/gaussian_core.hpp"
#include "qnoise/seeding.hpp"

namespace qnoise {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

void write_json(const std::filesystem::path& path, const json& doc) {
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
}

json config_json(const RunConfig& c, const TwinBeamParams& params) {
    json source = {{"squeezing_db", c.source.squeezing_db},
                   {"squeezing_convention", c.source.squeezing_convention},
                   {"r", c.source.r ? json(*c.source.r) : json(nullptr)},
                   {"r_resolved", params.r},
                   {"t_probe", c.source.t_probe},
                   {"t_conj", c.source.t_conj},
                   {"lock_noise", c.source.lock_noise},
                   {"electronic_floor", c.source.electronic_floor}};
    json scene = {{"grid", c.scene.grid},
                  {"cell_size", c.scene.cell_size},
                  {"origin_x", c.scene.origin_x},
                  {"origin_y", c.scene.origin_y},
                  {"bowtie_half_angle_deg", c.scene.bowtie_half_angle_deg},
                  {"bowtie_radius", c.scene.bowtie_radius},
                  {"weight_map", c.scene.weight_map},
                  {"font_dir", c.font_path().string()}};
    json acquisition = {{"points_per_trace", c.acquisition.points_per_trace},
                        {"segment_length", c.acquisition.segment_length},
                        {"samples_per_point", c.acquisition.samples_per_point},
                        {"point_correlation", c.acquisition.point_correlation},
                        {"seed", c.acquisition.seed},
                        {"series", c.acquisition.series},
                        {"angles_deg", c.acquisition.angles_deg}};
    json alphabet = {{"mask", std::string(1, c.alphabet.mask)},
                     {"grid", c.alphabet.grid},
                     {"cell_size", c.alphabet.cell_size},
                     {"lo_power_per_pixel", c.alphabet.lo_power_per_pixel},
                     {"series", c.alphabet.series}};
    json analysis = {{"slope_floor", c.analysis.slope_floor},
                     {"enhancement_threshold", c.analysis.enhancement_threshold},
                     {"fit_line_threshold", c.analysis.fit_line_threshold}};
    // The output directory is left out so reruns into different places match byte for byte.
    return {{"source", source},     {"scene", scene},       {"acquisition", acquisition},
            {"alphabet", alphabet}, {"analysis", analysis}};
}

json curve_json(const NoiseCurve& curve) {
    json points = json::array();
    for (const CurvePoint& p : curve.points) {
        points.push_back({{"overlap", p.overlap},
                          {"n", p.measurement.n},
                          {"delta_n", p.measurement.delta_n},
                          {"n_sem", p.n_sem}});
    }
    return {{"technique", to_string(curve.technique)},
            {"coeffs", curve.coeffs},
            {"coeff_sigma", curve.coeff_sigma},
            {"line_intercept", curve.line_intercept},
            {"line_slope", curve.line_slope},
            {"synthetic_n", curve.synthetic_n},
            {"residual_rms", curve.residual_rms},
            {"points", points}};
}

json enhancement_json(const std::optional<Enhancement>& e) {
    if (!e) {
        return nullptr;
    }
    return {{"factor", e->factor},
            {"sigma", e->sigma},
            {"classical_mean", e->classical_mean},
            {"quantum_mean", e->quantum_mean},
            {"classical_count", e->classical_count},
            {"quantum_count", e->quantum_count}};
}

json delta_o_json(const std::vector<DeltaOPoint>& table) {
    json rows = json::array();
    for (const DeltaOPoint& p : table) {
        rows.push_back({{"overlap", p.overlap},
                        {"delta_o", p.sensitive ? json(p.delta_o) : json(nullptr)},
                        {"sensitive", p.sensitive}});
    }
    return rows;
}

std::optional<double> snl_crossing(const NoiseCurve& curve) {
    auto f = [&](double o) { return curve.value(o) - 1.0; };
    constexpr int kSteps = 1000;
    for (int k = 0; k < kSteps; ++k) {
        const double a = static_cast<double>(k) / kSteps;
        const double b = static_cast<double>(k + 1) / kSteps;
        const double fa = f(a);
        const double fb = f(b);
        if (fa == 0.0) {
            return a;
        }
        if ((fa < 0.0) != (fb < 0.0)) {
            boost::uintmax_t iterations = 100;
            const auto [lo, hi] = boost::math::tools::toms748_solve(
                f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(50), iterations);
            return 0.5 * (lo + hi);
        }
    }
    return std::nullopt;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

SweepResult run_sweep(const RunConfig& config) {
    config.validate();
    SweepResult result;
    result.config = config;
    result.params = config.twin_beam_params();
    result.angles_deg = config.acquisition.angles_deg;

    const SceneConfig& scene = config.scene;
    std::optional<WeightMap> weights;
    if (!scene.weight_map.empty()) {
        weights = load_pgm_weights(scene.weight_map);
        if (weights->width() != scene.grid || weights->height() != scene.grid) {
            throw ConfigError("scene.weight_map", "weight map size must match scene.grid");
        }
    }
    const WeightMap* w = weights ? &*weights : nullptr;

    BowtieGeometry geometry;
    geometry.half_angle = scene.bowtie_half_angle_deg * kDeg;
    geometry.radius = scene.bowtie_radius;
    geometry.width = scene.grid;
    geometry.height = scene.grid;
    const Bitmap mask = bowtie(geometry);

    const std::size_t n_angles = result.angles_deg.size();
    const int series = config.acquisition.series;
    const AcquisitionConfig base = config.acquisition.trace_config();
    result.overlaps.resize(n_angles);
    std::vector<std::array<double, 2>> n_model(n_angles);
    // [angle][technique][series]
    std::vector<std::array<std::vector<NoiseMeasurement>, 2>> measured(n_angles);

    detail::parallel_for(n_angles, [&](std::size_t k) {
        BowtieGeometry lo_geometry = geometry;
        lo_geometry.rotation = result.angles_deg[k] * kDeg;
        const Bitmap lo = bowtie(lo_geometry);
        const CellDecomposition cells = decompose(lo, mask, config.coherence_grid(), w);
        result.overlaps[k] = overlap(lo, mask, w);
        for (int t = 0; t < 2; ++t) {
            const Technique technique = t == 0 ? Technique::classical : Technique::quantum;
            n_model[k][t] = noise(technique, cells, result.params);
            for (int s = 0; s < series; ++s) {
                AcquisitionConfig cfg = base;
                cfg.rng_seed = derive_seed(base.rng_seed, "sweep-trace",
                                           k * 1000 + static_cast<std::uint64_t>(s));
                measured[k][t].push_back(
                    segment_stats(simulate_trace(n_model[k][t], cfg), technique));
            }
        }
    });

    std::array<std::vector<CurvePoint>, 2> points;
    for (std::size_t k = 0; k < n_angles; ++k) {
        for (int t = 0; t < 2; ++t) {
            const Technique technique = t == 0 ? Technique::classical : Technique::quantum;
            std::vector<double> ns;
            std::vector<double> dns;
            for (int s = 0; s < series; ++s) {
                const NoiseMeasurement& m = measured[k][t][static_cast<std::size_t>(s)];
                result.rows.push_back({result.angles_deg[k], result.overlaps[k], technique, s,
                                       n_model[k][t], m});
                ns.push_back(m.n);
                dns.push_back(m.delta_n);
            }
            CurvePoint p;
            p.overlap = result.overlaps[k];
            p.measurement.n = mean(ns);
            p.measurement.delta_n = mean(dns);
            p.measurement.technique = technique;
            p.n_sem = standard_error(ns);
            points[static_cast<std::size_t>(t)].push_back(p);
        }
    }

    FitOptions fit;
    fit.line_threshold = config.analysis.fit_line_threshold;
    result.classical_curve = fit_noise_curve(points[0], Technique::classical, fit);
    result.quantum_curve = fit_noise_curve(points[1], Technique::quantum, fit);
    const double floor = config.analysis.slope_floor;
    result.classical_delta_o = delta_o_table(result.classical_curve, floor);
    result.quantum_delta_o = delta_o_table(result.quantum_curve, floor);
    result.o_cross = snl_crossing(result.quantum_curve);

    const double threshold = config.analysis.enhancement_threshold;
    try {
        result.enhancement =
            enhancement(result.classical_delta_o, result.quantum_delta_o, threshold);
        std::vector<std::pair<double, double>> table;
        for (std::size_t k = 0; k < n_angles; ++k) {
            table.emplace_back(result.angles_deg[k] * kDeg, result.overlaps[k]);
        }
        const AngleCalibration calibration = AngleCalibration::from_lookup(std::move(table));
        result.angle_enhancement = angle_enhancement(result.classical_delta_o,
                                                     result.quantum_delta_o, calibration,
                                                     threshold);
    } catch (const std::invalid_argument& e) {
        result.enhancement_error = e.what();
    }
    return result;
}

void write_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_output(dir / "sweep.csv");
        out << "# schema=" << kSweepSchema << '\n';
        out << "angle_deg,overlap,technique,series,n,delta_n,n_db,n_model\n";
        for (const SweepRow& row : result.rows) {
            out << fmt::format("{},{:.9f},{},{},{:.9f},{:.9f},{:.6f},{:.9f}\n", row.angle_deg,
                               row.overlap, to_string(row.technique), row.series,
                               row.measurement.n, row.measurement.delta_n,
                               to_db(row.measurement.n), row.n_model);
        }
    }
    write_json(dir / "fits.json",
               {{"classical", curve_json(result.classical_curve)},
                {"quantum", curve_json(result.quantum_curve)}});

    json angles = json::array();
    for (std::size_t k = 0; k < result.angles_deg.size(); ++k) {
        angles.push_back({{"angle_deg", result.angles_deg[k]}, {"overlap", result.overlaps[k]}});
    }
    json summary = {
        {"schema", "qnoise.summary.v1"},
        {"config", config_json(result.config, result.params)},
        {"calibration", angles},
        {"delta_o",
         {{"classical", delta_o_json(result.classical_delta_o)},
          {"quantum", delta_o_json(result.quantum_delta_o)}}},
        {"enhancement", enhancement_json(result.enhancement)},
        {"angle_enhancement", enhancement_json(result.angle_enhancement)},
        {"o_cross", result.o_cross ? json(*result.o_cross) : json(nullptr)},
        {"quantum_n_at_full_overlap_db", to_db(result.quantum_curve.value(1.0))},
        {"classical_n_at_full_overlap", result.classical_curve.value(1.0)}};
    if (!result.enhancement_error.empty()) {
        summary["enhancement_error"] = result.enhancement_error;
    }
    write_json(dir / "summary.json", summary);
}

AlphabetRun run_alphabet(const RunConfig& config, char mask_letter) {
    config.validate();
    const Font font = Font::load(config.font_path());
    if (!font.has(mask_letter)) {
        throw ConfigError("alphabet.mask",
                          fmt::format("unknown letter '{}' in font", mask_letter));
    }
    AlphabetRun run;
    run.config = config;
    run.config.alphabet.mask = mask_letter;
    run.params = config.twin_beam_params();
    run.mask = mask_letter;
    const AlphabetOptions options = config.alphabet.options();
    const Bitmap mask = glyph(mask_letter, font, options.grid, options.grid);
    run.result =
        alphabet_gun(mask, font, run.params, config.acquisition.trace_config(), options);
    return run;
}

void write_alphabet_outputs(const AlphabetRun& run, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const AlphabetResult& r = run.result;
    {
        auto out = open_output(dir / "alphabet.csv");
        out << "# schema=" << kAlphabetSchema << '\n';
        out << "letter,technique,overlap,valid,n_baseline,delta_n_baseline,n_masked,"
               "delta_n_masked,n_masked_db,d,sigma_d,sub_snl,exclusion\n";
        for (const auto* records : {&r.classical, &r.quantum}) {
            for (const DeviationRecord& rec : *records) {
                const Technique technique =
                    records == &r.classical ? Technique::classical : Technique::quantum;
                if (!rec.valid) {
                    out << fmt::format("{},{},{:.9f},0,,,,,,,,,{}\n", rec.letter,
                                       to_string(technique), rec.overlap, rec.exclusion);
                    continue;
                }
                out << fmt::format("{},{},{:.9f},1,{:.9f},{:.9f},{:.9f},{:.9f},{:.6f},{:.9f},"
                                   "{:.9f},{},\n",
                                   rec.letter, to_string(technique), rec.overlap, rec.baseline.n,
                                   rec.baseline.delta_n, rec.masked.n, rec.masked.delta_n,
                                   to_db(rec.masked.n), rec.d, rec.sigma_d, rec.sub_snl ? 1 : 0);
            }
        }
    }
    auto ranking_json = [](const LetterRanking& ranking) {
        json ranked = json::array();
        for (const DeviationRecord& rec : ranking.ranked) {
            ranked.push_back({{"letter", std::string(1, rec.letter)},
                              {"d", rec.d},
                              {"sigma_d", rec.sigma_d},
                              {"overlap", rec.overlap},
                              {"sub_snl", rec.sub_snl}});
        }
        return json{{"best", std::string(1, ranking.best)},
                    {"runner_up", std::string(1, ranking.runner_up)},
                    {"sigma_separation", ranking.sigma_separation},
                    {"sub_snl_letters", ranking.sub_snl_letters},
                    {"ranked", ranked}};
    };
    json excluded = json::array();
    for (const DeviationRecord& rec : r.quantum) {
        if (!rec.valid) {
            excluded.push_back(
                {{"letter", std::string(1, rec.letter)}, {"reason", rec.exclusion}});
        }
    }
    write_json(dir / "ranking.json",
               {{"schema", "qnoise.ranking.v1"},
                {"mask", std::string(1, run.mask)},
                {"config", config_json(run.config, run.params)},
                {"classical", ranking_json(r.classical_ranking)},
                {"quantum", ranking_json(r.quantum_ranking)},
                {"excluded", excluded}});
}

CalibrationResult calibrate(const RunConfig& config, double target_db) {
    if (!std::isfinite(target_db)) {
        throw ConfigError("db", "target must be finite");
    }
    CalibrationResult out;
    out.config = config;
    out.config.source.squeezing_db = -std::abs(target_db);
    out.config.source.r.reset();
    out.config.validate();
    const TwinBeamParams params = out.config.twin_beam_params();
    out.r = params.r;
    out.config.source.r = params.r;
    out.detected_db = to_db(detected_noise(params));
    out.intrinsic_db = lossless_db_from_r(params.r);
    return out;
}

void write_calibration_outputs(const CalibrationResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_config(dir / "calibrated.ini", result.config);
    TwinBeamParams params = result.config.twin_beam_params();
    write_json(dir / "calibration.json",
               {{"schema", "qnoise.calibration.v1"},
                {"r", result.r},
                {"detected_db", result.detected_db},
                {"intrinsic_db", result.intrinsic_db},
                {"config", config_json(result.config, params)}});
}

}  // namespace qnoise
