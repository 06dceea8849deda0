// qnoise: overlap sweeps, the alphabet test and squeezing calibration.
//
//   qnoise sweep                [--config F] [--seed N] [--out DIR]
//   qnoise alphabet --mask L    [--config F] [--seed N] [--out DIR]
//   qnoise calibrate --db V     [--convention detected|intrinsic] [--config F] [--out DIR]
//
// On failure a single JSON object is written to stderr and the exit code is
// 2 for configuration errors, 1 otherwise.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "qnoise/commands.hpp"
#include "qnoise/run_config.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "Run configuration (INI)");
    cmd->add_option("--seed", flags.seed, "Top-level RNG seed");
    cmd->add_option("--out", flags.out_dir, "Output directory");
}

qnoise::RunConfig resolve(const CommonFlags& flags) {
    qnoise::RunConfig config;
    if (!flags.config_path.empty()) {
        config = qnoise::load_config(flags.config_path);
    }
    if (flags.seed) {
        config.acquisition.seed = *flags.seed;
    }
    if (!flags.out_dir.empty()) {
        config.output_dir = flags.out_dir;
    }
    return config;
}

int fail(const std::string& kind, const std::string& message, const std::string& field, int code) {
    nlohmann::json err = {{"error", kind}, {"message", message}};
    if (!field.empty()) {
        err["field"] = field;
    }
    std::cerr << err.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum noise imaging simulator"};
    app.require_subcommand(1);

    CommonFlags flags;
    char mask = 'Z';
    double db = 0.0;
    std::string convention;

    CLI::App* sweep = app.add_subcommand("sweep", "Bow tie overlap sweep, fits and enhancement");
    add_common(sweep, flags);

    CLI::App* alphabet = app.add_subcommand("alphabet", "Letter recognition against a mask");
    add_common(alphabet, flags);
    alphabet->add_option("--mask", mask, "Mask letter")->required();

    CLI::App* calibrate = app.add_subcommand("calibrate", "Solve r for a squeezing level");
    add_common(calibrate, flags);
    calibrate->add_option("--db", db, "Squeezing in dB (sign ignored)")->required();
    calibrate->add_option("--convention", convention, "detected or intrinsic")
        ->check(CLI::IsMember({"detected", "intrinsic"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), "", 2);
    }

    try {
        qnoise::RunConfig config = resolve(flags);
        if (*sweep) {
            const qnoise::SweepResult result = qnoise::run_sweep(config);
            qnoise::write_sweep_outputs(result, config.output_dir);
            std::cout << fmt::format("sweep: {} rows, r = {:.5f}", result.rows.size(),
                                     result.params.r);
            if (result.enhancement) {
                std::cout << fmt::format(", enhancement {:.3f} +/- {:.3f}",
                                         result.enhancement->factor, result.enhancement->sigma);
            }
            std::cout << fmt::format(" -> {}\n", config.output_dir);
        } else if (*alphabet) {
            const qnoise::AlphabetRun run = qnoise::run_alphabet(config, mask);
            qnoise::write_alphabet_outputs(run, config.output_dir);
            const auto& q = run.result.quantum_ranking;
            const auto& c = run.result.classical_ranking;
            std::cout << fmt::format(
                "alphabet: mask {}, quantum best {} ({:.2f} sigma), classical best {} "
                "({:.2f} sigma), sub-SNL [{}], excluded [{}] -> {}\n",
                run.mask, q.best, q.sigma_separation, c.best, c.sigma_separation,
                q.sub_snl_letters, run.result.excluded_letters, config.output_dir);
        } else if (*calibrate) {
            if (!convention.empty()) {
                config.source.squeezing_convention = convention;
            }
            const qnoise::CalibrationResult result = qnoise::calibrate(config, db);
            qnoise::write_calibration_outputs(result, config.output_dir);
            std::cout << fmt::format("calibrate: r = {:.6f}, detected {:.4f} dB -> {}\n",
                                     result.r, result.detected_db, config.output_dir);
        }
    } catch (const qnoise::ConfigError& e) {
        return fail("config", e.what(), e.field(), 2);
    } catch (const std::exception& e) {
        return fail("runtime", e.what(), "", 1);
    }
    return 0;
}
