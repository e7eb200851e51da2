#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "heatcast/config.hpp"
#include "heatcast/conformal.hpp"
#include "heatcast/errors.hpp"
#include "heatcast/pipeline.hpp"
#include "heatcast/synth.hpp"

namespace {

using heatcast::config::RunConfig;

struct RunFlags {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::vector<double> alphas;
    bool simultaneous = false;
    std::string score_predictor;
    bool calibrated_conformal = false;
};

void add_run(CLI::App& app) {
    auto flags = std::make_shared<RunFlags>();
    CLI::App* cmd = app.add_subcommand("run", "Train, calibrate and forecast one run directory");
    cmd->add_option("--config", flags->config_path, "Run configuration file")->required();
    auto* out_opt = cmd->add_option("--out", flags->out_dir, "Output directory override");
    auto* seed_opt = cmd->add_option("--seed", flags->seed, "Master seed override");
    auto* alpha_opt =
        cmd->add_option("--alpha", flags->alphas, "Miscoverage level (repeatable, overrides)");
    cmd->add_flag("--simultaneous", flags->simultaneous,
                  "Split the levels for simultaneous coverage");
    auto* sp_opt = cmd->add_option("--score-predictor", flags->score_predictor,
                                   "Score-forest predictor: fitted or observed")
                       ->check(CLI::IsMember({"fitted", "observed"}));
    cmd->add_flag("--calibrated-conformal", flags->calibrated_conformal,
                  "Split calibration with a finite-sample conformity adjustment");

    cmd->callback([flags, out_opt, seed_opt, alpha_opt, sp_opt]() {
        RunConfig config = heatcast::config::load_run_config(flags->config_path);
        if (out_opt->count() > 0) config.out_dir = flags->out_dir;
        if (seed_opt->count() > 0) config.seed = flags->seed;
        if (alpha_opt->count() > 0) config.alphas = flags->alphas;
        if (flags->simultaneous) config.simultaneous = true;
        if (sp_opt->count() > 0) {
            config.score_predictor = heatcast::conformal::parse_score_predictor(
                flags->score_predictor);
        }
        if (flags->calibrated_conformal) config.calibrated_conformal = true;
        heatcast::pipeline::cmd_run(std::move(config));
    });
}

struct ForecastFlags {
    std::string model_dir;
    std::string predictors;
    std::string out_path;
    std::vector<double> alphas;
    bool simultaneous = false;
};

void add_forecast(CLI::App& app) {
    auto flags = std::make_shared<ForecastFlags>();
    CLI::App* cmd = app.add_subcommand("forecast", "Intervals for new predictor rows");
    cmd->add_option("model_dir", flags->model_dir, "Completed run directory")->required();
    cmd->add_option("predictors", flags->predictors, "CSV with columns x1..x8")->required();
    cmd->add_option("--alpha", flags->alphas,
                    "Miscoverage level (repeatable; defaults to 0.10 and 0.30)");
    cmd->add_flag("--simultaneous", flags->simultaneous,
                  "Split the levels for simultaneous coverage");
    auto* out_opt = cmd->add_option("--out", flags->out_path, "Output CSV (default stdout)");

    cmd->callback([flags, out_opt]() {
        if (out_opt->count() > 0) {
            std::ofstream out(flags->out_path, std::ios::binary | std::ios::trunc);
            if (!out) throw heatcast::DataError("cannot write '" + flags->out_path + "'");
            heatcast::pipeline::cmd_forecast(flags->model_dir, flags->predictors, flags->alphas,
                                             flags->simultaneous, out);
        } else {
            heatcast::pipeline::cmd_forecast(flags->model_dir, flags->predictors, flags->alphas,
                                             flags->simultaneous, std::cout);
        }
    });
}

void add_diagnose(CLI::App& app) {
    auto model_dir = std::make_shared<std::string>();
    CLI::App* cmd = app.add_subcommand("diagnose", "Score diagnostics and validity warnings");
    cmd->add_option("model_dir", *model_dir, "Completed run directory")->required();
    cmd->callback([model_dir]() { heatcast::pipeline::cmd_diagnose(*model_dir, std::cout); });
}

void add_evaluate(CLI::App& app) {
    auto model_dir = std::make_shared<std::string>();
    CLI::App* cmd = app.add_subcommand("evaluate", "Coverage and interval-length report");
    cmd->add_option("model_dir", *model_dir, "Completed run directory")->required();
    cmd->callback([model_dir]() { heatcast::pipeline::cmd_evaluate(*model_dir, std::cout); });
}

struct SynthFlags {
    std::string scenario_path;
    std::string out_dir;
    std::uint64_t seed = 1;
};

void add_synth(CLI::App& app) {
    auto flags = std::make_shared<SynthFlags>();
    CLI::App* cmd = app.add_subcommand("synth", "Generate a synthetic train/test dataset");
    auto* cfg_opt = cmd->add_option("--config", flags->scenario_path,
                                    "Scenario file (defaults used when absent)");
    cmd->add_option("--out", flags->out_dir, "Output directory")->required();
    cmd->add_option("--seed", flags->seed, "Generator seed");

    cmd->callback([flags, cfg_opt]() {
        heatcast::synth::ScenarioSpec spec;
        if (cfg_opt->count() > 0) spec = heatcast::config::load_scenario(flags->scenario_path);
        heatcast::pipeline::cmd_synth(spec, flags->seed, flags->out_dir);
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rare-quantile temperature forecasts with adaptive conformal intervals"};
    app.require_subcommand(1);
    add_run(app);
    add_forecast(app);
    add_diagnose(app);
    add_evaluate(app);
    add_synth(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const heatcast::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const heatcast::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const heatcast::ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
