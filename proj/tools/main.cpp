// okid — occupation-kernel identification of control-affine systems.
//
// Subcommands: generate, identify, evaluate, montecarlo, control-demo.
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 IO error.

#include <CLI11.hpp>
#include <iostream>

#include "okid/errors.hpp"
#include "okid/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config JSON")->required();
    cmd->add_option("--set", args.overrides,
                    "override a config field via dotted path, e.g. model.lambda=1e-4");
    cmd->add_option("--out", args.out_dir, "output directory (default: config output_dir)");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--threads", args.threads, "worker threads (0 = all cores)");
}

okid::ExperimentConfig load(const CommonArgs& args) {
    auto cfg = okid::load_config(args.config_path, args.overrides);
    if (args.seed) cfg.seed = *args.seed;
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"occupation-kernel identification of control-affine systems"};
    app.require_subcommand(1);

    CommonArgs gen_args, id_args, eval_args, mc_args, demo_args;
    std::string id_data_dir, eval_model_path, demo_model_path;
    int mc_trials = 0;

    auto* gen = app.add_subcommand("generate", "simulate and record a trajectory dataset");
    add_common(gen, gen_args);

    auto* ident = app.add_subcommand("identify", "fit a model to a recorded dataset");
    add_common(ident, id_args);
    ident->add_option("--data", id_data_dir, "dataset directory (holds manifest.json)")
        ->required();

    auto* eval = app.add_subcommand("evaluate", "evaluate a model against the true plant");
    add_common(eval, eval_args);
    eval->add_option("--model", eval_model_path, "model JSON file")->required();

    auto* mc = app.add_subcommand("montecarlo", "repeated generate+identify+evaluate trials");
    add_common(mc, mc_args);
    mc->add_option("--trials", mc_trials, "number of trials")->required();

    auto* demo = app.add_subcommand("control-demo",
                                    "closed-loop computed-torque regulation demo");
    add_common(demo, demo_args);
    demo->add_option("--model", demo_model_path,
                     "model JSON file; omit for the exact-model run only");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const auto cfg = load(gen_args);
            okid::run_generate(cfg, cfg.output_dir);
        } else if (ident->parsed()) {
            const auto cfg = load(id_args);
            okid::run_identify(cfg, id_data_dir, cfg.output_dir, id_args.threads);
        } else if (eval->parsed()) {
            const auto cfg = load(eval_args);
            const auto model = okid::load_model(eval_model_path);
            okid::run_evaluate(cfg, model, cfg.output_dir);
        } else if (mc->parsed()) {
            const auto cfg = load(mc_args);
            okid::run_montecarlo(cfg, mc_trials, cfg.output_dir, mc_args.threads);
        } else if (demo->parsed()) {
            const auto cfg = load(demo_args);
            std::optional<okid::IdentifiedModel> model;
            if (!demo_model_path.empty()) model = okid::load_model(demo_model_path);
            okid::run_control_demo(cfg, model, cfg.output_dir);
        }
    } catch (const okid::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const okid::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const okid::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
