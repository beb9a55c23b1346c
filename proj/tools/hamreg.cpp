// hamreg: generate pendulum data, train energy-based models, evaluate
// rollouts and rebuild the energy-error tables.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "hamreg/cli/commands.hpp"

using namespace hamreg;

namespace {

/// Overrides config values with whichever flags were given.
struct TrainFlags {
    std::string config;
    std::string system, split, family, coords, dataset, out, lr_schedule;
    std::optional<double> lambda_h;
    std::optional<std::uint64_t> seed;
    std::optional<long> epochs;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "key = value config file");
        app->add_option("--system", system, "single | double");
        app->add_option("--split", split, "f | s");
        app->add_option("--family", family, "baseline | hnn | chnn | lnn");
        app->add_option("--coords", coords, "generalized | cartesian");
        app->add_option("--dataset", dataset, "dataset CSV (generated when omitted)");
        app->add_option("--lambda-h", lambda_h, "energy regularization weight");
        app->add_option("--seed", seed, "random seed");
        app->add_option("--epochs", epochs, "training epochs");
        app->add_option("--lr-schedule", lr_schedule, "standard | scaled | epoch:rate,...");
        app->add_option("--out", out, "output directory");
    }

    cli::RunConfig resolve() const {
        cli::RunConfig cfg = config.empty() ? cli::RunConfig{} : cli::load_config(config);
        auto set = [&](const char* key, const std::string& v) {
            if (!v.empty()) cli::apply_setting(cfg, key, v);
        };
        set("system", system);
        set("split", split);
        set("family", family);
        set("coords", coords);
        set("dataset", dataset);
        set("out_dir", out);
        set("lr_schedule", lr_schedule);
        if (lambda_h) cfg.lambda_h = *lambda_h;
        if (seed) cfg.seed = *seed;
        if (epochs) cfg.epochs = *epochs;
        cfg.validate();
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hamiltonian, Lagrangian and constrained neural networks with energy-level regularization"};
    app.require_subcommand(1);

    std::string system = "single", split = "s", coords = "generalized", out = ".";
    std::uint64_t seed = 0;
    auto* gen = app.add_subcommand("generate", "write a pendulum dataset");
    gen->add_option("--system", system, "single | double")->capture_default_str();
    gen->add_option("--split", split, "f | s")->capture_default_str();
    gen->add_option("--coords", coords, "generalized | cartesian")->capture_default_str();
    gen->add_option("--seed", seed, "seed for the double-pendulum initial conditions")->capture_default_str();
    gen->add_option("--out", out, "output directory")->capture_default_str();

    TrainFlags train_flags;
    auto* train = app.add_subcommand("train", "train one model");
    train_flags.attach(train);

    TrainFlags cv_flags;
    int cv_ics = 10;
    double cv_horizon = 100.0;
    std::string grid;
    auto* cv = app.add_subcommand("crossval", "select lambda_h on held-out initial conditions");
    cv_flags.attach(cv);
    cv->add_option("--n-ics", cv_ics, "validation initial conditions")->capture_default_str();
    cv->add_option("--horizon", cv_horizon, "rollout length in seconds")->capture_default_str();
    cv->add_option("--lambda-grid", grid, "comma-separated weights, must include 0");

    cli::EvaluateOptions eval_opts;
    std::string eval_system = "single";
    std::string eval_out = ".";
    auto* eval = app.add_subcommand("evaluate", "energy error of rollouts from unseen initial conditions");
    eval->add_option("--checkpoint", eval_opts.checkpoint, "checkpoint JSON, or 'truth'")->required();
    eval->add_option("--system", eval_system, "system for the 'truth' pseudo-checkpoint")->capture_default_str();
    eval->add_option("--n-ics", eval_opts.n_ics, "number of initial conditions")->capture_default_str();
    eval->add_option("--horizon", eval_opts.horizon, "rollout length in seconds")->capture_default_str();
    eval->add_option("--seed", eval_opts.seed, "seed for the initial conditions")->capture_default_str();
    eval->add_option("--substeps", eval_opts.grid.substeps, "RK4 steps per 0.1 s output interval")->capture_default_str();
    eval->add_option("--out", eval_out, "output directory")->capture_default_str();

    cli::ReproduceOptions rep;
    std::string rep_out = "reproduce";
    auto* repro = app.add_subcommand("reproduce", "train and evaluate all six schemes on both splits");
    repro->add_option("--table", rep.table, "1 (single pendulum) | 2 (double pendulum)")->capture_default_str();
    repro->add_option("--scale", rep.scale, "desk | full")->capture_default_str();
    repro->add_option("--seed", rep.seed, "seed")->capture_default_str();
    repro->add_option("--epochs", rep.epochs, "override the scale's epoch count");
    repro->add_option("--n-ics", rep.n_ics, "test initial conditions")->capture_default_str();
    repro->add_option("--horizon", rep.horizon, "rollout length in seconds")->capture_default_str();
    repro->add_option("--substeps", rep.grid.substeps, "RK4 steps per 0.1 s output interval")->capture_default_str();
    repro->add_option("--out", rep_out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitConfig;
    }

    return cli::run_guarded(
        [&]() -> int {
            if (*gen) {
                cli::GenerateOptions g;
                g.system = physics::parse_system(system);
                g.split = training::parse_split(split);
                g.coords = models::parse_coords(coords);
                g.seed = seed;
                g.out = out;
                return cli::cmd_generate(g, std::cout);
            }
            if (*train) return cli::cmd_train(train_flags.resolve(), std::cout);
            if (*cv) {
                cli::RunConfig cfg = cv_flags.resolve();
                if (!grid.empty()) cli::apply_setting(cfg, "lambda_grid", grid);
                return cli::cmd_crossval(cfg, cv_ics, cv_horizon, std::cout);
            }
            if (*eval) {
                eval_opts.system = physics::parse_system(eval_system);
                eval_opts.out = eval_out;
                return cli::cmd_evaluate(eval_opts, std::cout);
            }
            rep.out = rep_out;
            return cli::cmd_reproduce(rep, std::cout);
        },
        std::cerr);
}
