#include "hamreg/cli/commands.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include "json.hpp"

#include "hamreg/cli/io.hpp"
#include "hamreg/nn/checkpoint.hpp"
#include "hamreg/parallel.hpp"

namespace hamreg::cli {

using models::Family;
using physics::SystemId;
using training::Split;

std::string dataset_file_name(SystemId system, Split split, models::Coords coords) {
    return physics::to_string(system) + "_" + training::to_string(split) + "_" + models::to_string(coords) + ".csv";
}

int cmd_generate(const GenerateOptions& opts, std::ostream& log) {
    const training::Dataset ds = training::generate_dataset(opts.system, opts.split, opts.coords, opts.seed);
    const auto path = opts.out / dataset_file_name(opts.system, opts.split, opts.coords);
    write_dataset(ds, path);
    log << "wrote " << ds.size() << " samples to " << path.string() << "\n";
    return kExitOk;
}

namespace {

nn::Checkpoint checkpoint_for(const training::TrainResult& r, const std::string& scheme,
                              std::optional<double> lambda_h, std::uint64_t seed) {
    nn::Checkpoint ck = r.model.to_checkpoint();
    ck.scheme = scheme;
    ck.lambda_h = lambda_h;
    ck.seed = static_cast<long>(seed);
    return ck;
}

std::string scheme_label(Family family, bool regularized) {
    switch (family) {
        case Family::Baseline: return "Baseline";
        case Family::Hnn: return regularized ? "HNN + H-Reg." : "HNN";
        case Family::Chnn: return regularized ? "CHNN + H-Reg." : "CHNN";
        case Family::Lnn: return "LNN";
    }
    return "?";
}

std::string scheme_slug(Family family, bool regularized) {
    return models::to_string(family) + (regularized ? "_reg" : "");
}

training::Dataset dataset_for(const RunConfig& cfg) {
    if (cfg.dataset) {
        training::Dataset ds = read_dataset(*cfg.dataset);
        if (ds.system != cfg.system) throw ConfigError("dataset system does not match the config");
        if (ds.coords != cfg.resolved_coords()) throw ConfigError("dataset coordinates do not match the model family");
        return ds;
    }
    return training::generate_dataset(cfg.system, cfg.split, cfg.resolved_coords(), cfg.seed);
}

}  // namespace

int cmd_train(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    if (cfg.dataset && !std::filesystem::exists(*cfg.dataset)) {
        throw ConfigError("dataset file " + cfg.dataset->string() + " does not exist");
    }
    const training::Dataset ds = dataset_for(cfg);
    training::TrainConfig tc = cfg.train_config();
    const long report_every = std::max<long>(1, cfg.epochs / 10);
    tc.progress = [&](const training::HistoryEntry& e) {
        if (e.epoch % report_every == 0) log << "epoch " << e.epoch << " loss " << e.loss << " lr " << e.lr << "\n";
    };
    const training::TrainResult r = training::train(tc, ds);

    const bool reg = cfg.lambda_h.has_value() && *cfg.lambda_h > 0.0;
    nn::save_checkpoint(checkpoint_for(r, scheme_label(cfg.family, reg), cfg.lambda_h, cfg.seed),
                        cfg.out_dir / "checkpoint.json");
    write_text(cfg.out_dir / "history.csv", history_to_csv(r.history));
    if (r.diverged) {
        log << "training diverged at epoch " << r.divergence_epoch << ": " << r.message << "\n";
        return kExitDiverged;
    }
    log << "final loss " << r.final_loss << "; wrote " << (cfg.out_dir / "checkpoint.json").string() << "\n";
    return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& opts, std::ostream& log) {
    if (opts.n_ics < 1) throw ConfigError("n-ics must be at least 1");
    evaluation::SchemeMetrics row;
    SystemId system = opts.system;
    if (opts.checkpoint == "truth") {
        row.scheme = "Ground truth";
        const auto ics = evaluation::sample_test_ics(system, opts.n_ics, opts.seed,
                                                     training::training_initial_conditions(system, opts.seed));
        row.metrics = evaluation::evaluate_ground_truth(system, ics, opts.horizon, {}, opts.grid);
    } else {
        if (!std::filesystem::exists(opts.checkpoint)) {
            throw ConfigError("checkpoint " + opts.checkpoint + " does not exist");
        }
        const nn::Checkpoint ck = nn::load_checkpoint(opts.checkpoint);
        const models::ModelSpec spec = models::ModelSpec::from_checkpoint(ck, {});
        system = spec.system;
        row.scheme = ck.scheme.empty() ? models::to_string(spec.family) : ck.scheme;
        const auto ics = evaluation::sample_test_ics(system, opts.n_ics, opts.seed,
                                                     training::training_initial_conditions(system, opts.seed));
        row.metrics = evaluation::evaluate_model(spec, ics, opts.horizon, opts.grid);
    }
    nlohmann::json j = evaluation::metrics_json(row, "-");
    j["system"] = physics::to_string(system);
    write_text(opts.out / "metrics.json", j.dump(2) + "\n");
    write_text(opts.out / "series.csv", evaluation::series_csv(*row.metrics));
    log << row.scheme << ": mean |dE| " << row.metrics->mean_abs_de << "% +/- " << row.metrics->std_abs_de << "%, max "
        << row.metrics->max_de << "%" << (row.metrics->diverged ? " (diverged)" : "") << "\n";
    return row.metrics->diverged ? kExitDiverged : kExitOk;
}

int cmd_crossval(const RunConfig& cfg, int n_ics, double horizon, std::ostream& log) {
    cfg.validate();
    if (n_ics < 1) throw ConfigError("n-ics must be at least 1");
    const training::Dataset ds = dataset_for(cfg);
    // Validation ICs come from a stream separate from the test ICs of evaluate.
    const auto ics = evaluation::sample_test_ics(cfg.system, n_ics, cfg.seed + 0x9e3779b97f4a7c15ULL, ds.training_ics());
    const auto result = training::cross_validate_lambda(cfg.train_config(), ds, cfg.lambda_grid, ics, horizon);
    nlohmann::json j;
    j["best_lambda"] = result.best_lambda;
    j["family"] = models::to_string(cfg.family);
    j["system"] = physics::to_string(cfg.system);
    for (const auto& s : result.scores) {
        nlohmann::json e;
        e["lambda_h"] = s.lambda_h;
        e["diverged"] = s.diverged;
        e["mean"] = s.diverged ? nlohmann::json(nullptr) : nlohmann::json(s.mean_abs_de);
        j["scores"].push_back(e);
        log << "lambda " << s.lambda_h << ": " << (s.diverged ? std::string("diverged") : std::to_string(s.mean_abs_de))
            << "\n";
    }
    write_text(cfg.out_dir / "crossval.json", j.dump(2) + "\n");
    log << "selected lambda_h = " << result.best_lambda << "\n";
    return kExitOk;
}

double reproduce_lambda(SystemId system, Family family) {
    if (family == Family::Hnn) return system == SystemId::Single ? 0.07 : 0.2;
    if (family == Family::Chnn) return system == SystemId::Single ? 0.01 : 0.005;
    throw UnsupportedFamily("only hnn and chnn models are regularized");
}

ReproduceResult reproduce(const ReproduceOptions& opts, std::ostream& log) {
    if (opts.table != 1 && opts.table != 2) throw ConfigError("table must be 1 or 2");
    if (opts.scale != "desk" && opts.scale != "full") throw ConfigError("scale must be desk or full");
    const SystemId system = opts.table == 1 ? SystemId::Single : SystemId::Double;
    const long epochs = opts.epochs.value_or(opts.scale == "desk" ? 30000 : 150000);
    if (epochs < 0) throw ConfigError("epochs must be non-negative");
    const nn::LRSchedule schedule =
        opts.scale == "full" && !opts.epochs ? nn::LRSchedule::standard() : nn::LRSchedule::scaled(std::max(epochs, 3L));

    struct Job {
        Family family;
        bool regularized;
        Split split;
    };
    const std::vector<std::pair<Family, bool>> schemes = {{Family::Baseline, false}, {Family::Hnn, false},
                                                          {Family::Hnn, true},       {Family::Chnn, false},
                                                          {Family::Chnn, true},      {Family::Lnn, false}};
    std::vector<Job> jobs;
    for (Split split : {Split::Full, Split::Small})
        for (const auto& [family, reg] : schemes) jobs.push_back({family, reg, split});

    // One dataset per (split, coordinates), shared read-only by the jobs.
    std::map<std::pair<Split, models::Coords>, training::Dataset> datasets;
    for (Split split : {Split::Full, Split::Small}) {
        for (models::Coords c : {models::Coords::Generalized, models::Coords::Cartesian}) {
            datasets.emplace(std::pair{split, c}, training::generate_dataset(system, split, c, opts.seed));
        }
    }

    std::mutex log_mutex;
    std::vector<std::optional<models::ModelSpec>> trained(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) {
        const Job& job = jobs[i];
        training::TrainConfig tc;
        tc.family = job.family;
        tc.epochs = epochs;
        tc.schedule = schedule;
        tc.seed = opts.seed;
        tc.history_stride = 10;
        if (job.regularized) tc.lambda_h = reproduce_lambda(system, job.family);
        const auto& ds = datasets.at({job.split, models::native_coords(job.family)});
        const training::TrainResult r = training::train(tc, ds);

        const auto dir = opts.out / training::to_string(job.split) / scheme_slug(job.family, job.regularized);
        nn::save_checkpoint(checkpoint_for(r, scheme_label(job.family, job.regularized), tc.lambda_h, opts.seed),
                            dir / "checkpoint.json");
        write_text(dir / "history.csv", history_to_csv(r.history));
        std::lock_guard<std::mutex> lock(log_mutex);
        log << training::to_string(job.split) << " " << scheme_label(job.family, job.regularized) << ": ";
        if (r.diverged) {
            log << "diverged at epoch " << r.divergence_epoch << " (" << r.message << ")\n";
        } else {
            log << "final loss " << r.final_loss << "\n";
            trained[i] = r.model;
        }
    });

    const auto ics = evaluation::sample_test_ics(system, opts.n_ics, opts.seed,
                                                 training::training_initial_conditions(system, opts.seed));
    ReproduceResult out;
    nlohmann::json all = nlohmann::json::array();
    std::map<std::string, evaluation::TableRow> rows;
    for (Split split : {Split::Full, Split::Small}) {
        std::vector<evaluation::SchemeModel> models_for_split;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (jobs[i].split != split) continue;
            models_for_split.push_back({scheme_label(jobs[i].family, jobs[i].regularized), trained[i]});
        }
        for (evaluation::SchemeMetrics& m : evaluation::metrics_table(models_for_split, ics, opts.horizon, opts.grid)) {
            all.push_back(evaluation::metrics_json(m, training::to_string(split)));
            evaluation::TableRow& row = rows[m.scheme];
            row.scheme = m.scheme;
            if (m.metrics) {
                const auto it = std::find_if(jobs.begin(), jobs.end(), [&](const Job& j) {
                    return j.split == split && scheme_label(j.family, j.regularized) == m.scheme;
                });
                write_text(opts.out / training::to_string(split) / scheme_slug(it->family, it->regularized) / "series.csv",
                           evaluation::series_csv(*m.metrics));
            }
            (split == Split::Full ? row.full : row.small) = std::move(m);
        }
    }
    for (const std::string& scheme : evaluation::scheme_order()) out.rows.push_back(rows.at(scheme));

    const std::string title = "Table " + std::to_string(opts.table) + " (" + physics::to_string(system) +
                              " pendulum, " + opts.scale + " scale, " + std::to_string(epochs) + " epochs, seed " +
                              std::to_string(opts.seed) + "); |dE| in % of max potential energy";
    out.table_text = evaluation::render_table(out.rows, title);
    write_text(opts.out / "table.txt", out.table_text);
    write_text(opts.out / "metrics.json", all.dump(2) + "\n");
    return out;
}

int cmd_reproduce(const ReproduceOptions& opts, std::ostream& log) {
    const ReproduceResult r = reproduce(opts, log);
    log << r.table_text;
    return kExitOk;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const UnsupportedFamily& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "unexpected error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace hamreg::cli
