#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "json.hpp"

#include "hamreg/cli/commands.hpp"
#include "hamreg/cli/config.hpp"
#include "hamreg/cli/io.hpp"
#include "hamreg/nn/checkpoint.hpp"

using namespace hamreg;
namespace fs = std::filesystem;
using physics::SystemId;
using training::Split;

namespace {

/// Fresh directory under the system temp dir, removed with the fixture.
class TempDir {
public:
    explicit TempDir(const std::string& name)
        : path_(fs::temp_directory_path() / ("hamreg_test_" + name + "_" + std::to_string(::getpid()))) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HAMREG_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Config, ParsesAllKeys) {
    const std::string text = R"(# training run
system = double
split = f
family = chnn
layer_sizes = 8, 16, 16, 1
epochs = 300   # short
lr_schedule = scaled
lambda_h = 0.005
seed = 12
out_dir = runs/a
dataset = data/d.csv
lambda_grid = 0, 0.005, 0.01
history_stride = 10
)";
    const cli::RunConfig cfg = cli::parse_config(text, "/base");
    EXPECT_EQ(cfg.system, SystemId::Double);
    EXPECT_EQ(cfg.split, Split::Full);
    EXPECT_EQ(cfg.family, models::Family::Chnn);
    EXPECT_EQ(cfg.resolved_coords(), models::Coords::Cartesian);
    EXPECT_EQ(cfg.layer_sizes, (std::vector<int>{8, 16, 16, 1}));
    EXPECT_EQ(cfg.epochs, 300);
    EXPECT_EQ(cfg.lambda_h, 0.005);
    EXPECT_EQ(cfg.seed, 12u);
    EXPECT_EQ(cfg.out_dir, fs::path("/base/runs/a"));
    EXPECT_EQ(cfg.dataset, fs::path("/base/data/d.csv"));
    EXPECT_EQ(cfg.lambda_grid, (std::vector<double>{0.0, 0.005, 0.01}));
    EXPECT_EQ(cfg.history_stride, 10);
    EXPECT_EQ(cfg.schedule().boundaries(), (std::vector<long>{0, 100, 200}));
    const training::TrainConfig tc = cfg.train_config();
    EXPECT_EQ(tc.family, models::Family::Chnn);
    EXPECT_EQ(tc.lambda_h, 0.005);
}

TEST(Config, UnknownAndRepeatedKeysNameTheLine) {
    const std::string unknown = message_of([] { cli::parse_config("system = single\n\nlearning_rate = 3\n"); });
    EXPECT_NE(unknown.find("line 3"), std::string::npos) << unknown;
    EXPECT_NE(unknown.find("learning_rate"), std::string::npos) << unknown;
    const std::string repeated = message_of([] { cli::parse_config("seed = 1\nseed = 2\n"); });
    EXPECT_NE(repeated.find("line 2"), std::string::npos) << repeated;
    EXPECT_THROW(cli::parse_config("seed 1\n"), ConfigError);
    EXPECT_THROW(cli::parse_config("epochs = many\n"), ConfigError);
    EXPECT_THROW(cli::parse_config("family = transformer\n"), ConfigError);
}

TEST(Config, LambdaNoneClearsRegularization) {
    const cli::RunConfig cfg = cli::parse_config("lambda_h = none\n");
    EXPECT_FALSE(cfg.lambda_h.has_value());
    EXPECT_THROW(cli::parse_config("lambda_h = -0.1\n"), ConfigError);
}

TEST(Config, InconsistentSettingsRejected) {
    EXPECT_THROW(cli::parse_config("family = lnn\nlambda_h = 0.1\n"), ConfigError);
    EXPECT_THROW(cli::parse_config("family = chnn\ncoords = generalized\n"), ConfigError);
    EXPECT_THROW(cli::parse_config("family = hnn\nlayer_sizes = 3, 8, 1\n"), ConfigError);
    cli::RunConfig cfg;
    cli::apply_setting(cfg, "family", "baseline");
    cli::apply_setting(cfg, "layer_sizes", "2, 8, 1");
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Schedule, Forms) {
    EXPECT_EQ(cli::parse_schedule("standard", 150000).boundaries(), (std::vector<long>{0, 50000, 100000}));
    EXPECT_EQ(cli::parse_schedule("scaled", 30000).boundaries(), (std::vector<long>{0, 10000, 20000}));
    const nn::LRSchedule custom = cli::parse_schedule("0:0.01,500:0.001", 1000);
    EXPECT_EQ(custom.boundaries(), (std::vector<long>{0, 500}));
    EXPECT_EQ(custom.rate(499), 0.01);
    EXPECT_EQ(custom.rate(500), 0.001);
    EXPECT_THROW(cli::parse_schedule("0:0.01,500", 1000), ConfigError);
    EXPECT_THROW(cli::parse_schedule("cosine", 1000), ConfigError);
    EXPECT_THROW(cli::parse_schedule("0:0.01,500:0.1", 1000), ConfigError);
}

TEST(DatasetCsv, RoundTripIsExact) {
    for (SystemId id : {SystemId::Single, SystemId::Double}) {
        for (models::Coords c : {models::Coords::Generalized, models::Coords::Cartesian}) {
            const training::Dataset ds = training::generate_dataset(id, Split::Small, c, 5);
            const training::Dataset back = cli::dataset_from_csv(cli::dataset_to_csv(ds));
            ASSERT_EQ(back.size(), ds.size());
            EXPECT_EQ(back.system, ds.system);
            EXPECT_EQ(back.coords, ds.coords);
            EXPECT_EQ(back.split, ds.split);
            EXPECT_EQ(back.provenance.seed, ds.provenance.seed);
            EXPECT_EQ(back.provenance.substeps, ds.provenance.substeps);
            ASSERT_EQ(back.provenance.initial_conditions.size(), 4u);
            for (std::size_t i = 0; i < 4; ++i) {
                EXPECT_EQ(back.provenance.initial_conditions[i], ds.provenance.initial_conditions[i]);
            }
            for (std::size_t i = 0; i < ds.size(); ++i) {
                EXPECT_EQ(back.samples[i].z, ds.samples[i].z);
                EXPECT_EQ(back.samples[i].zdot, ds.samples[i].zdot);
                EXPECT_EQ(back.samples[i].h_hat, ds.samples[i].h_hat);
                EXPECT_EQ(back.samples[i].traj_id, ds.samples[i].traj_id);
                EXPECT_EQ(back.samples[i].t, ds.samples[i].t);
            }
        }
    }
}

TEST(DatasetCsv, HeaderNamesColumns) {
    const std::string csv =
        cli::dataset_to_csv(training::generate_dataset(SystemId::Double, Split::Small, models::Coords::Generalized, 0));
    EXPECT_NE(csv.find("traj_id,t,q1,q2,p1,p2,qdot1,qdot2,pdot1,pdot2,H_hat\n"), std::string::npos);
}

TEST(DatasetCsv, MalformedInputIsIoError) {
    const std::string good =
        cli::dataset_to_csv(training::generate_dataset(SystemId::Single, Split::Small, models::Coords::Generalized, 0));
    std::string short_row = good;
    short_row.erase(short_row.rfind(','));
    EXPECT_THROW(cli::dataset_from_csv(short_row), IoError);
    std::string bad_number = good;
    bad_number.replace(bad_number.rfind(',') + 1, 3, "abc");
    EXPECT_THROW(cli::dataset_from_csv(bad_number), IoError);
    EXPECT_THROW(cli::dataset_from_csv("traj_id,t,q1,p1,qdot1,pdot1,H_hat\n0,0,1,0,0,0,1\n"), IoError);
    EXPECT_THROW(cli::read_dataset("/nonexistent/data.csv"), IoError);
}

TEST(HistoryCsv, Layout) {
    const std::vector<training::HistoryEntry> h = {{0, 1.5, 0.01}, {10, 0.25, 0.001}};
    EXPECT_EQ(cli::history_to_csv(h), "epoch,loss,lr\n0,1.5,0.01\n10,0.25,0.001\n");
}

TEST(RunGuarded, MapsErrorsToExitCodes) {
    std::ostringstream err;
    EXPECT_EQ(cli::run_guarded([] { return cli::kExitOk; }, err), 0);
    EXPECT_EQ(cli::run_guarded([]() -> int { throw ConfigError("bad"); }, err), 3);
    EXPECT_EQ(cli::run_guarded([]() -> int { throw IoError("gone"); }, err), 1);
    EXPECT_EQ(cli::run_guarded([]() -> int { throw std::runtime_error("?"); }, err), 1);
    EXPECT_NE(err.str().find("bad"), std::string::npos);
}

TEST(Reproduce, LambdaOperatingPoints) {
    EXPECT_EQ(cli::reproduce_lambda(SystemId::Single, models::Family::Hnn), 0.07);
    EXPECT_EQ(cli::reproduce_lambda(SystemId::Single, models::Family::Chnn), 0.01);
    EXPECT_EQ(cli::reproduce_lambda(SystemId::Double, models::Family::Hnn), 0.2);
    EXPECT_EQ(cli::reproduce_lambda(SystemId::Double, models::Family::Chnn), 0.005);
}

TEST(Binary, GenerateSingleSmall) {
    TempDir dir("generate");
    ASSERT_EQ(run_cli("generate --system single --split s --out " + dir.path().string()), 0);
    const training::Dataset ds = cli::read_dataset(dir.path() / "single_s_generalized.csv");
    ASSERT_EQ(ds.size(), 64u);
    std::map<int, int> per_traj;
    for (const auto& s : ds.samples) ++per_traj[s.traj_id];
    ASSERT_EQ(per_traj.size(), 4u);
    for (const auto& [id, n] : per_traj) EXPECT_EQ(n, 16) << id;
}

TEST(Binary, ConfigErrorsExitThree) {
    EXPECT_EQ(run_cli("train --family transformer"), 3);
    EXPECT_EQ(run_cli("train --bogus-flag"), 3);
    EXPECT_EQ(run_cli("train --family lnn --lambda-h 0.1 --epochs 1"), 3);
    TempDir dir("config");
    std::ofstream(dir.path() / "run.cfg") << "epochs = 1\nwarmup = 3\n";
    EXPECT_EQ(run_cli("train --config " + (dir.path() / "run.cfg").string()), 3);
}

// Input paths are checked before any work starts, so a missing file is a configuration error.
TEST(Binary, MissingDatasetIsCleanFailure) {
    TempDir dir("missing");
    EXPECT_EQ(run_cli("train --epochs 1 --dataset " + (dir.path() / "absent.csv").string() + " --out " +
                      dir.path().string()),
              cli::kExitConfig);
    EXPECT_FALSE(fs::exists(dir.path() / "checkpoint.json"));
}

TEST(Binary, SmokeTrainWritesArtifacts) {
    TempDir dir("smoke");
    const auto start = std::chrono::steady_clock::now();
    ASSERT_EQ(run_cli("train --system single --split s --family hnn --epochs 100 --lr-schedule scaled --out " +
                      dir.path().string()),
              0);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LT(seconds, 60.0);
    const nn::Checkpoint ck = nn::load_checkpoint(dir.path() / "checkpoint.json");
    EXPECT_EQ(ck.model, "hnn");
    EXPECT_EQ(ck.system, "single");
    std::ifstream hist(dir.path() / "history.csv");
    std::string header;
    std::getline(hist, header);
    EXPECT_EQ(header, "epoch,loss,lr");
}

TEST(Binary, ZeroLambdaMatchesPlainRun) {
    TempDir a("plain"), b("lambda0");
    const std::string common = "train --system single --split s --family hnn --epochs 50 --lr-schedule scaled --seed 4";
    ASSERT_EQ(run_cli(common + " --out " + a.path().string()), 0);
    ASSERT_EQ(run_cli(common + " --lambda-h 0 --out " + b.path().string()), 0);
    EXPECT_TRUE(nn::load_checkpoint(a.path() / "checkpoint.json").params ==
                nn::load_checkpoint(b.path() / "checkpoint.json").params);
    EXPECT_EQ(cli::read_text(a.path() / "history.csv"), cli::read_text(b.path() / "history.csv"));
}

TEST(Binary, DivergenceExitsTwo) {
    TempDir dir("diverge");
    training::Dataset ds = training::generate_dataset(SystemId::Single, Split::Small, models::Coords::Generalized, 0);
    for (auto& s : ds.samples) s.zdot *= 1e6;
    cli::write_dataset(ds, dir.path() / "scaled.csv");
    EXPECT_EQ(run_cli("train --family baseline --epochs 400 --lr-schedule 0:1000000 --dataset " +
                      (dir.path() / "scaled.csv").string() + " --out " + dir.path().string()),
              2);
}

TEST(Binary, EvaluateTruthIsBelowFloorAndDeterministic) {
    TempDir a("truth_a"), b("truth_b");
    const std::string common = "evaluate --checkpoint truth --system double --n-ics 3 --horizon 20 --seed 9";
    ASSERT_EQ(run_cli(common + " --out " + a.path().string()), 0);
    ASSERT_EQ(run_cli(common + " --out " + b.path().string()), 0);
    const auto j = nlohmann::json::parse(cli::read_text(a.path() / "metrics.json"));
    EXPECT_LT(j["max"].get<double>(), 0.1);
    EXPECT_EQ(j["n_ics"].get<int>(), 3);
    EXPECT_EQ(cli::read_text(a.path() / "series.csv"), cli::read_text(b.path() / "series.csv"));
}

TEST(Binary, EvaluateFlagsDivergence) {
    TempDir dir("eval_div");
    nn::Checkpoint ck;
    ck.model = "baseline";
    ck.system = "single";
    ck.coords = "generalized";
    ck.params = nn::init_params(std::vector<int>{2, 4, 2}, 0).zeros_like();
    ck.params.biases.back() = Eigen::VectorXd{{0.0, 1e6}};
    nn::save_checkpoint(ck, dir.path() / "ck.json");
    EXPECT_EQ(run_cli("evaluate --checkpoint " + (dir.path() / "ck.json").string() + " --n-ics 2 --horizon 100 --out " +
                      dir.path().string()),
              2);
    const auto j = nlohmann::json::parse(cli::read_text(dir.path() / "metrics.json"));
    EXPECT_TRUE(j["diverged"].get<bool>());
}
