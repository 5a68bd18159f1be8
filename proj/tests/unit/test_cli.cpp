#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "stackrl/io.hpp"

using namespace stackrl;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    CliResult r;
    r.code = cli::cli_dispatch(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "stackrl_cli_test";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

}  // namespace

TEST(Cli, UnknownSubcommandIsUsageError) {
    EXPECT_EQ(run({"stack-all-the-things"}).code, cli::kExitUsage);
    EXPECT_EQ(run({}).code, cli::kExitUsage);
    EXPECT_EQ(run({"gen-towers", "--params", "5B-2D-Uni", "--count", "3", "--out", "-"}).code, cli::kExitUsage);
}

TEST(Cli, HelpExitsCleanly) {
    const CliResult r = run({"--help"});
    EXPECT_EQ(r.code, cli::kExitOk);
    EXPECT_NE(r.out.find("gen-towers"), std::string::npos);
}

TEST(Cli, GenTowersWritesOneLinePerScene) {
    const std::string path = scratch("towers.jsonl");
    const CliResult r = run({"gen-towers", "--params", "4B-2D-Uni", "--count", "1000", "--out", path, "--seed", "7"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const std::string text = io::read_text(path);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1000);
    EXPECT_NE(r.out.find("stable fraction"), std::string::npos);

    const CliResult again = run({"gen-towers", "--params", "4B-2D-Uni", "--count", "1000", "--out", "-", "--seed", "7"});
    EXPECT_EQ(again.out, text);
}

TEST(Cli, RenderEmptySceneAsPgm) {
    const std::string scene = scratch("empty.json");
    io::write_text(scene, R"({"blocks":[]})");
    const CliResult r = run({"render", "--input", scene, "--format", "pgm", "--width", "2", "--height", "2"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_EQ(r.out, std::string("P5\n2 2\n255\n") + std::string(4, '\0'));
}

TEST(Cli, RenderAsciiAndMissingFile) {
    const std::string scene = scratch("pair.json");
    io::write_text(scene, R"({"blocks":[{"x":0,"y":0,"w":3,"h":1}]})");
    const CliResult r = run({"render", "--input", scene, "--width", "8", "--height", "2", "--cell", "1"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_EQ(r.out, "........\n..###...\n");
    EXPECT_EQ(run({"render", "--input", scratch("nope.json")}).code, cli::kExitRuntime);
    EXPECT_EQ(run({"render", "--input", scene, "--format", "svg"}).code, cli::kExitUsage);
}

TEST(Cli, EnumerateTargetsListsPool) {
    const CliResult r = run({"enumerate-targets", "--blocks", "2"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_NE(r.out.find("target 0:"), std::string::npos);
    EXPECT_EQ(run({"enumerate-targets", "--blocks", "9"}).code, cli::kExitUsage);
}

TEST(Cli, ClassifierTrainAndEvalRoundTrip) {
    const std::string data = scratch("clf.jsonl");
    const std::string model = scratch("clf_model.json");
    const std::string cfg = scratch("clf_cfg.json");
    io::write_text(cfg, R"({"classifier":{"mask_w":8,"mask_h":8,"raster_w":16,"raster_h":16,"hidden":[16],"epochs":2}})");
    ASSERT_EQ(run({"gen-towers", "--params", "4B-2D-Uni", "--count", "60", "--out", data}).code, cli::kExitOk);
    const CliResult train = run({"train-stab", "--data", data, "--config", cfg, "--model-out", model});
    ASSERT_EQ(train.code, cli::kExitOk) << train.err;
    EXPECT_NE(train.out.find("test_accuracy"), std::string::npos);
    const CliResult eval = run({"eval-stab", "--data", data, "--model", model, "--config", cfg});
    ASSERT_EQ(eval.code, cli::kExitOk) << eval.err;
    EXPECT_EQ(eval.out.rfind("accuracy ", 0), 0u);

    const std::string scene = scratch("base.json");
    io::write_text(scene, R"({"blocks":[{"x":0,"y":0,"w":3,"h":1}]})");
    const CliResult score = run({"score-placements", "--scene", scene, "--model", model, "--config", cfg,
                           "--nh", "3", "--nv", "2"});
    ASSERT_EQ(score.code, cli::kExitOk) << score.err;
    EXPECT_EQ(std::count(score.out.begin(), score.out.end(), '\n'), 6);
}

TEST(Cli, TrainAgentGridSmoke) {
    const std::string cfg = scratch("grid_cfg.json");
    const std::string metrics = scratch("grid_metrics.csv");
    const std::string model = scratch("grid_model.json");
    io::write_text(cfg, R"({"env":{"kind":"grid"},"agent":{"epochs":2,"epoch_steps":200,"test_steps":50}})");
    const CliResult r = run({"train-agent", "--env", "grid", "--config", cfg, "--metrics-out", metrics,
                       "--model-out", model, "--seed", "3"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const std::string csv = io::read_text(metrics);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    const CliResult e = run({"eval-agent", "--env", "grid", "--model", model, "--config", cfg, "--steps", "50"});
    ASSERT_EQ(e.code, cli::kExitOk) << e.err;
    EXPECT_NE(e.out.find("success_ratio"), std::string::npos);
    EXPECT_EQ(run({"train-agent", "--env", "grid", "--mode", "ddqn"}).code, cli::kExitUsage);
}

TEST(Cli, BadConfigIsRuntimeError) {
    const std::string cfg = scratch("bad_cfg.json");
    io::write_text(cfg, R"({"agent":{"nonsense":1}})");
    const CliResult r = run({"enumerate-targets", "--blocks", "2", "--config", cfg});
    EXPECT_EQ(r.code, cli::kExitRuntime);
    EXPECT_NE(r.err.find("nonsense"), std::string::npos);
}
