#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "stackrl/errors.hpp"
#include "stackrl/io.hpp"

using namespace stackrl;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "stackrl_io_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(DatasetIo, RecordRoundTrip) {
    TowerGenConfig cfg;
    cfg.seed = 12;
    const Dataset d = generate_dataset({6, SizeMode::NonUni}, 25, cfg);
    std::stringstream ss;
    io::write_dataset(ss, d.records);
    const auto back = io::read_dataset(ss);
    ASSERT_EQ(back.size(), d.records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].id, d.records[i].id);
        EXPECT_EQ(back[i].scene.blocks, d.records[i].scene.blocks);
        EXPECT_EQ(back[i].label, d.records[i].label);
        EXPECT_EQ(back[i].params, d.records[i].params);
        EXPECT_EQ(back[i].seed, d.records[i].seed);
    }

    const auto path = scratch("set.jsonl").string();
    io::save_dataset(path, d.records);
    EXPECT_EQ(io::load_dataset(path).size(), 25u);
}

TEST(DatasetIo, MalformedRecordsFail) {
    EXPECT_THROW(io::record_from_json("{"), ParseError);
    EXPECT_THROW(io::record_from_json(R"({"id":0,"blocks":[],"label":"wobbly","params":{"n":4,"size":"uni"},"seed":1})"),
                 ParseError);
    EXPECT_THROW(io::record_from_json(R"({"id":0,"blocks":[],"label":"stable","params":{"n":4,"size":"uni"}})"),
                 ParseError);
    EXPECT_THROW(io::record_from_json(
                     R"({"id":0,"blocks":[],"label":"stable","params":{"n":4,"size":"uni"},"seed":1,"extra":2})"),
                 ParseError);
    EXPECT_THROW(io::load_dataset(scratch("missing/none.jsonl").string()), IoError);
}

TEST(SceneIo, AcceptsBareBlocksOrRecords) {
    const Scene s = io::scene_from_json(R"({"blocks":[{"x":0,"y":0,"w":3,"h":1},{"x":1,"y":1,"w":3,"h":1}]})");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_DOUBLE_EQ(s.blocks[1].x_center, 1.0);
    EXPECT_EQ(io::scene_from_json(io::scene_to_json(s)).blocks, s.blocks);

    DatasetRecord rec;
    rec.scene = s;
    EXPECT_EQ(io::scene_from_json(io::record_to_json(rec)).blocks, s.blocks);
}

TEST(Pgm, EncodeDecode) {
    GridMap empty(2, 2);
    const std::string bytes = io::encode_pgm(empty);
    EXPECT_EQ(bytes, std::string("P5\n2 2\n255\n") + std::string(4, '\0'));

    GridMap m(3, 2);
    m.set(0, 0);
    m.set(2, 1);
    const std::string enc = io::encode_pgm(m);
    // Top grid row (row 1) comes first in the payload.
    const std::string payload = enc.substr(enc.size() - 6);
    EXPECT_EQ(static_cast<unsigned char>(payload[2]), 255);
    EXPECT_EQ(static_cast<unsigned char>(payload[3]), 255);
    EXPECT_EQ(io::decode_pgm(enc), m);

    const auto path = scratch("m.pgm").string();
    io::export_pgm(m, path);
    EXPECT_EQ(io::import_pgm(path), m);
    EXPECT_THROW(io::decode_pgm("P2\n1 1\n255\n0"), ParseError);
    EXPECT_THROW(io::decode_pgm("P5\n3 3\n255\n\x01"), ParseError);
}

TEST(Ascii, GridAndState) {
    GridMap m(3, 2);
    m.set(0, 0);
    EXPECT_EQ(io::render_ascii(m), "...\n#..\n");

    StackEnvConfig cfg;
    cfg.target_pool = enumerate_target_pool(2, 20, 15);
    std::mt19937_64 rng(1);
    const std::string art = io::render_ascii(stack_reset(cfg, rng));
    EXPECT_EQ(std::count(art.begin(), art.end(), '@'), 5);
    EXPECT_EQ(std::count(art.begin(), art.end(), 'o'), 10);
}

TEST(RunConfig, DefaultsOverridesAndUnknownKeys) {
    const io::RunConfig dflt = io::parse_run_config("{}");
    EXPECT_EQ(dflt.env.width, 20);
    EXPECT_EQ(dflt.classifier.mask_width, 32);

    const io::RunConfig cfg = io::parse_run_config(
        R"({"seed":5,"env":{"kind":"grid","grid_size":7},"agent":{"gamma":0.8,"hidden":[32]},"shaping":"dt"})");
    EXPECT_EQ(cfg.seed, 5u);
    EXPECT_EQ(cfg.agent.seed, 5u);
    EXPECT_EQ(cfg.env.kind, "grid");
    EXPECT_DOUBLE_EQ(cfg.agent.gamma, 0.8);
    EXPECT_EQ(cfg.agent.hidden, std::vector<int>{32});
    EXPECT_EQ(cfg.agent.epoch_steps, 3000);
    EXPECT_EQ(cfg.shaping, ShapingMode::DistanceTransform);

    const io::RunConfig again = io::parse_run_config(io::run_config_to_json(cfg));
    EXPECT_DOUBLE_EQ(again.agent.gamma, 0.8);
    EXPECT_EQ(again.env.grid_size, 7);
    EXPECT_EQ(io::parse_run_config(R"({"agent":{"optimizer":"adam"}})").agent.optimizer, OptimizerKind::Adam);
    EXPECT_EQ(again.agent.optimizer, OptimizerKind::SgdMomentum);
    EXPECT_THROW(io::parse_run_config(R"({"agent":{"optimizer":"rmsprop"}})"), ParseError);

    EXPECT_THROW(io::parse_run_config(R"({"agent":{"gama":0.5}})"), ParseError);
    EXPECT_THROW(io::parse_run_config(R"({"bogus":1})"), ParseError);
    EXPECT_THROW(io::parse_run_config(R"({"agent":{"gamma":"high"}})"), ParseError);
    EXPECT_THROW(io::parse_run_config("not json"), ParseError);
}

TEST(Csv, HeadersAndRows) {
    std::vector<EpochMetrics> epochs(3);
    for (int i = 0; i < 3; ++i) epochs[static_cast<std::size_t>(i)].epoch = i;
    const std::string s = io::stacking_metrics_csv(epochs);
    EXPECT_EQ(s.substr(0, s.find('\n')), "epoch,epsilon,train_return_mean,test_or,test_sr");
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
    const std::string g = io::gridworld_metrics_csv(epochs);
    EXPECT_EQ(g.substr(0, g.find('\n')), "epoch,epsilon,success_ratio");

    ExperimentResult r;
    r.rows.push_back(AccuracyRow{{4, SizeMode::Uni}, 0.9, 500});
    const std::string a = io::accuracy_csv(r);
    EXPECT_EQ(a.substr(0, a.find('\n')), "plan,test_group,accuracy,test_size");
    EXPECT_NE(a.find("4B-2D-Uni"), std::string::npos);
}

TEST(Trace, OneJsonObjectPerStep) {
    const std::vector<io::TraceStep> steps{{1, 0, 0.0, "moved"}, {2, 2, 1.0, "episode_success"}};
    const std::string s = io::trace_to_jsonl(steps);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 2);
    EXPECT_NE(s.find("\"event\":\"episode_success\""), std::string::npos);
}
