#include <gtest/gtest.h>

#include <set>

#include "stackrl/errors.hpp"
#include "stackrl/towergen.hpp"

using namespace stackrl;

TEST(GenerateTower, UniBlocksHaveBaseSizeAndRestOnSupports) {
    TowerGenConfig cfg;
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
        const Scene s = generate_tower({10, SizeMode::Uni}, cfg, rng);
        ASSERT_EQ(s.size(), 10u);
        EXPECT_EQ(s.params, (SceneParams{10, SizeMode::Uni}));
        EXPECT_DOUBLE_EQ(s.blocks[0].x_center, 0.0);
        EXPECT_DOUBLE_EQ(s.blocks[0].y_bottom, 0.0);
        for (const auto& b : s.blocks) {
            EXPECT_DOUBLE_EQ(b.width, 3.0);
            EXPECT_DOUBLE_EQ(b.height, 1.0);
        }
        EXPECT_NO_THROW(validate_scene(s));
        EXPECT_NO_THROW(build_contact_graph(s));
    }
}

TEST(GenerateTower, NonUniSizesStayInTruncationBand) {
    TowerGenConfig cfg;
    std::mt19937_64 rng(8);
    bool varied = false;
    for (int t = 0; t < 100; ++t) {
        const Scene s = generate_tower({6, SizeMode::NonUni}, cfg, rng);
        for (const auto& b : s.blocks) {
            EXPECT_GE(b.width, 3.0 * 0.8 - 1e-12);
            EXPECT_LE(b.width, 3.0 * 1.2 + 1e-12);
            EXPECT_GE(b.height, 0.8 - 1e-12);
            EXPECT_LE(b.height, 1.2 + 1e-12);
            if (b.width != 3.0) varied = true;
        }
        EXPECT_NO_THROW(build_contact_graph(s));
    }
    EXPECT_TRUE(varied);
}

TEST(GenerateTower, RejectsBadParamsAndConfig) {
    std::mt19937_64 rng(0);
    EXPECT_THROW(generate_tower({5, SizeMode::Uni}, TowerGenConfig{}, rng), InvalidArgument);
    TowerGenConfig bad;
    bad.delta = 1.5;
    EXPECT_THROW(generate_tower({4, SizeMode::Uni}, bad, rng), InvalidArgument);
    bad = TowerGenConfig{};
    bad.target_stable_fraction = 1.5;
    EXPECT_THROW(validate(bad), InvalidArgument);
}

TEST(GenerateDataset, CountsIdsAndDeterminism) {
    TowerGenConfig cfg;
    cfg.seed = 7;
    const Dataset a = generate_dataset({4, SizeMode::Uni}, 200, cfg);
    const Dataset b = generate_dataset({4, SizeMode::Uni}, 200, cfg);
    ASSERT_EQ(a.records.size(), 200u);
    EXPECT_EQ(a.attempts, 200);
    EXPECT_EQ(a.counts.stable + a.counts.unstable, 200);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].id, static_cast<std::int64_t>(i));
        EXPECT_EQ(a.records[i].scene.blocks, b.records[i].scene.blocks);
        EXPECT_EQ(a.records[i].label, stability_label(a.records[i].scene));
    }
    cfg.seed = 8;
    const Dataset c = generate_dataset({4, SizeMode::Uni}, 200, cfg);
    EXPECT_NE(a.records[0].scene.blocks, c.records[0].scene.blocks);
}

TEST(GenerateDataset, RecordSeedRegeneratesScene) {
    TowerGenConfig cfg;
    cfg.seed = 3;
    const Dataset d = generate_dataset({6, SizeMode::NonUni}, 20, cfg);
    for (const auto& r : d.records) {
        std::mt19937_64 rng(r.seed);
        EXPECT_EQ(generate_tower(r.params, cfg, rng).blocks, r.scene.blocks);
    }
}

TEST(GenerateDataset, UnbalancedStableFractionIsAMinority) {
    TowerGenConfig cfg;
    cfg.seed = 1;
    const Dataset d = generate_dataset({4, SizeMode::Uni}, 2000, cfg);
    EXPECT_GT(d.counts.stable_fraction(), 0.05);
    EXPECT_LT(d.counts.stable_fraction(), 0.2);
}

TEST(GenerateDataset, BalancedHitsTargetFraction) {
    TowerGenConfig cfg;
    cfg.seed = 5;
    cfg.target_stable_fraction = 0.5;
    const Dataset d = generate_dataset({4, SizeMode::Uni}, 300, cfg);
    EXPECT_EQ(d.counts.stable, 150);
    EXPECT_EQ(d.counts.unstable, 150);
    EXPECT_GT(d.attempts, 300);
    for (std::size_t i = 0; i < d.records.size(); ++i) {
        EXPECT_EQ(d.records[i].id, static_cast<std::int64_t>(i));
    }
}

TEST(GenerateDataset, RejectsBadCount) {
    EXPECT_THROW(generate_dataset({4, SizeMode::Uni}, 0, TowerGenConfig{}), InvalidArgument);
}

TEST(SplitDataset, PartitionsRecords) {
    TowerGenConfig cfg;
    const Dataset d = generate_dataset({4, SizeMode::Uni}, 101, cfg);
    std::mt19937_64 rng(9);
    const auto [train, test] = split_dataset(d.records, 0.5, rng);
    EXPECT_EQ(train.size(), 50u);
    EXPECT_EQ(test.size(), 51u);
    std::set<std::int64_t> ids;
    for (const auto& r : train) ids.insert(r.id);
    for (const auto& r : test) ids.insert(r.id);
    EXPECT_EQ(ids.size(), 101u);

    std::mt19937_64 again(9);
    const auto repeat = split_dataset(d.records, 0.5, again);
    ASSERT_EQ(repeat.first.size(), train.size());
    for (std::size_t i = 0; i < train.size(); ++i) EXPECT_EQ(repeat.first[i].id, train[i].id);

    EXPECT_THROW(split_dataset({}, 0.5, rng), EmptyDataset);
    EXPECT_THROW(split_dataset(d.records, 1.0, rng), InvalidArgument);
}
