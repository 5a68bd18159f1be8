#include "stackrl/towergen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stackrl/errors.hpp"

namespace stackrl {

namespace {

constexpr double kMinOverlap = 1e-6;

double size_factor(const TowerGenConfig& cfg, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(1.0, cfg.sigma);
    for (;;) {
        const double f = normal(rng);
        if (f >= 1.0 - cfg.delta && f <= 1.0 + cfg.delta) return f;
    }
}

bool intersects_any(const std::vector<Block2D>& blocks, const Block2D& b) {
    for (const auto& o : blocks) {
        const double dx = std::min(o.right(), b.right()) - std::max(o.left(), b.left());
        const double dy = std::min(o.top(), b.top()) - std::max(o.y_bottom, b.y_bottom);
        if (dx > kDefaultTouchEps && dy > kDefaultTouchEps) return true;
    }
    return false;
}

}  // namespace

void validate(const TowerGenConfig& cfg) {
    if (!(cfg.sigma > 0.0)) throw InvalidArgument("towergen sigma must be positive");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw InvalidArgument("towergen delta must be in (0,1)");
    if (!(cfg.base_width > 0.0 && cfg.base_height > 0.0)) {
        throw InvalidArgument("towergen base block size must be positive");
    }
    if (cfg.max_retries < 1) throw InvalidArgument("towergen max_retries must be >= 1");
    if (cfg.target_stable_fraction &&
        !(*cfg.target_stable_fraction >= 0.0 && *cfg.target_stable_fraction <= 1.0)) {
        throw InvalidArgument("target_stable_fraction must be in [0,1]");
    }
}

Scene generate_tower(const SceneParams& params, const TowerGenConfig& cfg, std::mt19937_64& rng) {
    if (!is_valid_scene_params(params)) {
        throw InvalidArgument("unsupported scene params " + std::to_string(params.n_blocks) + "B");
    }
    validate(cfg);

    auto draw_size = [&]() {
        if (params.size_mode == SizeMode::Uni) return std::pair{cfg.base_width, cfg.base_height};
        const double fw = size_factor(cfg, rng);
        const double fh = size_factor(cfg, rng);
        return std::pair{cfg.base_width * fw, cfg.base_height * fh};
    };

    Scene scene;
    scene.params = params;
    const auto [w0, h0] = draw_size();
    scene.blocks.push_back(Block2D{0.0, 0.0, w0, h0});

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 1; i < params.n_blocks; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < cfg.max_retries && !placed; ++attempt) {
            const auto [w, h] = draw_size();
            std::uniform_int_distribution<std::size_t> pick(0, scene.blocks.size() - 1);
            const Block2D support = scene.blocks[pick(rng)];
            const double half = 0.5 * (support.width + w);
            const double x = support.x_center + (2.0 * unit(rng) - 1.0) * half;
            const Block2D candidate{x, support.top(), w, h};
            const double overlap = std::min(candidate.right(), support.right()) -
                                   std::max(candidate.left(), support.left());
            if (overlap <= kMinOverlap) continue;
            if (intersects_any(scene.blocks, candidate)) continue;
            scene.blocks.push_back(candidate);
            placed = true;
        }
        if (!placed) {
            throw GenerationFailed("could not place block " + std::to_string(i) + " after " +
                                   std::to_string(cfg.max_retries) + " attempts");
        }
    }
    return scene;
}

Dataset generate_dataset(const SceneParams& params, int count, const TowerGenConfig& cfg) {
    if (count < 1) throw InvalidArgument("dataset count must be >= 1");
    validate(cfg);

    Dataset out;
    out.records.reserve(static_cast<std::size_t>(count));
    int want_stable = count;
    int want_unstable = count;
    if (cfg.target_stable_fraction) {
        want_stable = static_cast<int>(std::lround(count * *cfg.target_stable_fraction));
        want_unstable = count - want_stable;
    }

    // Balanced mode gives up when one class practically never occurs.
    const long max_attempts = cfg.target_stable_fraction ? 20000L * count : count;
    for (long attempt = 0; static_cast<int>(out.records.size()) < count; ++attempt) {
        if (attempt >= max_attempts) {
            throw GenerationFailed("balanced generation of " + to_string(params) +
                                   " exhausted its attempt budget");
        }
        const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(attempt));
        std::mt19937_64 rng(seed);
        Scene scene = generate_tower(params, cfg, rng);
        const StabilityLabel label = stability_label(scene);
        ++out.attempts;
        if (label == StabilityLabel::Stable) {
            if (out.counts.stable >= want_stable) continue;
            ++out.counts.stable;
        } else {
            if (out.counts.unstable >= want_unstable) continue;
            ++out.counts.unstable;
        }
        DatasetRecord rec;
        rec.id = static_cast<std::int64_t>(out.records.size());
        rec.scene = std::move(scene);
        rec.label = label;
        rec.params = params;
        rec.seed = seed;
        out.records.push_back(std::move(rec));
    }
    return out;
}

std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> split_dataset(
    std::vector<DatasetRecord> records, double fraction, std::mt19937_64& rng) {
    if (records.empty()) throw EmptyDataset("cannot split an empty dataset");
    if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("split fraction must be in (0,1)");

    const std::size_t n = records.size();
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> in_train(n, false);
    for (std::size_t k = 0; k < n_train; ++k) in_train[order[k]] = true;

    std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> out;
    out.first.reserve(n_train);
    out.second.reserve(n - n_train);
    for (std::size_t i = 0; i < n; ++i) {
        (in_train[i] ? out.first : out.second).push_back(std::move(records[i]));
    }
    return out;
}

}  // namespace stackrl
