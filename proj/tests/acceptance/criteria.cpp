#include "criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "stackrl/agent.hpp"
#include "stackrl/errors.hpp"
#include "stackrl/nn.hpp"
#include "stackrl/shaping.hpp"
#include "stackrl/stabnet.hpp"
#include "stackrl/stability.hpp"
#include "stackrl/stack_env.hpp"
#include "stackrl/towergen.hpp"

namespace stackrl::acceptance {
namespace {

template <typename... Args>
std::string format(const char* fmt, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), fmt, args...);
    return buf;
}

double median3(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3};

// ---------------------------------------------------------------- criterion 1

struct OracleTally {
    long compared = 0;
    long multi_support = 0;
    long unstable = 0;
    long disagreements = 0;
};

void compare_oracles(const Scene& scene, OracleTally& tally) {
    const bool lp = check_stability_lp(scene).stable;
    tally.unstable += lp ? 0 : 1;
    if (!has_tree_support(build_contact_graph(scene))) {
        ++tally.multi_support;
        return;
    }
    ++tally.compared;
    if (check_stability_recursive(scene).stable != lp) ++tally.disagreements;
}

bool free_cells(const GridMap& map, const GridBlock& b) {
    for (int r = b.row; r <= b.top_row(); ++r) {
        for (int c = b.col; c <= b.right_col(); ++c) {
            if (map.at(c, r)) return false;
        }
    }
    return true;
}

bool supported(const GridMap& map, const GridBlock& b) {
    if (b.row == 0) return true;
    for (int c = b.col; c <= b.right_col(); ++c) {
        if (map.at(c, b.row - 1)) return true;
    }
    return false;
}

// Every set of up to three non-overlapping, supported blocks, each listed once
// in increasing (row, col, orientation) order.
void enumerate_stacks(const GridMap& map, std::vector<GridBlock>& stack, const std::vector<GridBlock>& slots,
                      std::size_t first, OracleTally& tally) {
    if (!stack.empty()) compare_oracles(to_scene(stack), tally);
    if (stack.size() == 3) return;
    for (std::size_t i = first; i < slots.size(); ++i) {
        const GridBlock& b = slots[i];
        if (!fits(map, b) || !free_cells(map, b) || !supported(map, b)) continue;
        stack.push_back(b);
        enumerate_stacks(grid_place(map, b), stack, slots, i + 1, tally);
        stack.pop_back();
    }
}

Scene random_chain(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> w(0.5, 4.0);
    std::uniform_real_distribution<double> h(0.3, 2.0);
    // A per-tower spread keeps both labels well represented.
    const double spread = std::uniform_real_distribution<double>(0.02, 0.6)(rng);
    std::uniform_real_distribution<double> frac(-spread, spread);
    Scene s;
    double x = 0.0;
    double y = 0.0;
    double prev_w = 0.0;
    for (int i = 0; i < n; ++i) {
        const double bw = w(rng);
        const double bh = h(rng);
        if (i > 0) x += frac(rng) * 0.5 * (prev_w + bw);
        s.blocks.push_back(Block2D{x, y, bw, bh});
        y += bh;
        prev_w = bw;
    }
    return s;
}

Outcome oracle_equivalence() {
    constexpr int kSide = 12;
    std::vector<GridBlock> slots;
    for (int row = 0; row < kSide; ++row) {
        for (int col = 0; col < kSide; ++col) {
            for (Orientation o : {Orientation::Horizontal, Orientation::Vertical}) {
                const GridBlock b{col, row, o};
                if (b.right_col() < kSide && b.top_row() < kSide) slots.push_back(b);
            }
        }
    }
    OracleTally grid;
    std::vector<GridBlock> stack;
    enumerate_stacks(GridMap(kSide, kSide), stack, slots, 0, grid);

    OracleTally chains;
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(4, 10);
    for (int t = 0; t < 1000; ++t) compare_oracles(random_chain(rng, size(rng)), chains);

    const bool pass = grid.disagreements == 0 && chains.disagreements == 0 && chains.compared >= 500;
    return {pass, format("grid stacks %ld compared (%ld unstable, %ld multi-support LP only), "
                         "chains %ld compared (%ld unstable), disagreements %ld",
                         grid.compared, grid.unstable, grid.multi_support, chains.compared, chains.unstable,
                         grid.disagreements + chains.disagreements)};
}

// ---------------------------------------------------------------- criterion 2

Outcome gradient_correctness() {
    const nn::Activation acts[] = {nn::Activation::ReLU, nn::Activation::Sigmoid, nn::Activation::Identity};
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> width(2, 6);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const nn::Loss loss = i % 2 == 0 ? nn::Loss::MSE : nn::Loss::BinaryCrossEntropy;
        const int depth = 1 + i % 3;
        std::vector<nn::LayerSpec> specs;
        int in = width(rng);
        const int inputs = in;
        for (int l = 0; l < depth; ++l) {
            const bool last = l + 1 == depth;
            const int out = last ? width(rng) : width(rng) + 1;
            nn::Activation act = acts[(i + l) % 3];
            // BCE needs outputs in (0, 1).
            if (last && loss == nn::Loss::BinaryCrossEntropy) act = nn::Activation::Sigmoid;
            specs.push_back({in, out, act});
            in = out;
        }
        nn::Network net = nn::net_init(specs, 1000 + static_cast<std::uint64_t>(i));
        for (auto& layer : net.layers) {
            for (Eigen::Index k = 0; k < layer.bias.size(); ++k) layer.bias(k) = 0.1 * normal(rng);
        }
        Eigen::MatrixXd x(inputs, 4);
        Eigen::MatrixXd y(in, 4);
        for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = normal(rng);
        for (Eigen::Index k = 0; k < y.size(); ++k) y(k) = unit(rng);
        worst = std::max(worst, nn::grad_check(net, loss, x, y));
    }
    return {worst < 1e-4, format("20 networks, worst relative error %.3g", worst)};
}

// ------------------------------------------------------------ criteria 3 to 5

ClassifierConfig classifier_config() {
    ClassifierConfig cfg;
    cfg.seed = 11;
    return cfg;
}

const GroupDatasets& classifier_groups() {
    static GroupDatasets groups;
    if (!groups.empty()) return groups;
    std::uint64_t stream = 0;
    for (int n : {4, 6, 10, 14}) {
        TowerGenConfig tg;
        tg.seed = derive_seed(500, stream++);
        tg.target_stable_fraction = 0.5;
        const SceneParams params{n, SizeMode::Uni};
        Dataset data = generate_dataset(params, 1000, tg);
        std::mt19937_64 rng(derive_seed(tg.seed, 1));
        auto [train, test] = split_dataset(std::move(data.records), 0.5, rng);
        groups[params] = GroupData{std::move(train), std::move(test)};
    }
    return groups;
}

double intra_accuracy(int n_blocks) {
    static std::map<int, double> cache;
    if (auto it = cache.find(n_blocks); it != cache.end()) return it->second;
    const SceneParams p{n_blocks, SizeMode::Uni};
    const ExperimentPlan plan{{p}, {p}, ExperimentMode::IntraGroup};
    const double acc = run_experiment(plan, classifier_groups(), classifier_config()).rows.at(0).accuracy;
    cache[n_blocks] = acc;
    return acc;
}

Outcome classifier_intra() {
    const auto& g = classifier_groups().at({4, SizeMode::Uni});
    const double acc = intra_accuracy(4);
    return {acc >= 0.75 && g.train.size() == 500 && g.test.size() == 500,
            format("4B-2D-Uni test accuracy %.3f on %zu/%zu split (need >= 0.75)", acc, g.train.size(),
                   g.test.size())};
}

Outcome difficulty_trend() {
    const double a4 = intra_accuracy(4);
    const double a14 = intra_accuracy(14);
    return {a4 - a14 >= 0.05, format("4B %.3f, 14B %.3f, drop %.3f (need >= 0.05)", a4, a14, a4 - a14)};
}

Outcome cross_group() {
    const ExperimentPlan plan{{{4, SizeMode::Uni}, {6, SizeMode::Uni}},
                              {{10, SizeMode::Uni}, {14, SizeMode::Uni}},
                              ExperimentMode::CrossGroup};
    const ExperimentResult r = run_experiment(plan, classifier_groups(), classifier_config());
    double correct = 0.0;
    int total = 0;
    for (const auto& row : r.rows) {
        correct += row.accuracy * row.test_size;
        total += row.test_size;
    }
    const double acc = correct / total;
    return {acc >= 0.55, format("{4B,6B} -> {10B,14B}: 10B %.3f, 14B %.3f, pooled %.3f (need >= 0.55)",
                                r.rows.at(0).accuracy, r.rows.at(1).accuracy, acc)};
}

// ---------------------------------------------------------------- criterion 6

double gridworld_best(bool goal_conditioned, std::uint64_t seed) {
    AgentConfig cfg = AgentConfig::gridworld(5);
    cfg.goal_conditioned = goal_conditioned;
    cfg.seed = seed;
    GridworldConfig env;
    env.size = 5;
    env.seed = seed;
    return train_gridworld_agent(env, cfg).best.success_ratio;
}

Outcome gridworld() {
    std::vector<double> gdqn;
    std::vector<double> dqn;
    for (std::uint64_t s : kSeeds) {
        gdqn.push_back(gridworld_best(true, s));
        dqn.push_back(gridworld_best(false, s));
    }
    const double g = median3(gdqn);
    const double d = median3(dqn);
    return {g >= 0.90 && d <= g - 0.15,
            format("median best success ratio GDQN %.3f (%.2f %.2f %.2f), DQN %.3f (%.2f %.2f %.2f)", g, gdqn[0],
                   gdqn[1], gdqn[2], d, dqn[0], dqn[1], dqn[2])};
}

// ------------------------------------------------------------- criteria 7 and 8

AgentConfig stacking_agent(bool goal_conditioned, std::uint64_t seed) {
    AgentConfig cfg = AgentConfig::stacking();
    cfg.goal_conditioned = goal_conditioned;
    cfg.seed = seed;
    return cfg;
}

EvalReport stacking_best(int n_blocks, bool goal_conditioned, ShapingMode shaping, std::uint64_t seed) {
    StackEnvConfig env;
    env.target_pool = enumerate_target_pool(n_blocks, env.width, env.height);
    env.seed = seed;
    return train_stacking_agent(env, stacking_agent(goal_conditioned, seed), shaping).best;
}

struct StackingMedians {
    double sr = 0.0;
    double overlap = 0.0;
    std::string runs;
};

StackingMedians stacking_medians(int n_blocks, bool goal_conditioned, ShapingMode shaping) {
    std::vector<double> sr;
    std::vector<double> overlap;
    StackingMedians m;
    for (std::uint64_t s : kSeeds) {
        const EvalReport r = stacking_best(n_blocks, goal_conditioned, shaping, s);
        sr.push_back(r.success_rate);
        overlap.push_back(r.overlap);
        m.runs += format(" %.2f/%.2f", r.success_rate, r.overlap);
    }
    m.sr = median3(sr);
    m.overlap = median3(overlap);
    return m;
}

Outcome target_stacking() {
    const StackingMedians two = stacking_medians(2, true, ShapingMode::None);
    const StackingMedians three_g = stacking_medians(3, true, ShapingMode::None);
    const StackingMedians three_d = stacking_medians(3, false, ShapingMode::None);
    const bool pass = two.sr >= 0.55 && three_g.sr - three_d.sr >= 0.15;
    return {pass, format("2-block GDQN SR %.3f (need >= 0.55); 3-block GDQN SR %.3f, DQN SR %.3f, gap %.3f "
                         "(need >= 0.15); runs SR/OR 2G[%s ] 3G[%s ] 3D[%s ]",
                         two.sr, three_g.sr, three_d.sr, three_g.sr - three_d.sr, two.runs.c_str(),
                         three_g.runs.c_str(), three_d.runs.c_str())};
}

struct HeldOutOverlap {
    double overlap = 0.0;
    std::string runs;
};

// Best-epoch model per seed, re-tested on 20 fresh test epochs so that
// short, lucky test epochs do not decide the comparison.
HeldOutOverlap held_out_overlap(bool goal_conditioned, ShapingMode shaping) {
    std::vector<double> overlap;
    HeldOutOverlap h;
    for (std::uint64_t s : kSeeds) {
        StackEnvConfig env;
        env.target_pool = enumerate_target_pool(4, env.width, env.height);
        env.seed = s;
        const AgentConfig cfg = stacking_agent(goal_conditioned, s);
        const TrainResult r = train_stacking_agent(env, cfg, shaping);
        const EvalReport e = evaluate_stacking_agent(env, r.best_model, cfg, 20 * cfg.test_steps,
                                                     derive_seed(s, 9000));
        overlap.push_back(e.overlap);
        h.runs += format(" %.2f->%.2f(n=%d)", r.best.overlap, e.overlap, e.episodes);
    }
    h.overlap = median3(overlap);
    return h;
}

Outcome shaping_effect() {
    const HeldOutOverlap plain = held_out_overlap(true, ShapingMode::None);
    const HeldOutOverlap dt = held_out_overlap(true, ShapingMode::DistanceTransform);
    return {dt.overlap - plain.overlap >= 0.10,
            format("4-block held-out OR GDQN+DT %.3f, GDQN %.3f, gain %.3f (need >= 0.10); "
                   "runs best-epoch->held-out DT[%s ] plain[%s ]",
                   dt.overlap, plain.overlap, dt.overlap - plain.overlap, dt.runs.c_str(), plain.runs.c_str())};
}

// ---------------------------------------------------------------- criterion 9

Outcome environment_invariants() {
    long sequences = 0;
    long steps = 0;
    long violations = 0;
    std::string first_violation;
    auto check = [&](bool ok, const char* what) {
        if (ok) return;
        if (violations++ == 0) first_violation = what;
    };

    for (int n : {2, 3, 4}) {
        StackEnvConfig cfg;
        cfg.target_pool = enumerate_target_pool(n, cfg.width, cfg.height);
        cfg.seed = static_cast<std::uint64_t>(n);
        std::mt19937_64 actions(derive_seed(900, static_cast<std::uint64_t>(n)));
        // Mostly sideways moves so blocks also land away from the spawn column.
        std::discrete_distribution<int> pick({2.0, 2.0, 3.0});
        for (int episode = 0; episode < 3400; ++episode) {
            const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(episode));
            std::mt19937_64 rng(seed);
            std::mt19937_64 replay_rng(seed);
            StackState s = stack_reset(cfg, rng);
            StackState r = stack_reset(cfg, replay_rng);
            check(state_hash(s) == state_hash(r), "reset replay");
            while (!s.terminal) {
                const auto a = static_cast<StackAction>(pick(actions));
                const StepOutcome out = stack_step(s, a, cfg, rng);
                const StepOutcome again = stack_step(r, a, cfg, replay_rng);
                ++steps;
                check(out.event == again.event && state_hash(out.next) == state_hash(again.next) &&
                          out.reward == again.reward,
                      "replay");
                check(grid_overlap_count(out.next.background, out.next.foreground) == 0, "disjoint maps");
                check(out.next.background.count() == 5 * out.next.blocks_placed, "5 cells per placed block");
                check(out.terminal == is_terminal_event(out.event) && out.terminal == out.next.terminal,
                      "terminal event");
                check(out.terminal || out.next.foreground.count() == 5, "moving block present");
                check((out.reward == 1.0) == (out.event == StepEvent::EpisodeSuccess), "success reward");
                check(out.next.steps <= cfg.max_episode_steps, "episode cap");
                s = out.next;
                r = again.next;
            }
            bool threw = false;
            try {
                stack_step(s, StackAction::Down, cfg, rng);
            } catch (const SteppedTerminalEpisode&) {
                threw = true;
            }
            check(threw, "step after terminal");
            ++sequences;
        }
    }

    int targets = 0;
    int scripted_ok = 0;
    for (int n : {2, 3, 4}) {
        const auto pool = enumerate_target_pool(n, 20, 15);
        for (std::size_t g = 0; g < pool.size(); ++g) {
            StackEnvConfig cfg;
            cfg.target_pool = {pool[g]};
            cfg.seed = derive_seed(31, g);
            StackEnv env(cfg);
            env.reset();
            StepOutcome out;
            do {
                for (StackAction a : scripted_block_actions(env.state(), pool[g])) out = env.step(a);
            } while (!out.terminal);
            ++targets;
            scripted_ok += out.event == StepEvent::EpisodeSuccess ? 1 : 0;
        }
    }

    const bool pass = violations == 0 && sequences >= 10000 && scripted_ok == targets;
    return {pass, format("%ld sequences, %ld steps, %ld violations%s%s; scripted %d/%d targets", sequences, steps,
                         violations, violations ? " first: " : "", first_violation.c_str(), scripted_ok, targets)};
}

// --------------------------------------------------------------- criterion 10

GridMap random_map(int w, int h, double density, std::mt19937_64& rng) {
    std::bernoulli_distribution on(density);
    GridMap m(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) m.set(c, r, on(rng));
    }
    return m;
}

int brute_distance(const GridMap& goal, int col, int row) {
    int best = -1;
    for (int r = 0; r < goal.height(); ++r) {
        for (int c = 0; c < goal.width(); ++c) {
            if (!goal.at(c, r)) continue;
            const int d = std::abs(c - col) + std::abs(r - row);
            if (best < 0 || d < best) best = d;
        }
    }
    return best;
}

Outcome shaping_exactness() {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> density(0.0, 0.4);
    long mismatches = 0;
    for (int t = 0; t < 1000; ++t) {
        const int w = 20;
        const int h = 15;
        const GridMap state = random_map(w, h, density(rng), rng);
        GridMap goal = random_map(w, h, 0.2 * density(rng), rng);
        goal.set(static_cast<int>(rng() % w), static_cast<int>(rng() % h));
        const GridMap next = random_map(w, h, density(rng), rng);

        long inter = 0;
        long next_inter = 0;
        long goal_cells = 0;
        std::vector<int> brute(static_cast<std::size_t>(w * h));
        std::int64_t sum = 0;
        std::int64_t next_sum = 0;
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                const int d = brute_distance(goal, c, r);
                brute[static_cast<std::size_t>(r * w + c)] = d;
                goal_cells += goal.at(c, r);
                inter += state.at(c, r) && goal.at(c, r);
                next_inter += next.at(c, r) && goal.at(c, r);
                if (state.at(c, r)) sum += d;
                if (next.at(c, r)) next_sum += d;
            }
        }

        const DistanceField field = distance_transform(goal);
        if (field.values != brute) ++mismatches;
        // Both counts are exact integers, so the correctly rounded quotient is unique.
        if (overlap_ratio(state, goal) != static_cast<double>(inter) / static_cast<double>(goal_cells)) ++mismatches;
        if (distance_sum(state, field) != sum) ++mismatches;
        const int or_sign = (next_inter > inter) - (next_inter < inter);
        if (shaped_reward_overlap(state, next, goal) != or_sign) ++mismatches;
        const int dt_sign = (next_sum < sum) - (next_sum > sum);
        if (shaped_reward_dt(state, next, field) != dt_sign) ++mismatches;
    }
    return {mismatches == 0, format("1000 random 20x15 pairs, %ld mismatches", mismatches)};
}

}  // namespace

Outcome run_criterion(int n) {
    static const std::function<Outcome()> criteria[kCriterionCount] = {
        oracle_equivalence, gradient_correctness, classifier_intra, difficulty_trend, cross_group,
        gridworld,          target_stacking,      shaping_effect,   environment_invariants, shaping_exactness,
    };
    if (n < 1 || n > kCriterionCount) throw std::out_of_range("no such criterion");
    return criteria[n - 1]();
}

}  // namespace stackrl::acceptance
