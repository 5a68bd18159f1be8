#include "stackrl/agent.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "stackrl/errors.hpp"
#include "stackrl/seeding.hpp"

namespace stackrl {

namespace {

// Seed streams derived from AgentConfig::seed.
enum SeedStream : std::uint64_t {
    kNetSeed = 1,
    kAgentSeed = 2,
    kTrainEnvSeed = 3,
    kTestEnvSeedBase = 1000,
};

void append_on(const GridMap& map, int offset, std::vector<std::uint16_t>& out) {
    const auto data = map.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i]) out.push_back(static_cast<std::uint16_t>(offset + static_cast<int>(i)));
    }
}

void check_layout(const InputLayout& layout) {
    if (layout.input_dim() > std::numeric_limits<std::uint16_t>::max()) {
        throw ShapeMismatch("observation too large for 16-bit input indices");
    }
}

}  // namespace

InputLayout stacking_layout(int width, int height, bool summed_state) {
    const int cells = width * height;
    InputLayout layout{summed_state ? cells : 2 * cells, cells};
    check_layout(layout);
    return layout;
}

InputLayout gridworld_layout(int size) { return InputLayout{size * size, size * size}; }

Observation observe(const StackState& state, bool summed_state) {
    Observation obs;
    const int cells = static_cast<int>(state.background.cell_count());
    if (summed_state) {
        append_on(grid_union(state.background, state.foreground), 0, obs.state_on);
    } else {
        append_on(state.background, 0, obs.state_on);
        append_on(state.foreground, cells, obs.state_on);
    }
    const int goal_offset = summed_state ? cells : 2 * cells;
    append_on(state.goal, goal_offset, obs.goal_on);
    return obs;
}

Observation observe(const GridworldState& state) {
    const int n = state.size;
    Observation obs;
    obs.state_on.push_back(static_cast<std::uint16_t>(state.agent.row * n + state.agent.col));
    obs.goal_on.push_back(static_cast<std::uint16_t>(n * n + state.goal.row * n + state.goal.col));
    return obs;
}

Eigen::VectorXd encode(const Observation& obs, const InputLayout& layout, bool goal_conditioned) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(layout.input_dim());
    for (auto i : obs.state_on) {
        if (i >= layout.state_dim) throw ShapeMismatch("state index outside the state block");
        x(i) = 1.0;
    }
    if (goal_conditioned) {
        for (auto i : obs.goal_on) {
            if (i < layout.state_dim || i >= layout.input_dim()) {
                throw ShapeMismatch("goal index outside the goal block");
            }
            x(i) = 1.0;
        }
    }
    return x;
}

Eigen::SparseMatrix<double> encode_batch(std::span<const Observation* const> batch,
                                         const InputLayout& layout, bool goal_conditioned) {
    Eigen::SparseMatrix<double> m(layout.input_dim(), static_cast<Eigen::Index>(batch.size()));
    std::size_t nnz = 0;
    for (const auto* o : batch) nnz += o->state_on.size() + (goal_conditioned ? o->goal_on.size() : 0);
    m.reserve(static_cast<Eigen::Index>(nnz));
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        m.startVec(col);
        // Indices are appended in increasing order: state block, then goal block.
        for (auto i : batch[j]->state_on) {
            if (i >= layout.state_dim) throw ShapeMismatch("state index outside the state block");
            m.insertBack(i, col) = 1.0;
        }
        if (goal_conditioned) {
            for (auto i : batch[j]->goal_on) {
                if (i < layout.state_dim || i >= layout.input_dim()) {
                    throw ShapeMismatch("goal index outside the goal block");
                }
                m.insertBack(i, col) = 1.0;
            }
        }
    }
    m.finalize();
    return m;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw InvalidArgument("replay capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity, 1u << 16));
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
        return;
    }
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= items_.size()) throw OutOfBounds("replay index " + std::to_string(i));
    return items_[(head_ + i) % items_.size()];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, std::mt19937_64& rng) const {
    if (items_.empty()) throw EmptyDataset("cannot sample an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<const Transition*> out(batch);
    for (auto& p : out) p = &items_[pick(rng)];
    return out;
}

double EpsilonSchedule::value(std::int64_t step) const {
    if (anneal_steps <= 0 || step >= anneal_steps) return end;
    const double frac = static_cast<double>(std::max<std::int64_t>(step, 0)) / static_cast<double>(anneal_steps);
    return start + (end - start) * frac;
}

const char* to_string(OptimizerKind kind) {
    return kind == OptimizerKind::Adam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer_kind(const std::string& text) {
    if (text == "sgd") return OptimizerKind::SgdMomentum;
    if (text == "adam") return OptimizerKind::Adam;
    throw InvalidArgument("unknown optimizer '" + text + "'");
}

AgentConfig AgentConfig::stacking() {
    AgentConfig cfg;
    cfg.gamma = 0.95;
    cfg.target_update_every = 250;
    cfg.epoch_steps = 10000;
    cfg.test_steps = 1000;
    cfg.buffer_capacity = 200000;
    cfg.eval_epsilon = 0.05;
    return cfg;
}

AgentConfig AgentConfig::gridworld(int size) {
    AgentConfig cfg;
    cfg.gamma = 0.9;
    cfg.epoch_steps = size == 7 ? 3000 : 1000;
    cfg.test_steps = 100;
    cfg.buffer_capacity = size == 7 ? 30000 : 20000;
    return cfg;
}

void validate(const AgentConfig& cfg) {
    if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) throw InvalidArgument("gamma must be in [0,1]");
    if (cfg.batch_size < 1 || cfg.target_update_every < 1 || cfg.epochs < 1 || cfg.epoch_steps < 1 ||
        cfg.test_steps < 1 || cfg.buffer_capacity < 1 || cfg.anneal_epochs < 0 || cfg.learning_starts < 1) {
        throw InvalidArgument("agent counts must be positive");
    }
    if (!(cfg.learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
    if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw InvalidArgument("momentum must be in [0,1)");
    for (double e : {cfg.epsilon_start, cfg.epsilon_end, cfg.eval_epsilon}) {
        if (!(e >= 0.0 && e <= 1.0)) throw InvalidArgument("epsilon values must be in [0,1]");
    }
    if (cfg.epsilon_end > cfg.epsilon_start) throw InvalidArgument("epsilon schedule must not increase");
    for (int h : cfg.hidden) {
        if (h < 1) throw InvalidArgument("hidden layer widths must be positive");
    }
}

int greedy_action(const Eigen::VectorXd& q, std::mt19937_64& rng) {
    const double best = q.maxCoeff();
    std::vector<int> ties;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (q(i) == best) ties.push_back(static_cast<int>(i));
    }
    if (ties.size() == 1) return ties.front();
    std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
    return ties[pick(rng)];
}

int select_action(const nn::Network& net, const Eigen::VectorXd& input, double epsilon,
                  std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (epsilon > 0.0 && coin(rng) < epsilon) {
        std::uniform_int_distribution<int> any(0, net.output_dim() - 1);
        return any(rng);
    }
    return greedy_action(nn::forward(net, input), rng);
}

std::vector<double> td_targets(const nn::Network& target_net, std::span<const Transition* const> batch,
                               const InputLayout& layout, bool goal_conditioned, double gamma) {
    std::vector<const Observation*> next(batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j) next[j] = &batch[j]->next_obs;
    const Eigen::MatrixXd q_next = nn::forward(target_net, encode_batch(next, layout, goal_conditioned));
    std::vector<double> y(batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const Transition& t = *batch[j];
        y[j] = t.terminal ? t.reward : t.reward + gamma * q_next.col(static_cast<Eigen::Index>(j)).maxCoeff();
    }
    return y;
}

namespace {

struct TdStep {
    double loss = 0.0;
    nn::Gradients grads;
};

TdStep td_gradients(const nn::Network& net, const nn::Network& target_net,
                    std::span<const Transition* const> batch, const InputLayout& layout,
                    bool goal_conditioned, double gamma) {
    if (batch.empty()) throw InvalidArgument("empty TD batch");
    if (net.input_dim() != layout.input_dim() || target_net.input_dim() != layout.input_dim() ||
        net.output_dim() != target_net.output_dim()) {
        throw ShapeMismatch("networks do not match the input layout");
    }
    const std::vector<double> y = td_targets(target_net, batch, layout, goal_conditioned, gamma);

    std::vector<const Observation*> obs(batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j) obs[j] = &batch[j]->obs;
    nn::ForwardCache cache;
    const Eigen::MatrixXd q = nn::forward(net, encode_batch(obs, layout, goal_conditioned), &cache);

    // Squared error on the taken action only: the other outputs get zero gradient.
    const double n = static_cast<double>(batch.size());
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(q.rows(), q.cols());
    TdStep out;
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const int a = batch[j]->action;
        if (a < 0 || a >= q.rows()) throw ShapeMismatch("action index " + std::to_string(a));
        const double err = q(a, static_cast<Eigen::Index>(j)) - y[j];
        out.loss += err * err / n;
        grad(a, static_cast<Eigen::Index>(j)) = 2.0 * err / n;
    }
    out.grads = nn::backward_from_output(net, cache, grad);
    return out;
}

}  // namespace

double td_update(nn::Network& net, const nn::Network& target_net,
                 std::span<const Transition* const> batch, const InputLayout& layout,
                 bool goal_conditioned, double gamma, nn::SgdMomentum& opt) {
    TdStep step = td_gradients(net, target_net, batch, layout, goal_conditioned, gamma);
    nn::optimizer_step(net, step.grads, opt);
    return step.loss;
}

double td_update(nn::Network& net, const nn::Network& target_net,
                 std::span<const Transition* const> batch, const InputLayout& layout,
                 bool goal_conditioned, double gamma, nn::Adam& opt) {
    TdStep step = td_gradients(net, target_net, batch, layout, goal_conditioned, gamma);
    nn::optimizer_step(net, step.grads, opt);
    return step.loss;
}

void sync_target(const nn::Network& net, nn::Network& target_net) { target_net = net; }

int shaped_reward(ShapingMode mode, const GridMap& prev_cells, const GridMap& next_cells,
                  const GridMap& goal, const DistanceField* field) {
    switch (mode) {
        case ShapingMode::None:
            return 0;
        case ShapingMode::OverlapRatio:
            return shaped_reward_overlap(prev_cells, next_cells, goal);
        case ShapingMode::DistanceTransform:
            if (field == nullptr) throw InvalidArgument("distance shaping needs a distance field");
            return shaped_reward_dt(prev_cells, next_cells, *field);
    }
    return 0;
}

DqnAgent::DqnAgent(const InputLayout& layout, int action_count, const AgentConfig& cfg)
    : layout_(layout),
      cfg_(cfg),
      buffer_(static_cast<std::size_t>(cfg.buffer_capacity)),
      rng_(derive_seed(cfg.seed, kAgentSeed)) {
    validate(cfg);
    const auto specs = nn::mlp_specs(layout.input_dim(), cfg.hidden, action_count,
                                     nn::Activation::ReLU, nn::Activation::Identity);
    net_ = nn::net_init(specs, derive_seed(cfg.seed, kNetSeed));
    target_ = net_;
    sgd_.learning_rate = cfg.learning_rate;
    sgd_.momentum = cfg.momentum;
    adam_.learning_rate = cfg.learning_rate;
}

int DqnAgent::act(const Observation& obs, double epsilon) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (epsilon > 0.0 && coin(rng_) < epsilon) {
        std::uniform_int_distribution<int> any(0, net_.output_dim() - 1);
        return any(rng_);
    }
    const Observation* one[] = {&obs};
    const Eigen::MatrixXd q = nn::forward(net_, encode_batch(one, layout_, cfg_.goal_conditioned));
    return greedy_action(q.col(0), rng_);
}

double DqnAgent::update(Transition t) {
    buffer_.push(std::move(t));
    if (buffer_.size() < static_cast<std::size_t>(cfg_.learning_starts)) return 0.0;
    const auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
    const double loss =
        cfg_.optimizer == OptimizerKind::Adam
            ? td_update(net_, target_, batch, layout_, cfg_.goal_conditioned, cfg_.gamma, adam_)
            : td_update(net_, target_, batch, layout_, cfg_.goal_conditioned, cfg_.gamma, sgd_);
    ++updates_;
    if (updates_ % cfg_.target_update_every == 0) sync_target(net_, target_);
    return loss;
}

namespace {

int greedy_or_random(const nn::Network& net, const Observation& obs, const InputLayout& layout,
                     const AgentConfig& cfg, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (cfg.eval_epsilon > 0.0 && coin(rng) < cfg.eval_epsilon) {
        std::uniform_int_distribution<int> any(0, net.output_dim() - 1);
        return any(rng);
    }
    const Observation* one[] = {&obs};
    const Eigen::MatrixXd q = nn::forward(net, encode_batch(one, layout, cfg.goal_conditioned));
    return greedy_action(q.col(0), rng);
}

bool better_stacking(const EvalReport& a, const EvalReport& b) {
    if (a.success_rate != b.success_rate) return a.success_rate > b.success_rate;
    return a.overlap > b.overlap;
}

}  // namespace

EvalReport evaluate_stacking_agent(const StackEnvConfig& env_cfg, const nn::Network& net,
                                   const AgentConfig& cfg, int steps, std::uint64_t seed) {
    StackEnvConfig test_cfg = env_cfg;
    test_cfg.seed = seed;
    StackEnv env(test_cfg);
    std::mt19937_64 rng(derive_seed(seed, kAgentSeed));
    const InputLayout layout = stacking_layout(env_cfg.width, env_cfg.height, cfg.summed_state);

    EvalReport report;
    double overlap_sum = 0.0;
    int successes = 0;
    env.reset();
    for (int t = 0; t < steps; ++t) {
        const Observation obs = observe(env.state(), cfg.summed_state);
        const int a = greedy_or_random(net, obs, layout, cfg, rng);
        const StepOutcome out = env.step(static_cast<StackAction>(a));
        if (!out.terminal) continue;
        ++report.episodes;
        overlap_sum += overlap_ratio(out.next.background, out.next.goal);
        if (grid_equal(out.next.background, out.next.goal)) ++successes;
        env.reset();
    }
    if (report.episodes > 0) {
        report.overlap = overlap_sum / report.episodes;
        report.success_rate = static_cast<double>(successes) / report.episodes;
    }
    return report;
}

EvalReport evaluate_gridworld_agent(const GridworldConfig& env_cfg, const nn::Network& net,
                                    const AgentConfig& cfg, int steps, std::uint64_t seed) {
    GridworldConfig test_cfg = env_cfg;
    test_cfg.seed = seed;
    GridworldEnv env(test_cfg);
    std::mt19937_64 rng(derive_seed(seed, kAgentSeed));
    const InputLayout layout = gridworld_layout(env_cfg.size);

    EvalReport report;
    int successes = 0;
    env.reset();
    for (int t = 0; t < steps; ++t) {
        const Observation obs = observe(env.state());
        const int a = greedy_or_random(net, obs, layout, cfg, rng);
        const GridStepOutcome out = env.step(static_cast<GridAction>(a));
        if (!out.terminal) continue;
        ++report.episodes;
        if (out.next.steps == manhattan(out.next.start, out.next.goal)) ++successes;
        env.reset();
    }
    const GridworldState& last = env.state();
    if (last.steps > 0 && last.steps >= manhattan(last.start, last.goal)) ++report.episodes;
    if (report.episodes > 0) report.success_ratio = static_cast<double>(successes) / report.episodes;
    return report;
}

TrainResult train_stacking_agent(const StackEnvConfig& env_cfg, const AgentConfig& cfg,
                                 ShapingMode shaping, const EpochCallback& on_epoch) {
    validate(cfg);
    StackEnvConfig train_cfg = env_cfg;
    train_cfg.seed = derive_seed(cfg.seed, kTrainEnvSeed);
    StackEnv env(train_cfg);
    const InputLayout layout = stacking_layout(env_cfg.width, env_cfg.height, cfg.summed_state);
    DqnAgent agent(layout, kStackActionCount, cfg);
    const EpsilonSchedule schedule{cfg.epsilon_start, cfg.epsilon_end,
                                   static_cast<std::int64_t>(cfg.anneal_epochs) * cfg.epoch_steps};

    // One distance field per pool goal.
    std::vector<DistanceField> fields;
    if (shaping == ShapingMode::DistanceTransform) {
        for (const auto& t : env_cfg.target_pool) fields.push_back(distance_transform(t.goal));
    }

    TrainResult result;
    bool have_best = false;
    std::int64_t step = 0;
    env.reset();
    double episode_return = 0.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double returns = 0.0;
        int finished = 0;
        for (int i = 0; i < cfg.epoch_steps; ++i, ++step) {
            const StackState& s = env.state();
            Transition t;
            t.obs = observe(s, cfg.summed_state);
            const GridMap prev_cells = cfg.shaping_includes_moving_block ? state_cells(s) : s.background;
            const DistanceField* field =
                fields.empty() ? nullptr : &fields[static_cast<std::size_t>(s.goal_index)];
            const GridMap goal = s.goal;

            t.action = agent.act(t.obs, schedule.value(step));
            const StepOutcome out = env.step(static_cast<StackAction>(t.action));
            const GridMap& next_cells =
                cfg.shaping_includes_moving_block ? out.resolved_cells : out.next.background;
            t.reward = out.reward + shaped_reward(shaping, prev_cells, next_cells, goal, field);
            t.terminal = out.terminal;
            t.next_obs = observe(out.next, cfg.summed_state);
            episode_return += t.reward;
            agent.update(std::move(t));
            if (out.terminal) {
                returns += episode_return;
                ++finished;
                episode_return = 0.0;
                env.reset();
            }
        }
        EpochMetrics m;
        m.epoch = epoch;
        m.epsilon = schedule.value(step);
        m.train_return_mean = finished > 0 ? returns / finished : 0.0;
        m.test = evaluate_stacking_agent(env_cfg, agent.network(), cfg, cfg.test_steps,
                                         derive_seed(cfg.seed, kTestEnvSeedBase + static_cast<std::uint64_t>(epoch)));
        if (!have_best || better_stacking(m.test, result.best)) {
            have_best = true;
            result.best = m.test;
            result.best_epoch = epoch;
            result.best_model = agent.network();
        }
        result.epochs.push_back(m);
        if (on_epoch) on_epoch(m);
    }
    return result;
}

TrainResult train_gridworld_agent(const GridworldConfig& env_cfg, const AgentConfig& cfg,
                                  const EpochCallback& on_epoch) {
    validate(cfg);
    GridworldConfig train_cfg = env_cfg;
    train_cfg.seed = derive_seed(cfg.seed, kTrainEnvSeed);
    GridworldEnv env(train_cfg);
    const InputLayout layout = gridworld_layout(env_cfg.size);
    DqnAgent agent(layout, kGridActionCount, cfg);
    const EpsilonSchedule schedule{cfg.epsilon_start, cfg.epsilon_end,
                                   static_cast<std::int64_t>(cfg.anneal_epochs) * cfg.epoch_steps};

    TrainResult result;
    bool have_best = false;
    std::int64_t step = 0;
    env.reset();
    double episode_return = 0.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double returns = 0.0;
        int finished = 0;
        for (int i = 0; i < cfg.epoch_steps; ++i, ++step) {
            Transition t;
            t.obs = observe(env.state());
            t.action = agent.act(t.obs, schedule.value(step));
            const GridStepOutcome out = env.step(static_cast<GridAction>(t.action));
            t.reward = out.reward;
            t.terminal = out.terminal;
            t.next_obs = observe(out.next);
            episode_return += t.reward;
            agent.update(std::move(t));
            if (out.terminal) {
                returns += episode_return;
                ++finished;
                episode_return = 0.0;
                env.reset();
            }
        }
        EpochMetrics m;
        m.epoch = epoch;
        m.epsilon = schedule.value(step);
        m.train_return_mean = finished > 0 ? returns / finished : 0.0;
        m.test = evaluate_gridworld_agent(env_cfg, agent.network(), cfg, cfg.test_steps,
                                          derive_seed(cfg.seed, kTestEnvSeedBase + static_cast<std::uint64_t>(epoch)));
        if (!have_best || m.test.success_ratio > result.best.success_ratio) {
            have_best = true;
            result.best = m.test;
            result.best_epoch = epoch;
            result.best_model = agent.network();
        }
        result.epochs.push_back(m);
        if (on_epoch) on_epoch(m);
    }
    return result;
}

}  // namespace stackrl
