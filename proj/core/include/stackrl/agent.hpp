#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "stackrl/gridworld.hpp"
#include "stackrl/nn.hpp"
#include "stackrl/shaping.hpp"
#include "stackrl/stack_env.hpp"

namespace stackrl {

// Binary observation stored as the indices of its set inputs. goal_on holds
// absolute input indices (already offset past the state block).
struct Observation {
    std::vector<std::uint16_t> state_on;
    std::vector<std::uint16_t> goal_on;
};

struct InputLayout {
    int state_dim = 0;
    int goal_dim = 0;
    int input_dim() const { return state_dim + goal_dim; }
};

// Stacking: [background | foreground | goal] flattened row-major (or
// [background + foreground | goal] when summed_state). Gridworld:
// [one-hot agent | one-hot goal].
InputLayout stacking_layout(int width, int height, bool summed_state);
InputLayout gridworld_layout(int size);

Observation observe(const StackState& state, bool summed_state);
Observation observe(const GridworldState& state);

// Dense network input; the goal block is all zeros unless goal_conditioned.
Eigen::VectorXd encode(const Observation& obs, const InputLayout& layout, bool goal_conditioned);

// Columns are the encoded observations.
Eigen::SparseMatrix<double> encode_batch(std::span<const Observation* const> batch,
                                         const InputLayout& layout, bool goal_conditioned);

struct Transition {
    Observation obs;
    int action = 0;
    double reward = 0.0;
    Observation next_obs;
    bool terminal = false;
};

// Fixed-capacity ring; once full, each push evicts the oldest transition.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return items_.empty(); }

    // i = 0 is the oldest stored transition.
    const Transition& at(std::size_t i) const;

    // Uniform sampling with replacement.
    std::vector<const Transition*> sample(std::size_t batch, std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // next slot to overwrite once full
    std::vector<Transition> items_;
};

// Linear from start to end over anneal_steps, constant afterwards.
struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.1;
    std::int64_t anneal_steps = 1;

    double value(std::int64_t step) const;
};

enum class OptimizerKind { SgdMomentum, Adam };

const char* to_string(OptimizerKind kind);
// Accepts "sgd" and "adam".
OptimizerKind parse_optimizer_kind(const std::string& text);

struct AgentConfig {
    double gamma = 0.99;
    int batch_size = 32;
    int target_update_every = 1000;
    std::vector<int> hidden{64, 64};
    int epochs = 100;
    int epoch_steps = 10000;
    int test_steps = 1000;
    int buffer_capacity = 200000;
    bool goal_conditioned = true;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::SgdMomentum;
    double learning_rate = 1e-2;
    double momentum = 0.9;  // SgdMomentum only
    int anneal_epochs = 20;
    double epsilon_start = 1.0;
    double epsilon_end = 0.1;
    double eval_epsilon = 0.0;
    int learning_starts = 32;  // buffer size before the first update
    bool summed_state = false;
    bool shaping_includes_moving_block = true;

    static AgentConfig stacking();
    static AgentConfig gridworld(int size);
};

void validate(const AgentConfig& cfg);

// Epsilon-greedy over the network's Q outputs; exact ties break uniformly.
int select_action(const nn::Network& net, const Eigen::VectorXd& input, double epsilon,
                  std::mt19937_64& rng);
int greedy_action(const Eigen::VectorXd& q, std::mt19937_64& rng);

// TD targets r (terminal) or r + gamma * max_a' Q(s', g, a'; target_net).
std::vector<double> td_targets(const nn::Network& target_net, std::span<const Transition* const> batch,
                               const InputLayout& layout, bool goal_conditioned, double gamma);

// One optimizer step on the squared TD error of the taken actions. Returns
// the batch loss before the step. Throws ShapeMismatch.
double td_update(nn::Network& net, const nn::Network& target_net,
                 std::span<const Transition* const> batch, const InputLayout& layout,
                 bool goal_conditioned, double gamma, nn::SgdMomentum& opt);
double td_update(nn::Network& net, const nn::Network& target_net,
                 std::span<const Transition* const> batch, const InputLayout& layout,
                 bool goal_conditioned, double gamma, nn::Adam& opt);

void sync_target(const nn::Network& net, nn::Network& target_net);

// The per-step shaping term for a transition between two cell sets.
int shaped_reward(ShapingMode mode, const GridMap& prev_cells, const GridMap& next_cells,
                  const GridMap& goal, const DistanceField* field);

// Q-network, target network, replay memory and optimizer of one DQN/GDQN learner.
class DqnAgent {
public:
    DqnAgent(const InputLayout& layout, int action_count, const AgentConfig& cfg);

    int act(const Observation& obs, double epsilon);
    // Stores the transition and, once warm, performs one TD update and the
    // periodic target sync. Returns the update loss (0 while warming up).
    double update(Transition t);

    const nn::Network& network() const { return net_; }
    const nn::Network& target_network() const { return target_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    std::int64_t updates() const { return updates_; }

private:
    InputLayout layout_;
    AgentConfig cfg_;
    nn::Network net_;
    nn::Network target_;
    nn::SgdMomentum sgd_;
    nn::Adam adam_;
    ReplayBuffer buffer_;
    std::mt19937_64 rng_;
    std::int64_t updates_ = 0;
};

struct EvalReport {
    int episodes = 0;          // finished episodes counted
    double success_ratio = 0;  // gridworld: shortest-path arrivals / episodes
    double overlap = 0;        // stacking OR: mean final overlap ratio
    double success_rate = 0;   // stacking SR: exact reproductions / episodes
};

struct EpochMetrics {
    int epoch = 0;
    double epsilon = 0.0;  // at the end of the training epoch
    double train_return_mean = 0.0;
    EvalReport test;
};

struct TrainResult {
    nn::Network best_model;
    int best_epoch = 0;
    EvalReport best;
    std::vector<EpochMetrics> epochs;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Greedy-ish (cfg.eval_epsilon) test epoch of `steps` environment steps.
// Stacking: OR and SR over episodes that finished inside the epoch.
EvalReport evaluate_stacking_agent(const StackEnvConfig& env, const nn::Network& net,
                                   const AgentConfig& cfg, int steps, std::uint64_t seed);
// Gridworld: an episode succeeds when it reaches the goal in exactly the
// Manhattan distance. A trailing unfinished episode counts as a failure once
// it has used that many steps, and is ignored otherwise.
EvalReport evaluate_gridworld_agent(const GridworldConfig& env, const nn::Network& net,
                                    const AgentConfig& cfg, int steps, std::uint64_t seed);

// epochs x epoch_steps of epsilon-greedy interaction, one TD update per step,
// then a test epoch. Keeps the best test epoch (stacking: SR, then OR;
// gridworld: success ratio), ties to the earlier epoch.
TrainResult train_stacking_agent(const StackEnvConfig& env, const AgentConfig& cfg,
                                 ShapingMode shaping, const EpochCallback& on_epoch = {});
TrainResult train_gridworld_agent(const GridworldConfig& env, const AgentConfig& cfg,
                                  const EpochCallback& on_epoch = {});

}  // namespace stackrl
