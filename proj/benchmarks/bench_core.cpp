#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "stackrl/agent.hpp"
#include "stackrl/nn.hpp"
#include "stackrl/shaping.hpp"
#include "stackrl/stability.hpp"
#include "stackrl/stack_env.hpp"

using namespace stackrl;

namespace {

Scene offset_chain(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> shift(-0.4, 0.4);
    Scene s;
    double x = 0.0;
    for (int i = 0; i < n; ++i) {
        s.blocks.push_back(Block2D{x, static_cast<double>(i), 3.0, 1.0});
        x += shift(rng);
    }
    return s;
}

}  // namespace

static void StabilityLp(benchmark::State& state) {
    const Scene s = offset_chain(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(check_stability_lp(s).stable);
    state.SetComplexityN(state.range(0));
}
BENCHMARK(StabilityLp)->DenseRange(2, 14, 4)->Complexity();

static void StabilityRecursive(benchmark::State& state) {
    const Scene s = offset_chain(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(check_stability_recursive(s).stable);
    state.SetComplexityN(state.range(0));
}
BENCHMARK(StabilityRecursive)->DenseRange(2, 14, 4)->Complexity();

static void QNetForwardBackward(benchmark::State& state) {
    const int batch = static_cast<int>(state.range(0));
    const std::vector<int> hidden{64, 64};
    const auto specs = nn::mlp_specs(900, hidden, 3, nn::Activation::ReLU, nn::Activation::Identity);
    const nn::Network net = nn::net_init(specs, 5);
    std::mt19937_64 rng(2);
    std::bernoulli_distribution on(0.02);
    Eigen::MatrixXd x(900, batch);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = on(rng) ? 1.0 : 0.0;
    const Eigen::MatrixXd y = Eigen::MatrixXd::Zero(3, batch);
    nn::ForwardCache cache;
    for (auto _ : state) {
        nn::forward(net, x, &cache);
        const nn::Gradients g = nn::backward(net, cache, nn::Loss::MSE, y);
        benchmark::DoNotOptimize(g);
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(QNetForwardBackward)->Arg(1)->Arg(32);

static void StackEnvRandomStep(benchmark::State& state) {
    StackEnvConfig cfg;
    cfg.target_pool = enumerate_target_pool(static_cast<int>(state.range(0)), cfg.width, cfg.height);
    StackEnv env(cfg);
    env.reset();
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> pick(0, kStackActionCount - 1);
    for (auto _ : state) {
        if (env.state().terminal) env.reset();
        benchmark::DoNotOptimize(env.step(static_cast<StackAction>(pick(rng))));
    }
}
BENCHMARK(StackEnvRandomStep)->Arg(2)->Arg(4);

static void DistanceTransform(benchmark::State& state) {
    StackEnvConfig cfg;
    const auto pool = enumerate_target_pool(4, cfg.width, cfg.height);
    for (auto _ : state) benchmark::DoNotOptimize(distance_transform(pool.front().goal));
}
BENCHMARK(DistanceTransform);

static void AgentUpdate(benchmark::State& state) {
    StackEnvConfig cfg;
    cfg.target_pool = enumerate_target_pool(2, cfg.width, cfg.height);
    StackEnv env(cfg);
    AgentConfig acfg = AgentConfig::stacking();
    DqnAgent agent(stacking_layout(cfg.width, cfg.height, false), kStackActionCount, acfg);
    Observation obs = observe(env.reset(), false);
    for (auto _ : state) {
        const int a = agent.act(obs, 1.0);
        const StepOutcome out = env.step(static_cast<StackAction>(a));
        Observation next = observe(out.next, false);
        benchmark::DoNotOptimize(agent.update({obs, a, out.reward, next, out.terminal}));
        obs = out.terminal ? observe(env.reset(), false) : std::move(next);
    }
}
BENCHMARK(AgentUpdate)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
