#include "cli.hpp"

#include <cstdlib>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "stackrl/agent.hpp"
#include "stackrl/errors.hpp"
#include "stackrl/io.hpp"
#include "stackrl/seeding.hpp"
#include "stackrl/stabnet.hpp"
#include "stackrl/stack_env.hpp"
#include "stackrl/towergen.hpp"

namespace stackrl::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <typename F>
auto as_usage(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
}

struct Options {
    std::optional<std::uint64_t> seed;
    std::string config_path;

    // gen-towers
    std::string params = "4B-2D-Uni";
    int count = 1000;
    std::string out_path;
    std::optional<double> balanced;

    // classifier
    std::string data_path;
    std::string model_path;
    std::string model_out;
    double split = 0.5;
    std::string plan = "intra";
    std::string size = "uni";

    // environments and agents
    int blocks = 2;
    std::string env = "stack";
    std::string mode = "gdqn";
    std::string shaping;
    std::string metrics_out;
    std::string trace_out;
    int steps = 1000;

    int grid_width = 0;  // 0 keeps the config value
    int grid_height = 0;

    // render / placements
    std::string input_path;
    std::string format = "ascii";
    int width = 64;
    int height = 64;
    double cell = 0.25;
    int nh = 9;
    int nv = 5;
};

std::uint64_t resolve_seed(const Options& o, std::uint64_t config_seed) {
    if (o.seed) return *o.seed;
    if (const char* env = std::getenv("STACKRL_SEED")) {
        try {
            std::size_t used = 0;
            const std::uint64_t s = std::stoull(env, &used);
            if (used == std::string(env).size()) return s;
        } catch (const std::exception&) {
        }
        throw UsageError("STACKRL_SEED must be an unsigned integer");
    }
    return config_seed;
}

io::RunConfig load_config(const Options& o, const std::string& env_kind = {}) {
    io::RunConfig cfg;
    if (!o.config_path.empty()) {
        cfg = io::load_run_config(o.config_path);
    } else if (env_kind == "grid") {
        cfg.env.kind = "grid";
        cfg.agent = AgentConfig::gridworld(cfg.env.grid_size);
    } else {
        cfg.agent = AgentConfig::stacking();
    }
    cfg.seed = resolve_seed(o, cfg.seed);
    cfg.towergen.seed = cfg.seed;
    cfg.classifier.seed = cfg.seed;
    cfg.agent.seed = cfg.seed;
    return cfg;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        io::write_text(path, content);
    }
}

std::string pct(double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(4) << v;
    return ss.str();
}

StackEnvConfig stack_env_config(const io::RunConfig& cfg) {
    StackEnvConfig env;
    env.width = cfg.env.width;
    env.height = cfg.env.height;
    env.max_episode_steps = cfg.env.max_episode_steps;
    env.seed = cfg.seed;
    env.target_pool = enumerate_target_pool(cfg.env.pool_blocks, env.width, env.height);
    validate(env);
    return env;
}

std::vector<SceneParams> groups_for(const std::string& size) {
    std::vector<SceneParams> out;
    std::vector<SizeMode> modes;
    if (size == "uni" || size == "both") modes.push_back(SizeMode::Uni);
    if (size == "nonuni" || size == "both") modes.push_back(SizeMode::NonUni);
    if (modes.empty()) throw UsageError("--size must be uni, nonuni or both");
    for (SizeMode m : modes) {
        for (int n : {4, 6, 10, 14}) out.push_back(SceneParams{n, m});
    }
    return out;
}

// --- subcommands -----------------------------------------------------------

int cmd_gen_towers(const Options& o, std::ostream& out) {
    const SceneParams params = as_usage([&] { return parse_scene_params(o.params); });
    if (o.count < 1) throw UsageError("--count must be positive");
    io::RunConfig cfg = load_config(o);
    if (o.balanced) cfg.towergen.target_stable_fraction = *o.balanced;
    as_usage([&] { validate(cfg.towergen); return 0; });
    const Dataset data = generate_dataset(params, o.count, cfg.towergen);
    std::ostringstream ss;
    io::write_dataset(ss, data.records);
    emit(o.out_path, ss.str(), out);
    if (!o.out_path.empty() && o.out_path != "-") {
        out << to_string(params) << ": " << data.records.size() << " scenes, stable fraction "
            << pct(data.counts.stable_fraction()) << "\n";
    }
    return kExitOk;
}

int cmd_train_stab(const Options& o, std::ostream& out) {
    const io::RunConfig cfg = load_config(o);
    std::vector<DatasetRecord> records = io::load_dataset(o.data_path);
    if (records.empty()) throw EmptyDataset("'" + o.data_path + "' holds no records");
    std::mt19937_64 rng(derive_seed(cfg.seed, 0));
    auto [train, test] = as_usage([&] { return split_dataset(std::move(records), o.split, rng); });
    const TrainedClassifier trained = train_classifier(train, cfg.classifier);
    io::write_text(o.model_out, nn::save_model(trained.net));
    out << "train_accuracy " << pct(trained.report.train_accuracy) << "\n";
    if (!test.empty()) out << "test_accuracy " << pct(eval_classifier(trained.net, test, cfg.classifier)) << "\n";
    return kExitOk;
}

int cmd_eval_stab(const Options& o, std::ostream& out) {
    const io::RunConfig cfg = load_config(o);
    const nn::Network net = nn::load_model(io::read_text(o.model_path));
    const std::vector<DatasetRecord> records = io::load_dataset(o.data_path);
    out << "accuracy " << pct(eval_classifier(net, records, cfg.classifier)) << "\n";
    return kExitOk;
}

int cmd_run_experiment(const Options& o, std::ostream& out) {
    const ExperimentMode mode = as_usage([&] { return parse_experiment_mode(o.plan); });
    const io::RunConfig cfg = load_config(o);
    const std::vector<SceneParams> groups = groups_for(o.size);

    GroupDatasets data;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        TowerGenConfig tg = cfg.towergen;
        tg.seed = derive_seed(cfg.seed, 100 + g);
        Dataset d = generate_dataset(groups[g], o.count, tg);
        std::mt19937_64 rng(derive_seed(cfg.seed, 200 + g));
        auto [train, test] = split_dataset(std::move(d.records), 0.5, rng);
        data[groups[g]] = GroupData{std::move(train), std::move(test)};
    }

    std::vector<ExperimentPlan> plans;
    switch (mode) {
        case ExperimentMode::IntraGroup:
            for (const auto& g : groups) plans.push_back(ExperimentPlan{{g}, {g}, mode});
            break;
        case ExperimentMode::CrossGroup:
            for (SizeMode m : {SizeMode::Uni, SizeMode::NonUni}) {
                if (!data.count(SceneParams{4, m})) continue;
                plans.push_back(ExperimentPlan{{{4, m}, {6, m}}, {{10, m}, {14, m}}, mode});
            }
            break;
        case ExperimentMode::Generalization:
            plans.push_back(ExperimentPlan{groups, groups, mode});
            break;
    }

    std::string csv;
    for (const auto& plan : plans) {
        const ExperimentResult r = run_experiment(plan, data, cfg.classifier);
        const std::string table = io::accuracy_csv(r);
        csv += csv.empty() ? table : table.substr(table.find('\n') + 1);
    }
    emit(o.out_path, csv, out);
    return kExitOk;
}

int cmd_enumerate_targets(const Options& o, std::ostream& out) {
    const io::RunConfig cfg = load_config(o);
    const int w = o.grid_width > 0 ? o.grid_width : cfg.env.width;
    const int h = o.grid_height > 0 ? o.grid_height : cfg.env.height;
    const auto pool = as_usage([&] { return enumerate_target_pool(o.blocks, w, h); });
    std::ostringstream ss;
    ss << pool.size() << " targets\n";
    for (std::size_t i = 0; i < pool.size(); ++i) {
        ss << "target " << i << ":";
        for (const auto& b : pool[i].blocks) {
            ss << " (" << b.col << "," << b.row << "," << (b.orientation == Orientation::Horizontal ? 'H' : 'V') << ")";
        }
        ss << "\n" << io::render_ascii(pool[i].goal);
    }
    emit(o.out_path, ss.str(), out);
    return kExitOk;
}

void apply_mode(const Options& o, io::RunConfig& cfg) {
    if (o.mode == "dqn") {
        cfg.agent.goal_conditioned = false;
    } else if (o.mode == "gdqn") {
        cfg.agent.goal_conditioned = true;
    } else {
        throw UsageError("--mode must be dqn or gdqn");
    }
    if (!o.shaping.empty()) cfg.shaping = as_usage([&] { return parse_shaping_mode(o.shaping); });
    if (o.env != "stack" && o.env != "grid") throw UsageError("--env must be stack or grid");
    if (o.config_path.empty() || o.env != cfg.env.kind) {
        cfg.env.kind = o.env;
    }
}

int cmd_train_agent(const Options& o, std::ostream& out) {
    io::RunConfig cfg = load_config(o, o.env);
    apply_mode(o, cfg);
    auto progress = [&](const EpochMetrics& m) {
        out << "epoch " << m.epoch << " eps " << pct(m.epsilon);
        if (cfg.env.kind == "grid") {
            out << " success_ratio " << pct(m.test.success_ratio) << "\n";
        } else {
            out << " OR " << pct(m.test.overlap) << " SR " << pct(m.test.success_rate) << "\n";
        }
    };
    TrainResult result;
    std::string csv;
    if (cfg.env.kind == "grid") {
        GridworldConfig env{cfg.env.grid_size, cfg.seed};
        as_usage([&] { validate(env); return 0; });
        result = train_gridworld_agent(env, cfg.agent, progress);
        csv = io::gridworld_metrics_csv(result.epochs);
    } else {
        const StackEnvConfig env = as_usage([&] { return stack_env_config(cfg); });
        result = train_stacking_agent(env, cfg.agent, cfg.shaping, progress);
        csv = io::stacking_metrics_csv(result.epochs);
    }
    if (!o.metrics_out.empty()) io::write_text(o.metrics_out, csv);
    if (!o.model_out.empty()) io::write_text(o.model_out, nn::save_model(result.best_model));
    out << "best_epoch " << result.best_epoch;
    if (cfg.env.kind == "grid") {
        out << " success_ratio " << pct(result.best.success_ratio) << "\n";
    } else {
        out << " OR " << pct(result.best.overlap) << " SR " << pct(result.best.success_rate) << "\n";
    }
    return kExitOk;
}

int cmd_eval_agent(const Options& o, std::ostream& out) {
    io::RunConfig cfg = load_config(o, o.env);
    apply_mode(o, cfg);
    const nn::Network net = nn::load_model(io::read_text(o.model_path));
    if (cfg.env.kind == "grid") {
        const GridworldConfig env{cfg.env.grid_size, cfg.seed};
        as_usage([&] { validate(env); return 0; });
        const EvalReport r = evaluate_gridworld_agent(env, net, cfg.agent, o.steps, cfg.seed);
        out << "episodes " << r.episodes << " success_ratio " << pct(r.success_ratio) << "\n";
        return kExitOk;
    }
    const StackEnvConfig env_cfg = as_usage([&] { return stack_env_config(cfg); });
    const EvalReport r = evaluate_stacking_agent(env_cfg, net, cfg.agent, o.steps, cfg.seed);
    out << "episodes " << r.episodes << " OR " << pct(r.overlap) << " SR " << pct(r.success_rate) << "\n";

    if (!o.trace_out.empty()) {
        // Greedy rollout of the first episode under the same seed.
        StackEnvConfig trace_cfg = env_cfg;
        StackEnv env(trace_cfg);
        std::mt19937_64 rng(derive_seed(cfg.seed, 2));
        const InputLayout layout = stacking_layout(env_cfg.width, env_cfg.height, cfg.agent.summed_state);
        std::vector<io::TraceStep> trace;
        env.reset();
        for (int t = 0; t < env_cfg.max_episode_steps; ++t) {
            const StackState& s = env.state();
            const Eigen::VectorXd x = encode(observe(s, cfg.agent.summed_state), layout, cfg.agent.goal_conditioned);
            const int a = select_action(net, x, cfg.agent.eval_epsilon, rng);
            const std::uint64_t h = state_hash(s);
            const StepOutcome step = env.step(static_cast<StackAction>(a));
            trace.push_back(io::TraceStep{h, a, step.reward, to_string(step.event)});
            if (step.terminal) break;
        }
        io::write_text(o.trace_out, io::trace_to_jsonl(trace));
    }
    return kExitOk;
}

int cmd_render(const Options& o, std::ostream& out) {
    if (o.format != "pgm" && o.format != "ascii") throw UsageError("--format must be pgm or ascii");
    if (o.width < 1 || o.height < 1 || !(o.cell > 0.0)) throw UsageError("bad raster dimensions");
    const Scene scene = io::scene_from_json(io::read_text(o.input_path));
    const double cell = fitting_cell_size(scene, o.width, o.height, o.cell);
    const GridMap map = rasterize_scene(scene, o.width, o.height, cell);
    emit(o.out_path, o.format == "pgm" ? io::encode_pgm(map) : io::render_ascii(map), out);
    return kExitOk;
}

int cmd_score_placements(const Options& o, std::ostream& out) {
    const io::RunConfig cfg = load_config(o);
    const Scene scene = io::scene_from_json(io::read_text(o.input_path));
    const nn::Network net = nn::load_model(io::read_text(o.model_path));
    const auto candidates = as_usage([&] { return enumerate_candidates(scene, o.nh, o.nv); });
    const PlacementReport report = score_placements(net, scene, candidates, cfg.classifier);
    std::ostringstream ss;
    ss << "x_center,orientation,p_stable,oracle\n";
    int stable = 0;
    for (const auto& c : report.candidates) {
        ss << pct(c.x_center) << "," << (c.orientation == Orientation::Horizontal ? "horizontal" : "vertical") << ","
           << pct(c.predicted_p_stable) << "," << to_string(c.oracle_label) << "\n";
        if (c.oracle_label == StabilityLabel::Stable) ++stable;
    }
    emit(o.out_path, ss.str(), out);
    if (!o.out_path.empty() && o.out_path != "-") {
        out << "prediction_accuracy " << pct(report.prediction_accuracy) << " oracle_stable " << stable << "/"
            << report.candidates.size() << "\n";
    }
    return kExitOk;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"stackrl: visual stability prediction and goal-conditioned target stacking", "stackrl"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", o.seed, "Seed for all randomness (falls back to STACKRL_SEED)");

    auto* gen = app.add_subcommand("gen-towers", "Generate a labeled tower dataset (JSONL)");
    gen->add_option("--params", o.params, "Scene group, e.g. 4B-2D-Uni")->required();
    gen->add_option("--count", o.count, "Number of scenes")->required();
    gen->add_option("--out", o.out_path, "Output JSONL file ('-' for stdout)")->required();
    gen->add_option("--balanced", o.balanced, "Target stable fraction (rejection sampling)");
    gen->add_option("--config", o.config_path, "Run config JSON");

    auto* train_stab = app.add_subcommand("train-stab", "Train the stability classifier");
    train_stab->add_option("--data", o.data_path, "Dataset JSONL")->required();
    train_stab->add_option("--config", o.config_path, "Run config JSON");
    train_stab->add_option("--model-out", o.model_out, "Model JSON to write")->required();
    train_stab->add_option("--split", o.split, "Train fraction; the rest is reported as test");

    auto* eval_stab = app.add_subcommand("eval-stab", "Evaluate a classifier on a dataset");
    eval_stab->add_option("--data", o.data_path, "Dataset JSONL")->required();
    eval_stab->add_option("--model", o.model_path, "Model JSON")->required();
    eval_stab->add_option("--config", o.config_path, "Run config JSON");

    auto* experiment = app.add_subcommand("run-experiment", "Intra-group, cross-group or generalization table");
    experiment->add_option("--plan", o.plan, "intra|cross|general")->required();
    experiment->add_option("--count", o.count, "Scenes per group (split 50/50)");
    experiment->add_option("--size", o.size, "uni|nonuni|both");
    experiment->add_option("--config", o.config_path, "Run config JSON");
    experiment->add_option("--out", o.out_path, "CSV output (default stdout)");

    auto* targets = app.add_subcommand("enumerate-targets", "List the target pool for N blocks");
    targets->add_option("--blocks", o.blocks, "Blocks per target")->required();
    targets->add_option("--config", o.config_path, "Run config JSON");
    targets->add_option("--out", o.out_path, "Output file (default stdout)");
    targets->add_option("--width", o.grid_width, "Grid width");
    targets->add_option("--height", o.grid_height, "Grid height");

    auto add_agent_flags = [&](CLI::App* sub) {
        sub->add_option("--env", o.env, "stack|grid");
        sub->add_option("--mode", o.mode, "dqn|gdqn");
        sub->add_option("--shaping", o.shaping, "none|or|dt");
        sub->add_option("--config", o.config_path, "Run config JSON");
    };
    auto* train_agent = app.add_subcommand("train-agent", "Train a DQN/GDQN agent");
    add_agent_flags(train_agent);
    train_agent->add_option("--model-out", o.model_out, "Best-epoch model JSON");
    train_agent->add_option("--metrics-out", o.metrics_out, "Per-epoch metrics CSV");

    auto* eval_agent = app.add_subcommand("eval-agent", "Evaluate a trained agent");
    add_agent_flags(eval_agent);
    eval_agent->add_option("--model", o.model_path, "Model JSON")->required();
    eval_agent->add_option("--steps", o.steps, "Test steps");
    eval_agent->add_option("--trace-out", o.trace_out, "Rollout trace JSONL of one greedy episode");

    auto* render = app.add_subcommand("render", "Rasterize a scene to PGM or ASCII");
    render->add_option("--input", o.input_path, "Scene JSON")->required();
    render->add_option("--format", o.format, "pgm|ascii");
    render->add_option("--out", o.out_path, "Output file (default stdout)");
    render->add_option("--width", o.width, "Raster width");
    render->add_option("--height", o.height, "Raster height");
    render->add_option("--cell", o.cell, "Minimum world size of one cell");

    auto* score = app.add_subcommand("score-placements", "Classify candidate placements on a scene");
    score->add_option("--scene", o.input_path, "Scene JSON")->required();
    score->add_option("--model", o.model_path, "Classifier model JSON")->required();
    score->add_option("--nh", o.nh, "Horizontal candidates");
    score->add_option("--nv", o.nv, "Vertical candidates");
    score->add_option("--config", o.config_path, "Run config JSON");
    score->add_option("--out", o.out_path, "CSV output (default stdout)");

    std::vector<const char*> argv{"stackrl"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "stackrl: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen_towers(o, out);
        if (train_stab->parsed()) return cmd_train_stab(o, out);
        if (eval_stab->parsed()) return cmd_eval_stab(o, out);
        if (experiment->parsed()) return cmd_run_experiment(o, out);
        if (targets->parsed()) return cmd_enumerate_targets(o, out);
        if (train_agent->parsed()) return cmd_train_agent(o, out);
        if (eval_agent->parsed()) return cmd_eval_agent(o, out);
        if (render->parsed()) return cmd_render(o, out);
        if (score->parsed()) return cmd_score_placements(o, out);
    } catch (const UsageError& e) {
        err << "stackrl: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "stackrl: " << e.what() << "\n";
        return kExitRuntime;
    }
    err << "stackrl: no subcommand\n";
    return kExitUsage;
}

}  // namespace stackrl::cli
