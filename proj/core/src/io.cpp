#include "stackrl/io.hpp"

#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "stackrl/errors.hpp"

namespace stackrl::io {

using nlohmann::ordered_json;

namespace {

ordered_json parse_json(const std::string& text, const std::string& what) {
    try {
        return ordered_json::parse(text);
    } catch (const ordered_json::exception& e) {
        throw ParseError(what + ": " + e.what());
    }
}

void check_keys(const ordered_json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ParseError("'" + section + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ParseError("unknown key '" + key + "' in '" + section + "'");
    }
}

template <typename T>
void read_opt(const ordered_json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const ordered_json::exception& e) {
        throw ParseError(std::string("bad value for '") + key + "': " + e.what());
    }
}

ordered_json block_json(const Block2D& b) {
    return ordered_json{{"x", b.x_center}, {"y", b.y_bottom}, {"w", b.width}, {"h", b.height}};
}

std::vector<Block2D> blocks_from(const ordered_json& arr) {
    if (!arr.is_array()) throw ParseError("'blocks' must be an array");
    std::vector<Block2D> blocks;
    for (const auto& b : arr) {
        check_keys(b, "block", {"x", "y", "w", "h"});
        try {
            blocks.push_back(Block2D{b.at("x").get<double>(), b.at("y").get<double>(),
                                     b.at("w").get<double>(), b.at("h").get<double>()});
        } catch (const ordered_json::exception& e) {
            throw ParseError(std::string("bad block: ") + e.what());
        }
    }
    return blocks;
}

}  // namespace

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::string record_to_json(const DatasetRecord& record) {
    ordered_json blocks = ordered_json::array();
    for (const auto& b : record.scene.blocks) blocks.push_back(block_json(b));
    ordered_json j;
    j["id"] = record.id;
    j["blocks"] = std::move(blocks);
    j["label"] = to_string(record.label);
    j["params"] = ordered_json{{"n", record.params.n_blocks},
                               {"size", record.params.size_mode == SizeMode::Uni ? "uni" : "nonuni"}};
    j["seed"] = record.seed;
    return j.dump();
}

DatasetRecord record_from_json(const std::string& line) {
    const ordered_json j = parse_json(line, "dataset record");
    check_keys(j, "record", {"id", "blocks", "label", "params", "seed"});
    for (const char* key : {"id", "blocks", "label", "params", "seed"}) {
        if (!j.contains(key)) throw ParseError(std::string("record lacks '") + key + "'");
    }
    DatasetRecord rec;
    try {
        rec.id = j.at("id").get<std::int64_t>();
        rec.seed = j.at("seed").get<std::uint64_t>();
        const std::string label = j.at("label").get<std::string>();
        if (label == "stable") {
            rec.label = StabilityLabel::Stable;
        } else if (label == "unstable") {
            rec.label = StabilityLabel::Unstable;
        } else {
            throw ParseError("label must be 'stable' or 'unstable', got '" + label + "'");
        }
        const auto& p = j.at("params");
        check_keys(p, "params", {"n", "size"});
        rec.params.n_blocks = p.at("n").get<int>();
        const std::string size = p.at("size").get<std::string>();
        if (size == "uni") {
            rec.params.size_mode = SizeMode::Uni;
        } else if (size == "nonuni") {
            rec.params.size_mode = SizeMode::NonUni;
        } else {
            throw ParseError("size must be 'uni' or 'nonuni', got '" + size + "'");
        }
    } catch (const ordered_json::exception& e) {
        throw ParseError(std::string("bad record: ") + e.what());
    }
    rec.scene.blocks = blocks_from(j.at("blocks"));
    rec.scene.params = rec.params;
    return rec;
}

void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records) {
    for (const auto& r : records) out << record_to_json(r) << '\n';
}

std::vector<DatasetRecord> read_dataset(std::istream& in) {
    std::vector<DatasetRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            records.push_back(record_from_json(line));
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records) {
    std::ostringstream ss;
    write_dataset(ss, records);
    write_text(path, ss.str());
}

std::vector<DatasetRecord> load_dataset(const std::string& path) {
    std::istringstream ss(read_text(path));
    return read_dataset(ss);
}

Scene scene_from_json(const std::string& document) {
    const ordered_json j = parse_json(document, "scene");
    if (j.is_object() && j.contains("label")) return record_from_json(document).scene;
    check_keys(j, "scene", {"blocks"});
    Scene scene;
    if (j.contains("blocks")) scene.blocks = blocks_from(j.at("blocks"));
    return scene;
}

std::string scene_to_json(const Scene& scene) {
    ordered_json blocks = ordered_json::array();
    for (const auto& b : scene.blocks) blocks.push_back(block_json(b));
    return ordered_json{{"blocks", blocks}}.dump();
}

std::string encode_pgm(const GridMap& map) {
    std::string out = "P5\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n255\n";
    out.reserve(out.size() + map.cell_count());
    for (int r = map.height() - 1; r >= 0; --r) {
        for (int c = 0; c < map.width(); ++c) out.push_back(map.at(c, r) ? '\xff' : '\0');
    }
    return out;
}

GridMap decode_pgm(const std::string& bytes) {
    std::istringstream in(bytes);
    std::string magic;
    int w = 0;
    int h = 0;
    int maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (!in || magic != "P5" || w < 0 || h < 0 || maxval != 255) throw ParseError("not a P5 PGM with maxval 255");
    in.get();  // single whitespace byte after the header
    const auto offset = static_cast<std::size_t>(in.tellg());
    if (bytes.size() - offset != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
        throw ParseError("PGM payload size does not match its header");
    }
    GridMap map(w, h);
    std::size_t k = offset;
    for (int r = h - 1; r >= 0; --r) {
        for (int c = 0; c < w; ++c) map.set(c, r, bytes[k++] != '\0');
    }
    return map;
}

void export_pgm(const GridMap& map, const std::string& path) { write_text(path, encode_pgm(map)); }

GridMap import_pgm(const std::string& path) { return decode_pgm(read_text(path)); }

std::string render_ascii(const GridMap& map) {
    std::string out;
    out.reserve(static_cast<std::size_t>(map.width() + 1) * static_cast<std::size_t>(map.height()));
    for (int r = map.height() - 1; r >= 0; --r) {
        for (int c = 0; c < map.width(); ++c) out.push_back(map.at(c, r) ? '#' : '.');
        out.push_back('\n');
    }
    return out;
}

std::string render_ascii(const StackState& state) {
    const GridMap& bg = state.background;
    std::string out;
    for (int r = bg.height() - 1; r >= 0; --r) {
        for (int c = 0; c < bg.width(); ++c) {
            char ch = '.';
            if (state.goal.at(c, r)) ch = 'o';
            if (bg.at(c, r)) ch = '#';
            if (state.foreground.at(c, r)) ch = '@';
            out.push_back(ch);
        }
        out.push_back('\n');
    }
    return out;
}

RunConfig parse_run_config(const std::string& document) {
    const ordered_json j = parse_json(document, "run config");
    check_keys(j, "config", {"towergen", "classifier", "env", "agent", "shaping", "seed"});
    RunConfig cfg;
    read_opt(j, "seed", cfg.seed);

    if (j.contains("towergen")) {
        const auto& t = j.at("towergen");
        check_keys(t, "towergen", {"sigma", "delta", "base_width", "base_height", "max_retries",
                                   "target_stable_fraction"});
        read_opt(t, "sigma", cfg.towergen.sigma);
        read_opt(t, "delta", cfg.towergen.delta);
        read_opt(t, "base_width", cfg.towergen.base_width);
        read_opt(t, "base_height", cfg.towergen.base_height);
        read_opt(t, "max_retries", cfg.towergen.max_retries);
        if (t.contains("target_stable_fraction") && !t.at("target_stable_fraction").is_null()) {
            double f = 0.0;
            read_opt(t, "target_stable_fraction", f);
            cfg.towergen.target_stable_fraction = f;
        }
        validate(cfg.towergen);
    }

    if (j.contains("classifier")) {
        const auto& c = j.at("classifier");
        check_keys(c, "classifier", {"mask_w", "mask_h", "raster_w", "raster_h", "cell_size", "hidden",
                                     "epochs", "batch_size", "lr", "momentum", "mirror_augment"});
        read_opt(c, "mask_w", cfg.classifier.mask_width);
        read_opt(c, "mask_h", cfg.classifier.mask_height);
        read_opt(c, "raster_w", cfg.classifier.raster_width);
        read_opt(c, "raster_h", cfg.classifier.raster_height);
        read_opt(c, "cell_size", cfg.classifier.cell_size);
        read_opt(c, "hidden", cfg.classifier.hidden);
        read_opt(c, "epochs", cfg.classifier.epochs);
        read_opt(c, "batch_size", cfg.classifier.batch_size);
        read_opt(c, "lr", cfg.classifier.learning_rate);
        read_opt(c, "momentum", cfg.classifier.momentum);
        read_opt(c, "mirror_augment", cfg.classifier.mirror_augment);
        validate(cfg.classifier);
    }

    if (j.contains("env")) {
        const auto& e = j.at("env");
        check_keys(e, "env", {"kind", "width", "height", "pool_blocks", "grid_size", "max_episode_steps"});
        read_opt(e, "kind", cfg.env.kind);
        read_opt(e, "width", cfg.env.width);
        read_opt(e, "height", cfg.env.height);
        read_opt(e, "pool_blocks", cfg.env.pool_blocks);
        read_opt(e, "grid_size", cfg.env.grid_size);
        read_opt(e, "max_episode_steps", cfg.env.max_episode_steps);
        if (cfg.env.kind != "stack" && cfg.env.kind != "grid") {
            throw ParseError("env.kind must be 'stack' or 'grid'");
        }
    }
    if (cfg.env.kind == "grid") {
        const AgentConfig base = AgentConfig::gridworld(cfg.env.grid_size);
        cfg.agent = base;
    } else {
        cfg.agent = AgentConfig::stacking();
    }

    if (j.contains("agent")) {
        const auto& a = j.at("agent");
        check_keys(a, "agent", {"gamma", "batch_size", "target_update_every", "hidden", "epochs",
                                "epoch_steps", "test_steps", "buffer_capacity", "goal_conditioned", "optimizer",
                                "lr", "momentum", "anneal_epochs", "epsilon_start", "epsilon_end",
                                "eval_epsilon", "learning_starts", "summed_state",
                                "shaping_includes_moving_block"});
        read_opt(a, "gamma", cfg.agent.gamma);
        read_opt(a, "batch_size", cfg.agent.batch_size);
        read_opt(a, "target_update_every", cfg.agent.target_update_every);
        read_opt(a, "hidden", cfg.agent.hidden);
        read_opt(a, "epochs", cfg.agent.epochs);
        read_opt(a, "epoch_steps", cfg.agent.epoch_steps);
        read_opt(a, "test_steps", cfg.agent.test_steps);
        read_opt(a, "buffer_capacity", cfg.agent.buffer_capacity);
        read_opt(a, "goal_conditioned", cfg.agent.goal_conditioned);
        if (a.contains("optimizer")) {
            std::string kind;
            read_opt(a, "optimizer", kind);
            try {
                cfg.agent.optimizer = parse_optimizer_kind(kind);
            } catch (const Error& e) {
                throw ParseError(e.what());
            }
        }
        read_opt(a, "lr", cfg.agent.learning_rate);
        read_opt(a, "momentum", cfg.agent.momentum);
        read_opt(a, "anneal_epochs", cfg.agent.anneal_epochs);
        read_opt(a, "epsilon_start", cfg.agent.epsilon_start);
        read_opt(a, "epsilon_end", cfg.agent.epsilon_end);
        read_opt(a, "eval_epsilon", cfg.agent.eval_epsilon);
        read_opt(a, "learning_starts", cfg.agent.learning_starts);
        read_opt(a, "summed_state", cfg.agent.summed_state);
        read_opt(a, "shaping_includes_moving_block", cfg.agent.shaping_includes_moving_block);
    }
    validate(cfg.agent);

    if (j.contains("shaping")) {
        std::string mode;
        read_opt(j, "shaping", mode);
        try {
            cfg.shaping = parse_shaping_mode(mode);
        } catch (const Error& e) {
            throw ParseError(e.what());
        }
    }
    cfg.classifier.seed = cfg.seed;
    cfg.towergen.seed = cfg.seed;
    cfg.agent.seed = cfg.seed;
    return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
    ordered_json j;
    ordered_json t{{"sigma", cfg.towergen.sigma},
                   {"delta", cfg.towergen.delta},
                   {"base_width", cfg.towergen.base_width},
                   {"base_height", cfg.towergen.base_height},
                   {"max_retries", cfg.towergen.max_retries}};
    t["target_stable_fraction"] =
        cfg.towergen.target_stable_fraction ? ordered_json(*cfg.towergen.target_stable_fraction) : ordered_json();
    j["towergen"] = t;
    const auto& c = cfg.classifier;
    j["classifier"] = ordered_json{{"mask_w", c.mask_width},   {"mask_h", c.mask_height},
                                   {"raster_w", c.raster_width}, {"raster_h", c.raster_height},
                                   {"cell_size", c.cell_size},   {"hidden", c.hidden},
                                   {"epochs", c.epochs},         {"batch_size", c.batch_size},
                                   {"lr", c.learning_rate},      {"momentum", c.momentum},
                                   {"mirror_augment", c.mirror_augment}};
    j["env"] = ordered_json{{"kind", cfg.env.kind},
                            {"width", cfg.env.width},
                            {"height", cfg.env.height},
                            {"pool_blocks", cfg.env.pool_blocks},
                            {"grid_size", cfg.env.grid_size},
                            {"max_episode_steps", cfg.env.max_episode_steps}};
    const auto& a = cfg.agent;
    j["agent"] = ordered_json{{"gamma", a.gamma},
                              {"batch_size", a.batch_size},
                              {"target_update_every", a.target_update_every},
                              {"hidden", a.hidden},
                              {"epochs", a.epochs},
                              {"epoch_steps", a.epoch_steps},
                              {"test_steps", a.test_steps},
                              {"buffer_capacity", a.buffer_capacity},
                              {"goal_conditioned", a.goal_conditioned},
                              {"optimizer", to_string(a.optimizer)},
                              {"lr", a.learning_rate},
                              {"momentum", a.momentum},
                              {"anneal_epochs", a.anneal_epochs},
                              {"epsilon_start", a.epsilon_start},
                              {"epsilon_end", a.epsilon_end},
                              {"eval_epsilon", a.eval_epsilon},
                              {"learning_starts", a.learning_starts},
                              {"summed_state", a.summed_state},
                              {"shaping_includes_moving_block", a.shaping_includes_moving_block}};
    j["shaping"] = to_string(cfg.shaping);
    j["seed"] = cfg.seed;
    return j.dump(2);
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_text(path)); }

namespace {

std::string fixed(double v) {
    std::ostringstream ss;
    ss << std::setprecision(6) << std::fixed << v;
    return ss.str();
}

}  // namespace

std::string stacking_metrics_csv(const std::vector<EpochMetrics>& epochs) {
    std::string out = "epoch,epsilon,train_return_mean,test_or,test_sr\n";
    for (const auto& m : epochs) {
        out += std::to_string(m.epoch) + "," + fixed(m.epsilon) + "," + fixed(m.train_return_mean) + "," +
               fixed(m.test.overlap) + "," + fixed(m.test.success_rate) + "\n";
    }
    return out;
}

std::string gridworld_metrics_csv(const std::vector<EpochMetrics>& epochs) {
    std::string out = "epoch,epsilon,success_ratio\n";
    for (const auto& m : epochs) {
        out += std::to_string(m.epoch) + "," + fixed(m.epsilon) + "," + fixed(m.test.success_ratio) + "\n";
    }
    return out;
}

std::string accuracy_csv(const ExperimentResult& result) {
    std::string out = "plan,test_group,accuracy,test_size\n";
    for (const auto& row : result.rows) {
        out += std::string(to_string(result.plan.mode)) + "," + to_string(row.group) + "," +
               fixed(row.accuracy) + "," + std::to_string(row.test_size) + "\n";
    }
    return out;
}

std::string trace_to_jsonl(const std::vector<TraceStep>& steps) {
    std::string out;
    for (const auto& s : steps) {
        out += ordered_json{{"state", s.state_hash}, {"action", s.action}, {"reward", s.reward}, {"event", s.event}}
                   .dump();
        out += '\n';
    }
    return out;
}

}  // namespace stackrl::io
