#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stackrl/agent.hpp"
#include "stackrl/geometry.hpp"
#include "stackrl/shaping.hpp"
#include "stackrl/stabnet.hpp"
#include "stackrl/towergen.hpp"

namespace stackrl::io {

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& content);

// One JSON object per line:
// {"id","blocks":[{"x","y","w","h"}],"label":"stable"|"unstable","params":{"n","size"},"seed"}
std::string record_to_json(const DatasetRecord& record);
DatasetRecord record_from_json(const std::string& line);

void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> read_dataset(std::istream& in);
void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> load_dataset(const std::string& path);

// A scene document is {"blocks":[...]} or a full dataset record.
Scene scene_from_json(const std::string& document);
std::string scene_to_json(const Scene& scene);

// Binary P5 with maxval 255, top grid row first.
std::string encode_pgm(const GridMap& map);
GridMap decode_pgm(const std::string& bytes);
void export_pgm(const GridMap& map, const std::string& path);
GridMap import_pgm(const std::string& path);

// '#' for set cells, '.' otherwise, top grid row first, one line per row.
std::string render_ascii(const GridMap& map);
// Background '#', moving block '@', unfilled goal cells 'o'.
std::string render_ascii(const StackState& state);

struct EnvSection {
    std::string kind = "stack";  // stack | grid
    int width = 20;
    int height = 15;
    int pool_blocks = 2;
    int grid_size = 5;
    int max_episode_steps = 400;
};

struct RunConfig {
    TowerGenConfig towergen;
    ClassifierConfig classifier;
    EnvSection env;
    AgentConfig agent;
    ShapingMode shaping = ShapingMode::None;
    std::uint64_t seed = 0;
};

// Missing keys keep their defaults; unknown keys raise ParseError.
RunConfig parse_run_config(const std::string& document);
std::string run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::string& path);

std::string stacking_metrics_csv(const std::vector<EpochMetrics>& epochs);
std::string gridworld_metrics_csv(const std::vector<EpochMetrics>& epochs);
std::string accuracy_csv(const ExperimentResult& result);

struct TraceStep {
    std::uint64_t state_hash = 0;
    int action = 0;
    double reward = 0.0;
    std::string event;
};

std::string trace_to_jsonl(const std::vector<TraceStep>& steps);

}  // namespace stackrl::io
