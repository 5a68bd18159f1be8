#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stackrl/geometry.hpp"
#include "stackrl/nn.hpp"
#include "stackrl/stability.hpp"
#include "stackrl/towergen.hpp"

namespace stackrl {

struct ClassifierConfig {
    int mask_width = 32;
    int mask_height = 32;
    // Scenes are rasterized on a raster_width x raster_height grid before
    // downscaling; cell_size is the nominal world size of one raster cell.
    int raster_width = 64;
    int raster_height = 64;
    double cell_size = 0.125;
    std::vector<int> hidden{256, 64};
    int epochs = 30;
    int batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    bool mirror_augment = true;  // also train on left-right mirrored masks
    std::uint64_t seed = 0;
};

void validate(const ClassifierConfig& cfg);

// Downscaled occupancy mask of a scene as a column vector (row-major, row 0 at
// the bottom). The raster is centered on the scene and grows its cell size
// when the scene would not fit.
Eigen::VectorXd scene_features(const Scene& scene, const ClassifierConfig& cfg);

struct TrainReport {
    std::vector<double> epoch_loss;  // mean BCE over each epoch
    double initial_loss = 0.0;       // over the train set before the first step
    double train_accuracy = 0.0;
};

struct TrainedClassifier {
    nn::Network net;
    TrainReport report;
};

TrainedClassifier train_classifier(std::span<const DatasetRecord> train, const ClassifierConfig& cfg);

double predict_stable(const nn::Network& net, const Scene& scene, const ClassifierConfig& cfg);

// p >= 0.5 predicts Stable.
double eval_classifier(const nn::Network& net, std::span<const DatasetRecord> test,
                       const ClassifierConfig& cfg);
double eval_features(const nn::Network& net, const Eigen::MatrixXd& features,
                     std::span<const StabilityLabel> labels);

enum class ExperimentMode { IntraGroup, CrossGroup, Generalization };

const char* to_string(ExperimentMode mode);
ExperimentMode parse_experiment_mode(const std::string& text);

struct ExperimentPlan {
    std::vector<SceneParams> train_groups;
    std::vector<SceneParams> test_groups;
    ExperimentMode mode = ExperimentMode::IntraGroup;
};

struct GroupData {
    std::vector<DatasetRecord> train;
    std::vector<DatasetRecord> test;
};

using GroupDatasets = std::map<SceneParams, GroupData>;

struct AccuracyRow {
    SceneParams group;
    double accuracy = 0.0;
    int test_size = 0;
};

struct ExperimentResult {
    ExperimentPlan plan;
    std::vector<AccuracyRow> rows;  // one per test group, in plan order
};

// Trains once on the union of the train groups' train halves and evaluates
// on each test group's test half.
ExperimentResult run_experiment(const ExperimentPlan& plan, const GroupDatasets& data,
                                const ClassifierConfig& cfg);

struct Candidate {
    double x_center = 0.0;
    Orientation orientation = Orientation::Horizontal;
    Block2D block;
    double predicted_p_stable = 0.0;
    StabilityLabel oracle_label = StabilityLabel::Stable;
};

struct CandidateBlockDims {
    double length = 3.0;
    double thickness = 1.0;
};

struct StackingSurface {
    double x_lo = 0.0;
    double x_hi = 0.0;
    double y = 0.0;
};

// Top face of the highest block (leftmost on ties).
StackingSurface stacking_surface(const Scene& scene);

// n_h horizontal then n_v vertical candidates; center_i = x_lo + (i+0.5)(x_hi-x_lo)/k.
std::vector<Candidate> enumerate_candidates(const Scene& scene, int n_h, int n_v,
                                            const CandidateBlockDims& dims = {});

struct PlacementReport {
    std::vector<Candidate> candidates;
    double prediction_accuracy = 0.0;
};

PlacementReport score_placements(const nn::Network& net, const Scene& scene,
                                 std::span<const Candidate> candidates, const ClassifierConfig& cfg);

// Successful placements over the placements the oracle marks stable.
double manipulation_success_rate(int successes, int all_stable);

}  // namespace stackrl
