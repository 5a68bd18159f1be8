#include "stackrl/stabnet.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "stackrl/errors.hpp"
#include "stackrl/seeding.hpp"

namespace stackrl {

namespace {

double label_target(StabilityLabel label) { return label == StabilityLabel::Stable ? 1.0 : 0.0; }

Eigen::MatrixXd feature_matrix(std::span<const DatasetRecord> records, const ClassifierConfig& cfg) {
    const int dim = cfg.mask_width * cfg.mask_height;
    Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(records.size()));
    for (std::size_t j = 0; j < records.size(); ++j) {
        x.col(static_cast<Eigen::Index>(j)) = scene_features(records[j].scene, cfg);
    }
    return x;
}

Eigen::MatrixXd mirrored(const Eigen::MatrixXd& features, int width, int height) {
    Eigen::MatrixXd out(features.rows(), features.cols());
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            out.row(r * width + c) = features.row(r * width + (width - 1 - c));
        }
    }
    return out;
}

}  // namespace

void validate(const ClassifierConfig& cfg) {
    if (cfg.mask_width < 1 || cfg.mask_height < 1) throw InvalidArgument("mask dims must be >= 1");
    if (cfg.raster_width < cfg.mask_width || cfg.raster_height < cfg.mask_height) {
        throw InvalidArgument("raster must be at least as large as the mask");
    }
    if (!(cfg.cell_size > 0.0)) throw InvalidArgument("cell_size must be positive");
    if (cfg.epochs < 0 || cfg.batch_size < 1) throw InvalidArgument("bad classifier schedule");
    if (!(cfg.learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
    for (int h : cfg.hidden) {
        if (h < 1) throw InvalidArgument("hidden dims must be >= 1");
    }
}

Eigen::VectorXd scene_features(const Scene& scene, const ClassifierConfig& cfg) {
    const double cell = fitting_cell_size(scene, cfg.raster_width, cfg.raster_height, cfg.cell_size);
    const GridMap raster = rasterize_scene(scene, cfg.raster_width, cfg.raster_height, cell);
    const Mask mask = downscale_mask(raster, cfg.mask_width, cfg.mask_height);
    return Eigen::Map<const Eigen::VectorXd>(mask.values.data(), static_cast<Eigen::Index>(mask.values.size()));
}

TrainedClassifier train_classifier(std::span<const DatasetRecord> train, const ClassifierConfig& cfg) {
    if (train.empty()) throw EmptyDataset("no training records");
    validate(cfg);

    Eigen::MatrixXd x = feature_matrix(train, cfg);
    Eigen::RowVectorXd y(x.cols());
    for (std::size_t j = 0; j < train.size(); ++j) y(static_cast<Eigen::Index>(j)) = label_target(train[j].label);
    const Eigen::MatrixXd x_plain = x;
    const Eigen::RowVectorXd y_plain = y;
    if (cfg.mirror_augment) {
        Eigen::MatrixXd both(x.rows(), 2 * x.cols());
        both << x, mirrored(x, cfg.mask_width, cfg.mask_height);
        x = std::move(both);
        Eigen::RowVectorXd yy(2 * y.size());
        yy << y, y;
        y = std::move(yy);
    }

    const auto specs = nn::mlp_specs(cfg.mask_width * cfg.mask_height, cfg.hidden, 1,
                                     nn::Activation::ReLU, nn::Activation::Sigmoid);
    TrainedClassifier out;
    out.net = nn::net_init(specs, derive_seed(cfg.seed, 1));
    nn::SgdMomentum opt{cfg.learning_rate, cfg.momentum, {}};
    std::mt19937_64 rng(derive_seed(cfg.seed, 2));

    out.report.initial_loss =
        nn::loss_value(nn::Loss::BinaryCrossEntropy, nn::forward(out.net, x_plain), y_plain);

    const auto n = static_cast<std::size_t>(x.cols());
    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t len = std::min(batch, n - start);
            Eigen::MatrixXd xb(x.rows(), static_cast<Eigen::Index>(len));
            Eigen::MatrixXd yb(1, static_cast<Eigen::Index>(len));
            for (std::size_t k = 0; k < len; ++k) {
                xb.col(static_cast<Eigen::Index>(k)) = x.col(order[start + k]);
                yb(0, static_cast<Eigen::Index>(k)) = y(order[start + k]);
            }
            nn::ForwardCache cache;
            const Eigen::MatrixXd p = nn::forward(out.net, xb, &cache);
            loss_sum += nn::loss_value(nn::Loss::BinaryCrossEntropy, p, yb) * static_cast<double>(len);
            nn::optimizer_step(out.net, nn::backward(out.net, cache, nn::Loss::BinaryCrossEntropy, yb), opt);
        }
        out.report.epoch_loss.push_back(loss_sum / static_cast<double>(n));
    }

    std::vector<StabilityLabel> labels;
    labels.reserve(train.size());
    for (const auto& r : train) labels.push_back(r.label);
    out.report.train_accuracy = eval_features(out.net, x_plain, labels);
    return out;
}

double predict_stable(const nn::Network& net, const Scene& scene, const ClassifierConfig& cfg) {
    return nn::forward(net, scene_features(scene, cfg))(0);
}

double eval_features(const nn::Network& net, const Eigen::MatrixXd& features,
                     std::span<const StabilityLabel> labels) {
    if (labels.empty()) throw EmptyDataset("no test records");
    if (static_cast<std::size_t>(features.cols()) != labels.size()) {
        throw ShapeMismatch("feature columns do not match labels");
    }
    const Eigen::MatrixXd p = nn::forward(net, features);
    int correct = 0;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const bool predicted_stable = p(0, static_cast<Eigen::Index>(j)) >= 0.5;
        if (predicted_stable == (labels[j] == StabilityLabel::Stable)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double eval_classifier(const nn::Network& net, std::span<const DatasetRecord> test,
                       const ClassifierConfig& cfg) {
    if (test.empty()) throw EmptyDataset("no test records");
    std::vector<StabilityLabel> labels;
    labels.reserve(test.size());
    for (const auto& r : test) labels.push_back(r.label);
    return eval_features(net, feature_matrix(test, cfg), labels);
}

const char* to_string(ExperimentMode mode) {
    switch (mode) {
        case ExperimentMode::IntraGroup: return "intra";
        case ExperimentMode::CrossGroup: return "cross";
        case ExperimentMode::Generalization: return "general";
    }
    return "?";
}

ExperimentMode parse_experiment_mode(const std::string& text) {
    if (text == "intra") return ExperimentMode::IntraGroup;
    if (text == "cross") return ExperimentMode::CrossGroup;
    if (text == "general") return ExperimentMode::Generalization;
    throw InvalidArgument("unknown experiment plan '" + text + "'");
}

ExperimentResult run_experiment(const ExperimentPlan& plan, const GroupDatasets& data,
                                const ClassifierConfig& cfg) {
    if (plan.train_groups.empty() || plan.test_groups.empty()) {
        throw InvalidArgument("experiment plan needs train and test groups");
    }
    auto find = [&](const SceneParams& g) -> const GroupData& {
        const auto it = data.find(g);
        if (it == data.end()) throw MissingGroup("no dataset for group " + to_string(g));
        return it->second;
    };
    for (const auto& g : plan.test_groups) find(g);

    std::vector<DatasetRecord> train;
    for (const auto& g : plan.train_groups) {
        const auto& part = find(g).train;
        train.insert(train.end(), part.begin(), part.end());
    }
    const TrainedClassifier trained = train_classifier(train, cfg);

    ExperimentResult result;
    result.plan = plan;
    for (const auto& g : plan.test_groups) {
        const auto& test = find(g).test;
        result.rows.push_back(AccuracyRow{g, eval_classifier(trained.net, test, cfg),
                                          static_cast<int>(test.size())});
    }
    return result;
}

StackingSurface stacking_surface(const Scene& scene) {
    if (scene.empty()) throw EmptyScene("no stacking surface in an empty scene");
    const Block2D* top = &scene.blocks.front();
    for (const auto& b : scene.blocks) {
        if (b.top() > top->top() || (b.top() == top->top() && b.left() < top->left())) top = &b;
    }
    return StackingSurface{top->left(), top->right(), top->top()};
}

std::vector<Candidate> enumerate_candidates(const Scene& scene, int n_h, int n_v,
                                            const CandidateBlockDims& dims) {
    if (n_h < 0 || n_v < 0) throw InvalidArgument("candidate counts must be non-negative");
    if (!(dims.length > 0.0 && dims.thickness > 0.0)) throw InvalidArgument("bad candidate block dims");
    const StackingSurface s = stacking_surface(scene);

    std::vector<Candidate> out;
    auto emit = [&](int k, Orientation orientation) {
        const double w = orientation == Orientation::Horizontal ? dims.length : dims.thickness;
        const double h = orientation == Orientation::Horizontal ? dims.thickness : dims.length;
        for (int i = 0; i < k; ++i) {
            Candidate c;
            c.x_center = s.x_lo + (i + 0.5) * (s.x_hi - s.x_lo) / k;
            c.orientation = orientation;
            c.block = Block2D{c.x_center, s.y, w, h};
            out.push_back(c);
        }
    };
    emit(n_h, Orientation::Horizontal);
    emit(n_v, Orientation::Vertical);
    return out;
}

PlacementReport score_placements(const nn::Network& net, const Scene& scene,
                                 std::span<const Candidate> candidates, const ClassifierConfig& cfg) {
    if (candidates.empty()) throw InvalidArgument("no candidates to score");
    PlacementReport report;
    int correct = 0;
    for (Candidate c : candidates) {
        Scene composed = scene;
        composed.params.reset();
        composed.blocks.push_back(c.block);
        c.predicted_p_stable = predict_stable(net, composed, cfg);
        c.oracle_label = stability_label(composed);
        if ((c.predicted_p_stable >= 0.5) == (c.oracle_label == StabilityLabel::Stable)) ++correct;
        report.candidates.push_back(c);
    }
    report.prediction_accuracy = static_cast<double>(correct) / static_cast<double>(candidates.size());
    return report;
}

double manipulation_success_rate(int successes, int all_stable) {
    if (all_stable <= 0 || successes < 0 || successes > all_stable) {
        throw InvalidArgument("successes must be within [0, all_stable] and all_stable positive");
    }
    return static_cast<double>(successes) / static_cast<double>(all_stable);
}

}  // namespace stackrl
