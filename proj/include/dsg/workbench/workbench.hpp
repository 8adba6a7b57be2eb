#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>

#include "dsg/learn/logistic.hpp"
#include "dsg/pipeline/pipeline.hpp"

namespace dsg::workbench {

/// Gaussian-blob classification task: k isotropic class clouds in d
/// dimensions, means on a common sphere whose radius is searched so a linear
/// classifier lands in the target base-accuracy band.
struct SyntheticTask {
    std::size_t k = 0;
    std::size_t d = 0;
    Matrix class_means; // k x d
    double class_cov_scale = 1.0;
    std::uint64_t seed = 0;
};

struct TaskConfig {
    std::size_t n_per_split = 2000;
    double accuracy_lo = 0.70;
    double accuracy_hi = 0.90;
    std::size_t radius_steps = 20;
    std::size_t search_max_iter = 300;     // classifier budget inside the radius search
    // gentle at the shell's feature scale; weights grow as the scale shrinks
    double classifier_l2 = 1e-5;
    std::size_t classifier_max_iter = 2000;
};

struct RawSplit {
    Matrix features;
    std::vector<ClassId> labels;
};

struct SyntheticTaskBundle {
    SyntheticTask task;
    RawSplit train, val, test;
};

SyntheticTaskBundle gen_task(std::uint64_t seed, std::size_t k, std::size_t d,
                             const TaskConfig& cfg = {});

/// The reference classifier plus the three splits as full Datasets
/// (features = raw inputs, probabilities = classifier outputs).
struct ReferenceClassifier {
    learn::LinearModel model;
    Dataset train;
    Dataset val;
    Dataset test;
};

ReferenceClassifier train_reference_classifier(const SyntheticTaskBundle& bundle,
                                               const TaskConfig& cfg = {});

struct ShiftFamily {
    enum class Kind {
        feature_noise,
        mean_translation,
        covariance_scale,
        label_subset,
        grid_rotation_confound
    };
    Kind kind = Kind::feature_noise;
    std::vector<double> intensity_grid; // non-negative, increasing
    std::uint64_t seed = 0;             // fixes directions / class subsets / rotation draws
};

const char* family_name(ShiftFamily::Kind kind);

/// Sample a labeled target dataset of size n from the shifted generative
/// process and run it through the reference classifier. Intensity 0
/// reproduces the base distribution.
Dataset apply_shift(const SyntheticTask& task, const learn::LinearModel& model,
                    const ShiftFamily& family, double intensity, std::size_t n,
                    std::uint64_t seed, const std::string& name);

/// Per-confidence-bin recalibration record.
struct CalibratedOracle {
    std::vector<double> bin_edges;      // bins + 1 edges over [0, 1]
    std::vector<double> bin_confidence; // assigned confidence = empirical bin accuracy
    std::vector<std::size_t> bin_count;
    std::size_t n = 0;
};

/// Rewrite each row so its max probability equals its confidence-bin's
/// empirical accuracy (other entries rescaled proportionally; argmax kept).
/// The result is an approximately perfectly calibrated dataset.
std::pair<CalibratedOracle, Dataset> make_calibrated_oracle(const DatasetView& view,
                                                            std::size_t bins);

struct DemoConfig {
    std::size_t k = 10;
    std::size_t d = 16; // must be a perfect square for the rotation method
    TaskConfig task;
    std::size_t target_n = 1000;
    std::vector<double> noise_grid = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
    std::size_t noise_seeds = 3;
    std::vector<double> translation_grid = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    std::vector<double> covscale_grid = {0.5, 1.0, 2.0, 3.0, 4.0, 6.0};
    std::vector<double> subset_grid = {0.1, 0.2, 0.3, 0.4};
    std::vector<std::string> methods; // empty = all
    pipeline::FitConfig fit;
};

struct DemoResult {
    SyntheticTask task;
    double base_accuracy = 0.0;
    std::vector<io::LoadedDataset> datasets; // base + every target
    pipeline::ProtocolResult protocol;
    // method -> group ("all" plus one per validation family) -> report
    std::map<std::string, std::map<std::string, pipeline::EvaluationReport>> reports;
    std::string table;
};

/// Build a task, calibrate on the feature-noise grid, validate on the
/// structurally different families, and tabulate MAE (std) per method.
DemoResult run_demo(std::uint64_t seed, const DemoConfig& cfg = {});

/// Replayable artifacts: manifest + tensors for every dataset, distance and
/// evaluation CSVs, and the summary table. The same data re-enters through
/// the manifest loader, so CLI and programmatic runs agree.
void write_demo_artifacts(const DemoResult& demo, const std::filesystem::path& out_dir);

} // namespace dsg::workbench
