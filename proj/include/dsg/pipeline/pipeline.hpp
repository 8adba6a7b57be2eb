#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsg/confidence/confidence.hpp"
#include "dsg/core/dataset.hpp"
#include "dsg/distances/discriminative.hpp"
#include "dsg/io/manifest.hpp"
#include "dsg/learn/regressors.hpp"

namespace dsg::pipeline {

/// Every supported accuracy-prediction method name.
const std::vector<std::string>& all_methods();

bool is_method(const std::string& name);

/// base_acc, ac, ac_tempscaling, and doc_feat estimate accuracy directly;
/// the rest feed a fitted gap regressor.
bool method_uses_regressor(const std::string& name);

/// Methods that need raw features (frechet, mmd, discriminator, rotation).
bool method_needs_features(const std::string& name);

struct MeasureConfig {
    std::uint64_t seed = 0;
    distances::LearnerConfig discriminator;
    distances::RotationConfig rotation;
    io::SplitSpec split;
    /// Temperature fitted once on the base dataset; filled by run_protocol
    /// (or lazily from the base when absent) when ac_tempscaling is measured.
    std::optional<confidence::Temperature> base_temperature;
};

/// Difference features of one (base, target) pair, plus the ground truth
/// needed for calibration and evaluation when the target is labeled.
struct ShiftMeasurement {
    std::string base_name;
    std::string target_name;
    std::string group;
    std::map<std::string, double> features; // method name -> scalar S
    double base_acc_on_intersection = 0.0;
    std::optional<double> true_target_acc;
    std::optional<double> true_gap;
};

ShiftMeasurement measure(const Dataset& base, const Dataset& target,
                         const std::vector<std::string>& methods, const MeasureConfig& cfg);

enum class RegressorKind { linear, mlp };

struct AccuracyPredictor {
    std::string method;
    RegressorKind kind = RegressorKind::linear;
    std::optional<learn::LinearRegressor> linear;
    std::optional<learn::MlpRegressor> mlp;
    std::optional<confidence::Temperature> fitted_temperature;

    bool has_regressor() const { return linear.has_value() || mlp.has_value(); }
};

struct FitConfig {
    RegressorKind kind = RegressorKind::linear;
    double ridge = 0.0;
    learn::MlpConfig mlp;
};

/// Fit the per-method gap regressor on labeled calibration measurements.
/// Regressor-free methods return a predictor that ignores the calibration
/// set (aside from carrying the fitted temperature through).
AccuracyPredictor fit_predictor(const std::vector<ShiftMeasurement>& cal,
                                const std::string& method, const FitConfig& cfg = {});

/// Predicted target accuracy in [0, 1].
double predict_accuracy(const AccuracyPredictor& p, const ShiftMeasurement& m);

struct EvaluationRow {
    std::string target;
    double true_acc = 0.0;
    double pred_acc = 0.0;
    double abs_err = 0.0;
};

struct EvaluationReport {
    std::vector<EvaluationRow> rows; // sorted by target name
    double mae = 0.0;
    double std_dev = 0.0; // population std of absolute errors
    std::string grouping;
};

EvaluationReport evaluate(const AccuracyPredictor& p, const std::vector<ShiftMeasurement>& val);

struct ProtocolResult {
    std::vector<ShiftMeasurement> calibration;
    std::vector<ShiftMeasurement> validation;
    std::map<std::string, AccuracyPredictor> predictors;
    std::map<std::string, EvaluationReport> reports;
};

/// The full protocol: measure every (base, target) pair, fit one predictor
/// per method on the calibration group, evaluate on the validation group.
/// Groups must be disjoint; the fitting path never sees validation labels.
ProtocolResult run_protocol(const std::vector<io::LoadedDataset>& datasets,
                            const std::string& base_name, const std::string& cal_group,
                            const std::string& val_group,
                            const std::vector<std::string>& methods, const MeasureConfig& mcfg,
                            const FitConfig& fcfg = {});

/// CSV with header base,target,method,value; rows sorted by (target, method).
std::string distances_csv(const std::vector<ShiftMeasurement>& measurements);

/// CSV with header target,true_acc,pred_acc,abs_err.
std::string evaluation_csv(const EvaluationReport& report);

/// Aligned method x group table of "MAE (std)" cells.
std::string summary_table(const std::map<std::string, std::map<std::string, EvaluationReport>>&
                              reports_by_method_then_group);

} // namespace dsg::pipeline
