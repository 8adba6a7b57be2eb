#include "dsg/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "dsg/distances/distances.hpp"
#include "dsg/rng.hpp"

namespace dsg::pipeline {

namespace {

const std::vector<std::string> kMethods = {
    "base_acc", "ac",  "ac_tempscaling", "doc_feat", "frechet", "disc_a_proxy",
    "disc_auc", "mmd", "rotation",       "doe",      "doc"};

const std::set<std::string> kRegressorFree = {"base_acc", "ac", "ac_tempscaling", "doc_feat"};

const std::set<std::string> kNeedsFeatures = {"frechet", "mmd", "disc_a_proxy", "disc_auc",
                                              "rotation"};

std::string format_value(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

} // namespace

const std::vector<std::string>& all_methods() { return kMethods; }

bool is_method(const std::string& name) {
    return std::find(kMethods.begin(), kMethods.end(), name) != kMethods.end();
}

bool method_uses_regressor(const std::string& name) { return !kRegressorFree.count(name); }

bool method_needs_features(const std::string& name) { return kNeedsFeatures.count(name) > 0; }

ShiftMeasurement measure(const Dataset& base, const Dataset& target,
                         const std::vector<std::string>& methods, const MeasureConfig& cfg) {
    for (const auto& m : methods)
        if (!is_method(m)) throw ConfigError("unknown method '" + m + "'");

    const LabelSpace common = intersect_labels(base, target);
    const DatasetView base_view = restrict(base, common);
    const DatasetView target_view = restrict(target, common);

    ShiftMeasurement out;
    out.base_name = base.name();
    out.target_name = target.name();
    out.base_acc_on_intersection = accuracy(base_view);
    if (target.has_labels()) {
        out.true_target_acc = accuracy(target_view);
        out.true_gap = out.base_acc_on_intersection - *out.true_target_acc;
    }

    auto requested = [&](const char* name) {
        return std::find(methods.begin(), methods.end(), name) != methods.end();
    };
    auto require_features = [&](const char* method) {
        if (!base.has_features() || !target.has_features())
            throw DataError(std::string(method) + " requires features");
    };

    if (requested("base_acc")) out.features["base_acc"] = out.base_acc_on_intersection;
    if (requested("ac"))
        out.features["ac"] = confidence::summarize(target_view).avg_confidence;

    if (requested("doc") || requested("doc_feat")) {
        const double v = confidence::summarize(base_view).avg_confidence -
                         confidence::summarize(target_view).avg_confidence;
        if (requested("doc")) out.features["doc"] = v;
        if (requested("doc_feat")) out.features["doc_feat"] = v;
    }
    if (requested("doe"))
        out.features["doe"] = confidence::summarize(base_view).avg_entropy -
                              confidence::summarize(target_view).avg_entropy;

    if (requested("ac_tempscaling")) {
        confidence::Temperature t;
        if (cfg.base_temperature) {
            t = *cfg.base_temperature;
        } else {
            if (!base.has_labels())
                throw DataError("ac_tempscaling requires a labeled base dataset");
            t = confidence::fit_temperature(restrict(base, base.prob_classes()));
        }
        const Dataset tempered = confidence::apply_temperature(target, t);
        out.features["ac_tempscaling"] =
            confidence::summarize(restrict(tempered, common)).avg_confidence;
    }

    // feature-space measures run on the label-restricted rows
    if (requested("frechet")) {
        require_features("frechet");
        out.features["frechet"] = distances::frechet(base_view.gather_features(),
                                                     target_view.gather_features());
    }
    if (requested("mmd")) {
        require_features("mmd");
        out.features["mmd"] =
            distances::mmd(base_view.gather_features(), target_view.gather_features());
    }
    if (requested("disc_a_proxy") || requested("disc_auc")) {
        require_features("discriminative distance");
        io::SplitSpec split = cfg.split;
        split.seed = derive_seed(cfg.seed, target.name());
        distances::LearnerConfig lcfg = cfg.discriminator;
        lcfg.seed = split.seed;
        const auto rep = distances::discriminative_distance(
            base_view.gather_features(), target_view.gather_features(), split, lcfg);
        if (requested("disc_a_proxy")) out.features["disc_a_proxy"] = rep.a_proxy;
        if (requested("disc_auc")) out.features["disc_auc"] = rep.auc;
    }
    if (requested("rotation")) {
        require_features("rotation");
        const Matrix base_f = base_view.gather_features();
        const Matrix target_f = target_view.gather_features();
        std::array<Matrix, 4> base_rot, target_rot;
        for (int r = 0; r < 4; ++r) {
            base_rot[r] = distances::rotate_grid_features(base_f, r);
            target_rot[r] = distances::rotate_grid_features(target_f, r);
        }
        distances::RotationConfig rcfg = cfg.rotation;
        rcfg.seed = derive_seed(cfg.seed ^ 0x726f746174ull, target.name());
        out.features["rotation"] = distances::rotation_score(base_rot, target_rot, rcfg).accuracy;
    }
    return out;
}

AccuracyPredictor fit_predictor(const std::vector<ShiftMeasurement>& cal,
                                const std::string& method, const FitConfig& cfg) {
    if (!is_method(method)) throw ConfigError("unknown method '" + method + "'");

    AccuracyPredictor p;
    p.method = method;
    p.kind = cfg.kind;
    if (!method_uses_regressor(method)) return p;

    if (cal.size() < 2) throw DataError("need >= 2 calibration shifts for method '" + method + "'");
    Matrix s(cal.size(), 1);
    std::vector<double> gaps(cal.size());
    for (std::size_t i = 0; i < cal.size(); ++i) {
        if (!cal[i].true_gap)
            throw DataError("unlabeled calibration measurement '" + cal[i].target_name + "'");
        auto it = cal[i].features.find(method);
        if (it == cal[i].features.end())
            throw DataError("measurement '" + cal[i].target_name + "' lacks feature '" + method +
                            "'");
        s(i, 0) = it->second;
        gaps[i] = *cal[i].true_gap;
    }
    if (cfg.kind == RegressorKind::linear) {
        p.linear = learn::fit_ols(s, gaps, cfg.ridge);
    } else {
        p.mlp = learn::fit_mlp_regressor(s, gaps, cfg.mlp);
    }
    return p;
}

double predict_accuracy(const AccuracyPredictor& p, const ShiftMeasurement& m) {
    auto feature = [&](const std::string& name) {
        auto it = m.features.find(name);
        if (it == m.features.end())
            throw DataError("measurement '" + m.target_name + "' lacks feature '" + name + "'");
        return it->second;
    };

    if (p.method == "base_acc") return std::clamp(m.base_acc_on_intersection, 0.0, 1.0);
    if (p.method == "ac") return std::clamp(feature("ac"), 0.0, 1.0);
    if (p.method == "ac_tempscaling") return std::clamp(feature("ac_tempscaling"), 0.0, 1.0);
    if (p.method == "doc_feat")
        return confidence::doc_feat_predict(m.base_acc_on_intersection, feature("doc_feat"));

    const double s = feature(p.method);
    double gap = 0.0;
    if (p.linear) {
        gap = p.linear->predict(std::span<const double>(&s, 1));
    } else if (p.mlp) {
        gap = p.mlp->predict(std::span<const double>(&s, 1));
    } else {
        throw DataError("predictor for '" + p.method + "' has no fitted regressor");
    }
    return std::clamp(m.base_acc_on_intersection - gap, 0.0, 1.0);
}

EvaluationReport evaluate(const AccuracyPredictor& p, const std::vector<ShiftMeasurement>& val) {
    if (val.empty()) throw DataError("empty validation set");
    EvaluationReport rep;
    for (const auto& m : val) {
        if (!m.true_target_acc)
            throw DataError("labels required: validation target '" + m.target_name +
                            "' is unlabeled");
        EvaluationRow row;
        row.target = m.target_name;
        row.true_acc = *m.true_target_acc;
        row.pred_acc = predict_accuracy(p, m);
        row.abs_err = std::abs(row.pred_acc - row.true_acc);
        rep.rows.push_back(std::move(row));
    }
    std::sort(rep.rows.begin(), rep.rows.end(),
              [](const EvaluationRow& a, const EvaluationRow& b) { return a.target < b.target; });

    double sum = 0.0;
    for (const auto& r : rep.rows) sum += r.abs_err;
    rep.mae = sum / static_cast<double>(rep.rows.size());
    double var = 0.0;
    for (const auto& r : rep.rows) var += (r.abs_err - rep.mae) * (r.abs_err - rep.mae);
    rep.std_dev = std::sqrt(var / static_cast<double>(rep.rows.size()));
    rep.grouping = val.front().group;
    for (const auto& m : val)
        if (m.group != rep.grouping) rep.grouping = "";
    return rep;
}

ProtocolResult run_protocol(const std::vector<io::LoadedDataset>& datasets,
                            const std::string& base_name, const std::string& cal_group,
                            const std::string& val_group,
                            const std::vector<std::string>& methods, const MeasureConfig& mcfg,
                            const FitConfig& fcfg) {
    if (cal_group == val_group) throw ConfigError("calibration/validation leakage");

    const Dataset* base = nullptr;
    for (const auto& d : datasets)
        if (d.dataset.name() == base_name) base = &d.dataset;
    if (!base) throw DataError("base dataset '" + base_name + "' not found");
    if (!base->has_labels()) throw DataError("labels required: base dataset is unlabeled");

    std::vector<const io::LoadedDataset*> cal, val;
    for (const auto& d : datasets) {
        if (d.dataset.name() == base_name) continue;
        if (d.group == cal_group) cal.push_back(&d);
        if (d.group == val_group) val.push_back(&d);
    }
    auto by_name = [](const io::LoadedDataset* a, const io::LoadedDataset* b) {
        return a->dataset.name() < b->dataset.name();
    };
    std::sort(cal.begin(), cal.end(), by_name);
    std::sort(val.begin(), val.end(), by_name);

    MeasureConfig cfg = mcfg;
    const bool wants_temp =
        std::find(methods.begin(), methods.end(), "ac_tempscaling") != methods.end();
    if (wants_temp && !cfg.base_temperature)
        cfg.base_temperature = confidence::fit_temperature(restrict(*base, base->prob_classes()));

    ProtocolResult result;
    for (const auto* d : cal) {
        ShiftMeasurement m = measure(*base, d->dataset, methods, cfg);
        m.group = d->group;
        result.calibration.push_back(std::move(m));
    }
    for (const auto* d : val) {
        ShiftMeasurement m = measure(*base, d->dataset, methods, cfg);
        m.group = d->group;
        result.validation.push_back(std::move(m));
    }

    for (const auto& method : methods) {
        AccuracyPredictor p = fit_predictor(result.calibration, method, fcfg);
        p.fitted_temperature = cfg.base_temperature;
        result.reports[method] = evaluate(p, result.validation);
        result.predictors[method] = std::move(p);
    }
    return result;
}

std::string distances_csv(const std::vector<ShiftMeasurement>& measurements) {
    std::vector<const ShiftMeasurement*> sorted;
    for (const auto& m : measurements) sorted.push_back(&m);
    std::sort(sorted.begin(), sorted.end(),
              [](const ShiftMeasurement* a, const ShiftMeasurement* b) {
                  return a->target_name < b->target_name;
              });
    std::string out = "base,target,method,value\n";
    for (const auto* m : sorted)
        for (const auto& [method, value] : m->features)
            out += m->base_name + "," + m->target_name + "," + method + "," +
                   format_value(value) + "\n";
    return out;
}

std::string evaluation_csv(const EvaluationReport& report) {
    std::string out = "target,true_acc,pred_acc,abs_err\n";
    for (const auto& r : report.rows)
        out += r.target + "," + format_value(r.true_acc) + "," + format_value(r.pred_acc) + "," +
               format_value(r.abs_err) + "\n";
    return out;
}

std::string summary_table(
    const std::map<std::string, std::map<std::string, EvaluationReport>>& reports) {
    std::vector<std::string> groups;
    for (const auto& [method, by_group] : reports)
        for (const auto& [group, rep] : by_group)
            if (std::find(groups.begin(), groups.end(), group) == groups.end())
                groups.push_back(group);
    std::sort(groups.begin(), groups.end());

    std::size_t method_width = std::string("method").size();
    for (const auto& [method, by_group] : reports) method_width = std::max(method_width, method.size());

    auto cell = [](const EvaluationReport& r) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3f (%.3f)", r.mae, r.std_dev);
        return std::string(buf);
    };

    constexpr std::size_t col_width = 16;
    std::ostringstream os;
    os << std::left;
    os.width(static_cast<std::streamsize>(method_width + 2));
    os << "method";
    for (const auto& g : groups) {
        os.width(col_width);
        os << g;
    }
    os << "\n";
    for (const auto& [method, by_group] : reports) {
        os.width(static_cast<std::streamsize>(method_width + 2));
        os << method;
        for (const auto& g : groups) {
            os.width(col_width);
            auto it = by_group.find(g);
            os << (it == by_group.end() ? std::string("-") : cell(it->second));
        }
        os << "\n";
    }
    return os.str();
}

} // namespace dsg::pipeline
