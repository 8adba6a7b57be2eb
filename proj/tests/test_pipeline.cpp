#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dsg/pipeline/pipeline.hpp"
#include "dsg/pipeline/predictor_io.hpp"
#include "dsg/rng.hpp"

using namespace dsg;
using namespace dsg::pipeline;

namespace {

/// Two-class dataset with features and probabilities tied to a noisy score.
Dataset make_scored(std::string name, std::size_t n, double shift, std::uint64_t seed) {
    Rng rng(seed);
    Matrix features(n, 4);
    Matrix probs(n, 2);
    std::vector<ClassId> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ClassId y = static_cast<ClassId>(rng.index(2));
        labels[i] = y;
        const double sign = y == 0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < 4; ++j)
            features(i, j) = sign * 0.8 + rng.normal() + shift;
        const double score = features(i, 0) + features(i, 1) - 2.0 * shift;
        const double p1 = 1.0 / (1.0 + std::exp(-1.2 * score));
        probs(i, 0) = 1.0 - p1;
        probs(i, 1) = p1;
    }
    return Dataset(std::move(name), std::move(features), std::move(probs), LabelSpace({0, 1}),
                   std::move(labels));
}

ShiftMeasurement synthetic_measurement(std::string target, double s_value, double base_acc,
                                       double gap, const char* method = "doc") {
    ShiftMeasurement m;
    m.base_name = "base";
    m.target_name = std::move(target);
    m.features[method] = s_value;
    m.base_acc_on_intersection = base_acc;
    m.true_target_acc = base_acc - gap;
    m.true_gap = gap;
    return m;
}

} // namespace

TEST_CASE("measure on an identical target gives identity values") {
    const Dataset base = make_scored("base", 800, 0.0, 1);
    MeasureConfig cfg;
    const auto m = measure(base, base, {"doc", "doe", "frechet", "mmd", "disc_a_proxy"}, cfg);
    CHECK(m.features.at("doc") == 0.0);
    CHECK(m.features.at("doe") == 0.0);
    CHECK(m.features.at("frechet") < 1e-8);
    CHECK(m.features.at("mmd") == 0.0);
    CHECK(std::abs(m.features.at("disc_a_proxy")) <= 0.3); // chance-ish on shared rows
    REQUIRE(m.true_gap.has_value());
    CHECK(*m.true_gap == 0.0);
}

TEST_CASE("measure bookkeeping identity for labeled targets") {
    const Dataset base = make_scored("base", 500, 0.0, 2);
    const Dataset target = make_scored("t", 400, 0.6, 3);
    const auto m = measure(base, target, {"doc"}, {});
    REQUIRE(m.true_target_acc.has_value());
    REQUIRE(m.true_gap.has_value());
    CHECK(*m.true_gap ==
          doctest::Approx(m.base_acc_on_intersection - *m.true_target_acc).epsilon(1e-12));
}

TEST_CASE("measure errors name the method that lacks its modality") {
    const Dataset base = make_scored("base", 100, 0.0, 4);
    Dataset no_features("nf", std::nullopt, base.probabilities(), base.prob_classes(),
                        base.labels());
    try {
        measure(base, no_features, {"frechet"}, {});
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("frechet requires features") != std::string::npos);
    }
    CHECK_THROWS_AS(measure(base, no_features, {"nonsense"}, {}), ConfigError);
}

TEST_CASE("ac_tempscaling measures the temperature-scaled target confidence") {
    const Dataset base = make_scored("base", 900, 0.0, 7);
    const Dataset target = make_scored("t", 700, 0.5, 8);

    MeasureConfig cfg;
    const auto m = measure(base, target, {"ac", "ac_tempscaling"}, cfg);

    // reference value along the documented route: fit T on the base's own
    // full view, rescale the target, summarize over the intersection
    const auto t_fit = confidence::fit_temperature(restrict(base, base.prob_classes()));
    const Dataset rescaled = confidence::apply_temperature(target, t_fit);
    const auto common = intersect_labels(base, target);
    const double want = confidence::summarize(restrict(rescaled, common)).avg_confidence;
    CHECK(m.features.at("ac_tempscaling") == doctest::Approx(want).epsilon(1e-12));

    // a pre-fitted base temperature short-circuits the lazy fit
    MeasureConfig pre = cfg;
    pre.base_temperature = t_fit;
    const auto m2 = measure(base, target, {"ac_tempscaling"}, pre);
    CHECK(m2.features.at("ac_tempscaling") ==
          doctest::Approx(m.features.at("ac_tempscaling")).epsilon(1e-12));

    // protocol predictors carry the fitted temperature for later reuse
    std::vector<io::LoadedDataset> world;
    world.push_back({base, "base"});
    world.push_back({make_scored("c1", 400, 0.2, 9), "cal"});
    world.push_back({make_scored("c2", 400, 0.4, 10), "cal"});
    world.push_back({make_scored("v1", 400, 0.3, 11), "val"});
    const auto result = run_protocol(world, "base", "cal", "val", {"ac_tempscaling"}, {});
    REQUIRE(result.predictors.at("ac_tempscaling").fitted_temperature.has_value());
    CHECK(result.predictors.at("ac_tempscaling").fitted_temperature->t ==
          doctest::Approx(t_fit.t).epsilon(1e-9));
}

TEST_CASE("regressor-free methods carry no regressor; regressor methods need 2+ shifts") {
    std::vector<ShiftMeasurement> cal = {synthetic_measurement("a", 0.1, 0.8, 0.05, "ac")};
    const auto p = fit_predictor(cal, "ac");
    CHECK_FALSE(p.has_regressor());

    std::vector<ShiftMeasurement> one = {synthetic_measurement("a", 0.1, 0.8, 0.05)};
    CHECK_THROWS_AS(fit_predictor(one, "doc"), DataError);
}

TEST_CASE("exact linear S-gap calibration predicts validation exactly") {
    std::vector<ShiftMeasurement> cal;
    for (int i = 0; i < 6; ++i) {
        const double s = 0.05 * i;
        cal.push_back(synthetic_measurement("c" + std::to_string(i), s, 0.85, 1.5 * s + 0.02));
    }
    const auto p = fit_predictor(cal, "doc");
    REQUIRE(p.linear.has_value());

    for (double s : {0.012, 0.11, 0.21}) {
        const auto m = synthetic_measurement("v", s, 0.85, 1.5 * s + 0.02);
        CHECK(predict_accuracy(p, m) ==
              doctest::Approx(0.85 - (1.5 * s + 0.02)).epsilon(1e-6));
    }
}

TEST_CASE("predict_accuracy per-method routes") {
    ShiftMeasurement m;
    m.base_acc_on_intersection = 0.76;
    m.features["ac"] = 0.66;
    m.features["ac_tempscaling"] = 0.71;
    m.features["doc_feat"] = 0.13;
    m.features["doc"] = 0.2;

    AccuracyPredictor base_only;
    base_only.method = "base_acc";
    CHECK(predict_accuracy(base_only, m) == doctest::Approx(0.76));

    AccuracyPredictor ac;
    ac.method = "ac";
    CHECK(predict_accuracy(ac, m) == doctest::Approx(0.66));

    AccuracyPredictor temp;
    temp.method = "ac_tempscaling";
    CHECK(predict_accuracy(temp, m) == doctest::Approx(0.71));

    AccuracyPredictor feat;
    feat.method = "doc_feat";
    CHECK(predict_accuracy(feat, m) == doctest::Approx(0.63));

    AccuracyPredictor reg;
    reg.method = "doc";
    reg.linear = learn::LinearRegressor{{6.0}, 0.0}; // predicts gap 1.2
    CHECK(predict_accuracy(reg, m) == 0.0);          // clamped

    AccuracyPredictor missing;
    missing.method = "mmd";
    missing.linear = learn::LinearRegressor{{1.0}, 0.0};
    CHECK_THROWS_AS(predict_accuracy(missing, m), DataError);
}

TEST_CASE("doc_feat equals a doc regressor with identity calibration") {
    // two calibration points lying exactly on gap = doc
    std::vector<ShiftMeasurement> cal = {synthetic_measurement("a", 0.05, 0.8, 0.05),
                                         synthetic_measurement("b", 0.20, 0.8, 0.20)};
    for (auto& c : cal) c.features["doc_feat"] = c.features["doc"];
    const auto doc_reg = fit_predictor(cal, "doc");
    const auto doc_feat = fit_predictor(cal, "doc_feat");
    for (double s : {0.0, 0.07, 0.33}) {
        auto m = synthetic_measurement("v", s, 0.8, s);
        m.features["doc_feat"] = s;
        CHECK(predict_accuracy(doc_reg, m) ==
              doctest::Approx(predict_accuracy(doc_feat, m)).epsilon(1e-10));
    }
}

TEST_CASE("evaluate aggregates absolute errors") {
    AccuracyPredictor p;
    p.method = "doc_feat";

    std::vector<ShiftMeasurement> perfect;
    for (int i = 0; i < 3; ++i) {
        auto m = synthetic_measurement("t" + std::to_string(i), 0.1 * i, 0.9, 0.1 * i);
        m.features["doc_feat"] = m.features["doc"];
        perfect.push_back(std::move(m));
    }
    const auto rep = evaluate(p, perfect);
    CHECK(rep.mae == doctest::Approx(0.0));
    CHECK(rep.std_dev == doctest::Approx(0.0));

    // errors {0.1, 0.3} -> mae 0.2, population std 0.1
    std::vector<ShiftMeasurement> off = {synthetic_measurement("a", 0.0, 0.8, 0.1, "doc_feat"),
                                         synthetic_measurement("b", 0.0, 0.8, 0.3, "doc_feat")};
    const auto rep2 = evaluate(p, off);
    CHECK(rep2.mae == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(rep2.std_dev == doctest::Approx(0.1).epsilon(1e-12));

    double check_mean = 0.0;
    for (const auto& r : rep2.rows) check_mean += r.abs_err;
    CHECK(rep2.mae == doctest::Approx(check_mean / rep2.rows.size()).epsilon(1e-12));

    CHECK_THROWS_AS(evaluate(p, {}), DataError);

    std::vector<ShiftMeasurement> unlabeled = {synthetic_measurement("u", 0.1, 0.8, 0.0)};
    unlabeled[0].true_target_acc.reset();
    unlabeled[0].features["doc_feat"] = 0.1;
    CHECK_THROWS_AS(evaluate(p, unlabeled), DataError);
}

namespace {

std::vector<io::LoadedDataset> protocol_world(std::uint64_t seed) {
    std::vector<io::LoadedDataset> out;
    out.push_back({make_scored("base", 700, 0.0, seed), "base"});
    for (int i = 0; i < 4; ++i)
        out.push_back({make_scored("cal" + std::to_string(i), 400, 0.25 * (i + 1), seed + 10 + i),
                       "cal"});
    for (int i = 0; i < 3; ++i)
        out.push_back({make_scored("val" + std::to_string(i), 400, 0.4 * (i + 1), seed + 50 + i),
                       "val"});
    return out;
}

} // namespace

TEST_CASE("run_protocol rejects overlapping groups") {
    const auto world = protocol_world(1);
    CHECK_THROWS_AS(run_protocol(world, "base", "cal", "cal", {"doc"}, {}), ConfigError);
}

TEST_CASE("run_protocol is invariant to dataset ordering") {
    auto world = protocol_world(2);
    const auto a = run_protocol(world, "base", "cal", "val", {"doc", "base_acc", "mmd"}, {});
    std::reverse(world.begin(), world.end());
    const auto b = run_protocol(world, "base", "cal", "val", {"doc", "base_acc", "mmd"}, {});
    for (const auto& method : {"doc", "base_acc", "mmd"}) {
        CHECK(a.reports.at(method).mae == b.reports.at(method).mae);
        CHECK(a.reports.at(method).std_dev == b.reports.at(method).std_dev);
    }
}

TEST_CASE("base_acc protocol MAE equals the mean absolute true gap") {
    const auto world = protocol_world(3);
    const auto result = run_protocol(world, "base", "cal", "val", {"base_acc"}, {});
    double mean_gap = 0.0;
    for (const auto& m : result.validation) mean_gap += std::abs(*m.true_gap);
    mean_gap /= static_cast<double>(result.validation.size());
    CHECK(result.reports.at("base_acc").mae == doctest::Approx(mean_gap).epsilon(1e-12));
}

TEST_CASE("predicted accuracies always lie in [0,1]") {
    const auto world = protocol_world(4);
    const auto result =
        run_protocol(world, "base", "cal", "val", {"doc", "doe", "ac", "doc_feat", "mmd"}, {});
    for (const auto& [method, rep] : result.reports)
        for (const auto& row : rep.rows) {
            CHECK(row.pred_acc >= 0.0);
            CHECK(row.pred_acc <= 1.0);
        }
}

TEST_CASE("predictor files round-trip to identical predictions") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "dsg-predictor-roundtrip";
    fs::remove_all(dir);
    fs::create_directories(dir);

    std::vector<ShiftMeasurement> cal;
    for (int i = 0; i < 8; ++i)
        cal.push_back(synthetic_measurement("c" + std::to_string(i), 0.03 * i + 0.01, 0.82,
                                            0.05 * i + 0.004));

    const auto m_test = synthetic_measurement("probe", 0.137, 0.82, 0.2);

    SUBCASE("linear") {
        auto p = fit_predictor(cal, "doc");
        p.fitted_temperature = confidence::Temperature{1.37};
        save_predictor(dir / "p.json", p);
        const auto back = load_predictor(dir / "p.json");
        CHECK(back.method == "doc");
        REQUIRE(back.fitted_temperature.has_value());
        CHECK(back.fitted_temperature->t == 1.37);
        CHECK(predict_accuracy(back, m_test) == predict_accuracy(p, m_test));
    }

    SUBCASE("mlp") {
        FitConfig cfg;
        cfg.kind = RegressorKind::mlp;
        cfg.mlp.max_iter = 60;
        auto p = fit_predictor(cal, "doc", cfg);
        save_predictor(dir / "q.json", p);
        const auto back = load_predictor(dir / "q.json");
        CHECK(predict_accuracy(back, m_test) == predict_accuracy(p, m_test));
    }

    SUBCASE("regressor-free") {
        auto p = fit_predictor(cal, "doc_feat");
        save_predictor(dir / "r.json", p);
        const auto back = load_predictor(dir / "r.json");
        auto m = m_test;
        m.features["doc_feat"] = 0.12;
        CHECK(predict_accuracy(back, m) == predict_accuracy(p, m));
    }

    fs::remove_all(dir);
}

TEST_CASE("csv emitters produce the documented headers") {
    std::vector<ShiftMeasurement> ms = {synthetic_measurement("t1", 0.1, 0.8, 0.1)};
    const std::string csv = distances_csv(ms);
    CHECK(csv.rfind("base,target,method,value\n", 0) == 0);
    CHECK(csv.find("base,t1,doc,0.1") != std::string::npos);

    AccuracyPredictor p;
    p.method = "base_acc";
    const auto rep = evaluate(p, ms);
    const std::string ecsv = evaluation_csv(rep);
    CHECK(ecsv.rfind("target,true_acc,pred_acc,abs_err\n", 0) == 0);
}
