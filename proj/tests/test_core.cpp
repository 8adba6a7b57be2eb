#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsg/core/dataset.hpp"
#include "dsg/rng.hpp"

using namespace dsg;

namespace {

Dataset labeled(std::string name, std::vector<std::vector<double>> probs,
                std::vector<ClassId> classes, std::vector<ClassId> labels) {
    return Dataset(std::move(name), std::nullopt, Matrix::from_rows(probs), LabelSpace(classes),
                   std::move(labels));
}

Dataset unlabeled(std::string name, std::vector<std::vector<double>> probs,
                  std::vector<ClassId> classes) {
    return Dataset(std::move(name), std::nullopt, Matrix::from_rows(probs), LabelSpace(classes),
                   std::nullopt);
}

} // namespace

TEST_CASE("label space intersection") {
    const auto a = unlabeled("a", {{0.5, 0.3, 0.2}}, {1, 2, 3});
    const auto b = unlabeled("b", {{0.2, 0.3, 0.5}}, {2, 3, 4});
    CHECK(intersect_labels(a, b).ids() == std::vector<ClassId>{2, 3});

    const auto c = unlabeled("c", {{0.6, 0.4}}, {1, 2});
    const auto d = unlabeled("d", {{0.4, 0.6}}, {1, 2});
    CHECK(intersect_labels(c, d).ids() == std::vector<ClassId>{1, 2});

    const auto e = unlabeled("e", {{1.0}}, {1});
    const auto f = unlabeled("f", {{1.0}}, {2});
    CHECK_THROWS_WITH_AS(intersect_labels(e, f), "disjoint label spaces", DataError);
}

TEST_CASE("restrict filters rows by label and columns by class") {
    const auto d = labeled("d",
                           {{0.7, 0.2, 0.1},
                            {0.1, 0.8, 0.1},
                            {0.2, 0.2, 0.6},
                            {0.3, 0.5, 0.2}},
                           {1, 2, 3}, {1, 2, 3, 2});
    const auto view = restrict(d, LabelSpace({2, 3}));
    CHECK(view.row_index() == std::vector<std::size_t>{1, 2, 3});
    CHECK(view.cols() == 2);
    CHECK(view.prob(0, 0) == doctest::Approx(0.8)); // raw values, no renormalization
    CHECK(view.prob(0, 1) == doctest::Approx(0.1));

    const auto u = unlabeled("u", {{0.5, 0.5}, {0.9, 0.1}}, {4, 7});
    const auto full = restrict(u, u.prob_classes());
    CHECK(full.rows() == 2);
    CHECK(full.cols() == 2);

    CHECK_THROWS_WITH_AS(restrict(d, LabelSpace({2, 9})), "unknown class in restriction",
                         DataError);
}

TEST_CASE("predict_label takes the argmax, ties to the lowest id") {
    std::vector<double> r1{0.1, 0.9};
    CHECK(predict_label(r1, LabelSpace({5, 9})) == 9);
    std::vector<double> r2{0.5, 0.5};
    CHECK(predict_label(r2, LabelSpace({3, 7})) == 3);
    std::vector<double> r3{1.0};
    CHECK(predict_label(r3, LabelSpace({4})) == 4);
    std::vector<double> empty;
    CHECK_THROWS_AS(predict_label(empty, LabelSpace{}), DataError);
}

TEST_CASE("accuracy counts argmax hits over the view") {
    const auto all_right = labeled("r", {{0.9, 0.1}, {0.2, 0.8}}, {0, 1}, {0, 1});
    CHECK(accuracy(restrict(all_right, all_right.prob_classes())) == doctest::Approx(1.0));

    const auto all_wrong = labeled("w", {{0.9, 0.1}, {0.2, 0.8}}, {0, 1}, {1, 0});
    CHECK(accuracy(restrict(all_wrong, all_wrong.prob_classes())) == doctest::Approx(0.0));

    const auto two_of_three = labeled(
        "t", {{0.9, 0.1}, {0.2, 0.8}, {0.6, 0.4}}, {0, 1}, {0, 1, 1});
    CHECK(accuracy(restrict(two_of_three, two_of_three.prob_classes())) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-9));

    const auto u = unlabeled("u", {{1.0, 0.0}}, {0, 1});
    CHECK_THROWS_AS(accuracy(restrict(u, u.prob_classes())), DataError);
}

TEST_CASE("accuracy_gap is base minus target over the intersection") {
    // 100 rows, 76 correct vs 63 correct on the shared two-class space
    auto build = [](std::string name, int correct) {
        std::vector<std::vector<double>> probs;
        std::vector<ClassId> labels;
        for (int i = 0; i < 100; ++i) {
            probs.push_back({0.7, 0.3});
            labels.push_back(i < correct ? 0 : 1);
        }
        return labeled(std::move(name), probs, {0, 1}, labels);
    };
    const auto base = build("base", 76);
    const auto target = build("target", 63);
    CHECK(accuracy_gap(base, target) == doctest::Approx(0.13).epsilon(1e-12));
    CHECK(accuracy_gap(base, base) == doctest::Approx(0.0));
    CHECK(accuracy_gap(target, base) == doctest::Approx(-0.13).epsilon(1e-12));
}

TEST_CASE("restriction to the full space preserves count and accuracy") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 20 + rng.index(30);
        const std::size_t k = 2 + rng.index(4);
        std::vector<std::vector<double>> probs(n, std::vector<double>(k));
        std::vector<ClassId> classes(k), labels(n);
        for (std::size_t c = 0; c < k; ++c) classes[c] = static_cast<ClassId>(c);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (auto& p : probs[i]) s += (p = rng.uniform() + 1e-3);
            for (auto& p : probs[i]) p /= s;
            labels[i] = static_cast<ClassId>(rng.index(k));
        }
        const auto d = labeled("d", probs, classes, labels);
        const auto v = restrict(d, d.prob_classes());
        CHECK(v.rows() == n);
        CHECK(accuracy_gap(d, d) == 0.0);
    }
}

TEST_CASE("argmax is invariant under common positive row rescaling") {
    Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t k = 2 + rng.index(5);
        std::vector<double> row(k);
        for (auto& p : row) p = rng.uniform();
        const LabelSpace classes = [&] {
            std::vector<ClassId> ids(k);
            for (std::size_t c = 0; c < k; ++c) ids[c] = static_cast<ClassId>(c * 3);
            return LabelSpace(ids);
        }();
        const ClassId before = predict_label(row, classes);
        auto scaled = row;
        const double c = 0.01 + 10.0 * rng.uniform();
        for (auto& p : scaled) p *= c;
        CHECK(predict_label(scaled, classes) == before);
    }
}

TEST_CASE("dataset invariants are validated at construction") {
    CHECK_THROWS_AS(unlabeled("bad", {{0.5, 0.4}}, {0, 1}), DataError); // sums to 0.9
    CHECK_THROWS_AS(labeled("bad", {{0.5, 0.5}}, {0, 1}, {2}), DataError); // label outside
    CHECK_THROWS_AS(Dataset("bad", std::nullopt, Matrix::from_rows({{0.5, 0.5}}),
                            LabelSpace({0, 1}), std::vector<ClassId>{0, 1}),
                    DataError); // label count mismatch
    CHECK_THROWS_AS(Dataset("bad", Matrix(2, 3), Matrix::from_rows({{1.0}}), LabelSpace({0}),
                            std::nullopt),
                    DataError); // feature row mismatch
    CHECK_THROWS_AS(unlabeled("bad", {{-0.1, 1.1}}, {0, 1}), DataError); // negative entry
}
