#include "dsg/workbench/workbench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "dsg/distances/discriminative.hpp"
#include "dsg/io/tensor_file.hpp"
#include "dsg/kernels/kernels.hpp"
#include "dsg/rng.hpp"

namespace dsg::workbench {

namespace {

/// Unit vector from seeded standard normals.
std::vector<double> random_direction(Rng& rng, std::size_t d) {
    std::vector<double> v(d);
    double norm = 0.0;
    do {
        rng.fill_normal(v);
        norm = std::sqrt(kernels::squared_norm(v.data(), d));
    } while (norm < 1e-12);
    kernels::scale(1.0 / norm, v.data(), d);
    return v;
}

/// Every emitted instance lives on a shell of this radius. Constant norms
/// keep corruptions directional, so classifier confidence falls together
/// with accuracy (raw blobs would grow in norm under noise and saturate the
/// softmax). The radius is small so that mean-embedding distances between
/// same-distribution samples at the workbench's sizes stay well inside the
/// null-shift tolerances.
constexpr double kShellRadius = 0.4;

void project_to_shell(Matrix& features) {
    const std::size_t d = features.cols();
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto row = features.row(i);
        const double norm = std::sqrt(kernels::squared_norm(row.data(), d));
        if (norm > 1e-12) kernels::scale(kShellRadius / norm, row.data(), d);
    }
}

/// Pre-projection generative draw: labels uniform over `classes`, features
/// mean_y + class_cov_scale * z.
RawSplit sample_blobs(const SyntheticTask& task, const Matrix& means,
                      const std::vector<ClassId>& classes, std::size_t n, Rng& rng) {
    RawSplit out;
    out.features = Matrix(n, task.d);
    out.labels.resize(n);
    std::vector<double> z(task.d);
    for (std::size_t i = 0; i < n; ++i) {
        const ClassId y = classes[rng.index(classes.size())];
        out.labels[i] = y;
        rng.fill_normal(z);
        auto row = out.features.row(i);
        const auto mean = means.row(static_cast<std::size_t>(y));
        for (std::size_t j = 0; j < task.d; ++j)
            row[j] = mean[j] + task.class_cov_scale * z[j];
    }
    return out;
}

learn::LinearModel fit_task_classifier(const Matrix& x, const std::vector<ClassId>& y, double l2,
                                       std::size_t max_iter) {
    learn::LogisticConfig cfg;
    cfg.l2 = l2;
    cfg.max_iter = max_iter;
    return learn::fit_logistic(x, y, cfg);
}

Dataset make_dataset(std::string name, const learn::LinearModel& model, Matrix features,
                     std::vector<ClassId> labels) {
    Matrix probs = learn::predict_proba(model, features);
    return Dataset(std::move(name), std::move(features), std::move(probs), model.classes,
                   std::move(labels));
}

} // namespace

const char* family_name(ShiftFamily::Kind kind) {
    switch (kind) {
        case ShiftFamily::Kind::feature_noise: return "feature_noise";
        case ShiftFamily::Kind::mean_translation: return "mean_translation";
        case ShiftFamily::Kind::covariance_scale: return "covariance_scale";
        case ShiftFamily::Kind::label_subset: return "label_subset";
        case ShiftFamily::Kind::grid_rotation_confound: return "grid_rotation_confound";
    }
    return "unknown";
}

SyntheticTaskBundle gen_task(std::uint64_t seed, std::size_t k, std::size_t d,
                             const TaskConfig& cfg) {
    if (k < 2) throw DataError("gen_task needs k >= 2 classes");
    if (d < 2) throw DataError("gen_task needs d >= 2 dimensions");
    if (cfg.n_per_split < k * 50)
        throw DataError("gen_task needs at least 50 instances per class per split");

    SyntheticTaskBundle bundle;
    SyntheticTask& task = bundle.task;
    task.k = k;
    task.d = d;
    task.seed = seed;
    task.class_cov_scale = 1.0;

    Rng setup_rng(derive_seed(seed, "task-setup"));
    Matrix directions(k, d);
    for (std::size_t c = 0; c < k; ++c) {
        const auto u = random_direction(setup_rng, d);
        std::copy(u.begin(), u.end(), directions.row(c).begin());
    }

    std::vector<ClassId> all_classes(k);
    for (std::size_t c = 0; c < k; ++c) all_classes[c] = static_cast<ClassId>(c);

    // Radius search: the same class assignments and noise draws are reused at
    // every candidate radius, so accuracy moves monotonically with r.
    const std::size_t n = cfg.n_per_split;
    auto draw_assignments = [&](const char* tag) {
        RawSplit s;
        s.features = Matrix(n, d); // reused as the noise table
        s.labels.resize(n);
        Rng rng(derive_seed(seed, tag));
        for (std::size_t i = 0; i < n; ++i) {
            s.labels[i] = all_classes[rng.index(k)];
            auto row = s.features.row(i);
            for (std::size_t j = 0; j < d; ++j) row[j] = rng.normal();
        }
        return s;
    };
    const RawSplit train_noise = draw_assignments("task-train");
    const RawSplit val_noise = draw_assignments("task-val");
    const RawSplit test_noise = draw_assignments("task-test");

    auto materialize = [&](const RawSplit& noise, double radius) {
        RawSplit s;
        s.labels = noise.labels;
        s.features = Matrix(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            const auto dir = directions.row(static_cast<std::size_t>(noise.labels[i]));
            const auto z = noise.features.row(i);
            auto row = s.features.row(i);
            for (std::size_t j = 0; j < d; ++j)
                row[j] = radius * dir[j] + task.class_cov_scale * z[j];
        }
        project_to_shell(s.features);
        return s;
    };

    auto accuracy_at = [&](double radius) {
        const RawSplit tr = materialize(train_noise, radius);
        const RawSplit va = materialize(val_noise, radius);
        const auto model = fit_task_classifier(tr.features, tr.labels, cfg.classifier_l2,
                                               cfg.search_max_iter);
        return learn::classifier_accuracy(model, va.features, va.labels);
    };

    double radius = 2.0;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t step = 0; step < cfg.radius_steps; ++step) {
        const double acc = accuracy_at(radius);
        if (acc >= cfg.accuracy_lo && acc <= cfg.accuracy_hi) {
            found = true;
            break;
        }
        if (acc < cfg.accuracy_lo) {
            lo = radius;
            radius = std::isinf(hi) ? radius * 2.0 : 0.5 * (radius + hi);
        } else {
            hi = radius;
            radius = lo > 0.0 ? 0.5 * (radius + lo) : radius * 0.5;
        }
    }
    if (!found)
        throw DataError("gen_task could not reach the target base accuracy band");

    task.class_means = Matrix(k, d);
    for (std::size_t c = 0; c < k; ++c) {
        const auto dir = directions.row(c);
        auto mean = task.class_means.row(c);
        for (std::size_t j = 0; j < d; ++j) mean[j] = radius * dir[j];
    }

    bundle.train = materialize(train_noise, radius);
    bundle.val = materialize(val_noise, radius);
    bundle.test = materialize(test_noise, radius);
    return bundle;
}

ReferenceClassifier train_reference_classifier(const SyntheticTaskBundle& bundle,
                                               const TaskConfig& cfg) {
    learn::LinearModel model = fit_task_classifier(bundle.train.features, bundle.train.labels,
                                                   cfg.classifier_l2, cfg.classifier_max_iter);
    Dataset train = make_dataset("train", model, bundle.train.features, bundle.train.labels);
    Dataset val = make_dataset("val", model, bundle.val.features, bundle.val.labels);
    Dataset test = make_dataset("test", model, bundle.test.features, bundle.test.labels);
    return ReferenceClassifier{std::move(model), std::move(train), std::move(val),
                               std::move(test)};
}

Dataset apply_shift(const SyntheticTask& task, const learn::LinearModel& model,
                    const ShiftFamily& family, double intensity, std::size_t n,
                    std::uint64_t seed, const std::string& name) {
    if (std::find(family.intensity_grid.begin(), family.intensity_grid.end(), intensity) ==
        family.intensity_grid.end())
        throw DataError("intensity not in family grid");
    if (n == 0) throw DataError("apply_shift needs n >= 1");

    const std::size_t k = task.k;
    const std::size_t d = task.d;
    Rng family_rng(family.seed);

    std::vector<ClassId> classes(k);
    for (std::size_t c = 0; c < k; ++c) classes[c] = static_cast<ClassId>(c);

    std::vector<double> translation;
    std::vector<ClassId> kept = classes;
    switch (family.kind) {
        case ShiftFamily::Kind::mean_translation:
            translation = random_direction(family_rng, d);
            break;
        case ShiftFamily::Kind::label_subset: {
            // one seeded removal order for the whole family: subsets nest
            std::vector<ClassId> order = classes;
            family_rng.shuffle(order);
            const auto removed = static_cast<std::size_t>(
                std::ceil(intensity * static_cast<double>(k) - 1e-12));
            if (removed >= k) throw DataError("label_subset would remove every class");
            kept.assign(order.begin() + static_cast<std::ptrdiff_t>(removed), order.end());
            std::sort(kept.begin(), kept.end());
            break;
        }
        case ShiftFamily::Kind::grid_rotation_confound: {
            const auto side =
                static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(d))));
            if (side * side != d)
                throw DataError("grid_rotation_confound needs a square feature dimension");
            break;
        }
        default: break;
    }

    SyntheticTask shifted = task;
    if (family.kind == ShiftFamily::Kind::covariance_scale)
        shifted.class_cov_scale = task.class_cov_scale * std::sqrt(1.0 + intensity);

    Rng rng(seed);
    RawSplit sample = sample_blobs(shifted, task.class_means, kept, n, rng);

    if (family.kind == ShiftFamily::Kind::feature_noise && intensity > 0.0) {
        std::vector<double> z(d);
        for (std::size_t i = 0; i < n; ++i) {
            rng.fill_normal(z);
            kernels::axpy(intensity, z.data(), sample.features.row(i).data(), d);
        }
    } else if (family.kind == ShiftFamily::Kind::mean_translation && intensity > 0.0) {
        for (std::size_t i = 0; i < n; ++i)
            kernels::axpy(intensity, translation.data(), sample.features.row(i).data(), d);
    }
    project_to_shell(sample.features);

    if (family.kind == ShiftFamily::Kind::grid_rotation_confound) {
        // post-projection: a grid rotation permutes coordinates, so the shell
        // radius is preserved
        for (std::size_t i = 0; i < n; ++i) {
            const double trigger = rng.uniform();
            const int turns = 1 + static_cast<int>(rng.index(3));
            if (trigger < intensity) {
                Matrix one(1, d);
                std::copy(sample.features.row(i).begin(), sample.features.row(i).end(),
                          one.row(0).begin());
                const Matrix rotated = distances::rotate_grid_features(one, turns);
                std::copy(rotated.row(0).begin(), rotated.row(0).end(),
                          sample.features.row(i).begin());
            }
        }
    }

    Matrix probs = learn::predict_proba(model, sample.features);
    LabelSpace prob_classes = model.classes;
    if (family.kind == ShiftFamily::Kind::label_subset && kept.size() < k) {
        // the dump declares the target's label universe: keep those columns
        // and renormalize, i.e. the classifier restricted to the kept classes
        Matrix sub(probs.rows(), kept.size());
        std::vector<std::size_t> cols;
        for (ClassId c : kept)
            cols.push_back(static_cast<std::size_t>(model.classes.index_of(c)));
        for (std::size_t i = 0; i < probs.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols.size(); ++j) {
                sub(i, j) = probs(i, cols[j]);
                s += sub(i, j);
            }
            kernels::scale(1.0 / s, sub.row(i).data(), cols.size());
        }
        probs = std::move(sub);
        prob_classes = LabelSpace(kept);
    }

    return Dataset(name, std::move(sample.features), std::move(probs), std::move(prob_classes),
                   std::move(sample.labels));
}

std::pair<CalibratedOracle, Dataset> make_calibrated_oracle(const DatasetView& view,
                                                            std::size_t bins) {
    if (!view.source().has_labels())
        throw DataError("labels required: calibrated oracle needs ground truth");
    if (view.rows() < 1000) throw DataError("calibrated oracle needs >= 1000 rows");
    if (bins < 1) throw DataError("calibrated oracle needs >= 1 bin");

    const std::size_t n = view.rows();
    std::vector<double> confidence(n);
    std::vector<bool> correct(n);
    std::vector<std::size_t> bin_of(n);
    std::vector<double> row;

    CalibratedOracle oracle;
    oracle.n = n;
    oracle.bin_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b)
        oracle.bin_edges[b] = static_cast<double>(b) / static_cast<double>(bins);
    oracle.bin_confidence.assign(bins, 0.0);
    oracle.bin_count.assign(bins, 0);

    std::vector<double> bin_correct(bins, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        view.copy_prob_row(i, row);
        confidence[i] = kernels::max_value(row.data(), row.size());
        correct[i] = predict_label(row, view.col_classes()) == view.label(i);
        auto b = static_cast<std::size_t>(confidence[i] * static_cast<double>(bins));
        if (b >= bins) b = bins - 1;
        bin_of[i] = b;
        oracle.bin_count[b] += 1;
        bin_correct[b] += correct[i] ? 1.0 : 0.0;
    }
    for (std::size_t b = 0; b < bins; ++b)
        if (oracle.bin_count[b] > 0)
            oracle.bin_confidence[b] = bin_correct[b] / static_cast<double>(oracle.bin_count[b]);
    // empty bins inherit the nearest populated neighbor so the table is total
    for (std::size_t b = 0; b < bins; ++b) {
        if (oracle.bin_count[b] > 0) continue;
        for (std::size_t off = 1; off < bins; ++off) {
            if (b >= off && oracle.bin_count[b - off] > 0) {
                oracle.bin_confidence[b] = oracle.bin_confidence[b - off];
                break;
            }
            if (b + off < bins && oracle.bin_count[b + off] > 0) {
                oracle.bin_confidence[b] = oracle.bin_confidence[b + off];
                break;
            }
        }
    }

    const Dataset& src = view.source();
    Matrix probs(n, view.cols());
    for (std::size_t i = 0; i < n; ++i) {
        view.copy_prob_row(i, row);
        std::size_t max_at = 0;
        for (std::size_t j = 1; j < row.size(); ++j)
            if (row[j] > row[max_at]) max_at = j;
        double rest = 0.0;
        double runner = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j == max_at) continue;
            rest += row[j];
            runner = std::max(runner, row[j]);
        }
        double target = oracle.bin_confidence[bin_of[i]];
        // keep the argmax where it was: the assigned confidence must stay
        // above the rescaled runner-up
        if (rest > 0.0) {
            const double floor = runner / (1.0 - row[max_at] + runner);
            target = std::min(std::max(target, floor + 1e-12), 1.0);
        }
        auto dst = probs.row(i);
        if (row.size() == 1) {
            dst[0] = 1.0; // a one-class view cannot encode any other confidence
            continue;
        }
        if (rest > 0.0) {
            const double scale = (1.0 - target) / rest;
            for (std::size_t j = 0; j < row.size(); ++j) dst[j] = row[j] * scale;
        } else {
            const double share = (1.0 - target) / static_cast<double>(row.size() - 1);
            for (std::size_t j = 0; j < row.size(); ++j) dst[j] = share;
        }
        dst[max_at] = target;
    }

    std::optional<Matrix> feats;
    if (src.has_features()) {
        Matrix f(n, src.features().cols());
        for (std::size_t i = 0; i < n; ++i) {
            const auto s = view.feature_row(i);
            std::copy(s.begin(), s.end(), f.row(i).begin());
        }
        feats = std::move(f);
    }
    std::vector<ClassId> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = view.label(i);

    Dataset rewritten(src.name() + "-calibrated", std::move(feats), std::move(probs),
                      view.col_classes(), std::move(labels));
    return {std::move(oracle), std::move(rewritten)};
}

namespace {

std::string grid_target_name(const char* prefix, std::size_t grid_index, std::size_t noise_seed) {
    std::string s = std::string(prefix) + "-g" + std::to_string(grid_index);
    s += "-s" + std::to_string(noise_seed);
    return s;
}

} // namespace

DemoResult run_demo(std::uint64_t seed, const DemoConfig& cfg) {
    DemoResult demo;

    SyntheticTaskBundle bundle = gen_task(seed, cfg.k, cfg.d, cfg.task);
    ReferenceClassifier ref = train_reference_classifier(bundle, cfg.task);
    demo.task = bundle.task;
    demo.base_accuracy =
        learn::classifier_accuracy(ref.model, bundle.test.features, bundle.test.labels);

    // the held-out labeled test split anchors every difference measure
    Dataset base("base", ref.test.features(), ref.test.probabilities(), ref.test.prob_classes(),
                 ref.test.labels());
    demo.datasets.push_back(io::LoadedDataset{std::move(base), "base"});

    ShiftFamily noise{ShiftFamily::Kind::feature_noise, cfg.noise_grid,
                      derive_seed(seed, "family-noise")};
    for (std::size_t gi = 0; gi < cfg.noise_grid.size(); ++gi) {
        for (std::size_t si = 0; si < cfg.noise_seeds; ++si) {
            const std::string name = grid_target_name("noise", gi, si);
            demo.datasets.push_back(io::LoadedDataset{
                apply_shift(demo.task, ref.model, noise, cfg.noise_grid[gi], cfg.target_n,
                            derive_seed(seed, name), name),
                "noise"});
        }
    }

    struct ValFamily {
        ShiftFamily family;
        const char* prefix;
        const std::vector<double>* grid;
    };
    const std::vector<ValFamily> val_families = {
        {{ShiftFamily::Kind::mean_translation, cfg.translation_grid,
          derive_seed(seed, "family-translate")},
         "translate",
         &cfg.translation_grid},
        {{ShiftFamily::Kind::covariance_scale, cfg.covscale_grid,
          derive_seed(seed, "family-covscale")},
         "covscale",
         &cfg.covscale_grid},
        {{ShiftFamily::Kind::label_subset, cfg.subset_grid, derive_seed(seed, "family-subset")},
         "subset",
         &cfg.subset_grid},
    };
    for (const auto& vf : val_families) {
        for (std::size_t gi = 0; gi < vf.grid->size(); ++gi) {
            const std::string name = grid_target_name(vf.prefix, gi, 0);
            demo.datasets.push_back(io::LoadedDataset{
                apply_shift(demo.task, ref.model, vf.family, (*vf.grid)[gi], cfg.target_n,
                            derive_seed(seed, name), name),
                "heldout"});
        }
    }

    const std::vector<std::string> methods =
        cfg.methods.empty() ? pipeline::all_methods() : cfg.methods;
    pipeline::MeasureConfig mcfg;
    mcfg.seed = seed;
    demo.protocol = pipeline::run_protocol(demo.datasets, "base", "noise", "heldout", methods,
                                           mcfg, cfg.fit);

    // per-family breakdown of the validation group, plus the aggregate
    for (const auto& method : methods) {
        const auto& predictor = demo.protocol.predictors.at(method);
        demo.reports[method]["all"] = demo.protocol.reports.at(method);
        for (const auto& vf : val_families) {
            std::vector<pipeline::ShiftMeasurement> subset;
            const std::string prefix = std::string(vf.prefix) + "-";
            for (const auto& m : demo.protocol.validation)
                if (m.target_name.rfind(prefix, 0) == 0) subset.push_back(m);
            if (!subset.empty())
                demo.reports[method][vf.prefix] = pipeline::evaluate(predictor, subset);
        }
    }
    demo.table = pipeline::summary_table(demo.reports);
    return demo;
}

void write_demo_artifacts(const DemoResult& demo, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path tensor_dir = out_dir / "tensors";
    fs::create_directories(tensor_dir);
    const fs::path eval_dir = out_dir / "evaluations";
    fs::create_directories(eval_dir);

    std::vector<io::ManifestEntry> entries;
    for (const auto& d : demo.datasets) {
        const Dataset& ds = d.dataset;
        io::ManifestEntry e;
        e.name = ds.name();
        e.group = d.group;
        e.probabilities_path = "tensors/" + ds.name() + ".probs.dsg";
        io::write_tensor(out_dir / e.probabilities_path, ds.probabilities());
        if (ds.has_features()) {
            e.features_path = "tensors/" + ds.name() + ".features.dsg";
            io::write_tensor(out_dir / *e.features_path, ds.features());
        }
        if (ds.has_labels()) {
            e.labels_path = "tensors/" + ds.name() + ".labels.dsg";
            io::write_tensor(out_dir / *e.labels_path, ds.labels());
        }
        e.class_ids = ds.prob_classes().ids();
        entries.push_back(std::move(e));
    }
    io::write_manifest(out_dir / "manifest.json", entries);

    std::vector<pipeline::ShiftMeasurement> all_measurements = demo.protocol.calibration;
    all_measurements.insert(all_measurements.end(), demo.protocol.validation.begin(),
                            demo.protocol.validation.end());
    std::ofstream(out_dir / "distances.csv", std::ios::trunc)
        << pipeline::distances_csv(all_measurements);

    for (const auto& [method, rep] : demo.protocol.reports)
        std::ofstream(eval_dir / (method + ".csv"), std::ios::trunc)
            << pipeline::evaluation_csv(rep);

    std::ofstream(out_dir / "summary.txt", std::ios::trunc) << demo.table;
}

} // namespace dsg::workbench
