// dsg: measure distribution differences from dumped classifier outputs,
// calibrate accuracy-gap predictors, and predict accuracy on unlabeled
// shifted datasets.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dsg/pipeline/pipeline.hpp"
#include "dsg/pipeline/predictor_io.hpp"
#include "dsg/workbench/workbench.hpp"

namespace {

using namespace dsg;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct CommonOpts {
    std::string manifest;
    std::string base;
    std::string targets;    // comma list; empty = all non-base datasets
    std::string methods = "doc";
    std::string regressor = "linear";
    std::string cal_group;
    std::string val_group;
    std::string predictor;
    std::string output_dir;
    std::string format = "csv";
    std::uint64_t seed = 0;
};

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<std::string> parse_methods(const std::string& spec) {
    if (spec == "all") return pipeline::all_methods();
    auto methods = split_list(spec);
    if (methods.empty()) throw ConfigError("no methods requested");
    for (const auto& m : methods)
        if (!pipeline::is_method(m)) throw ConfigError("unknown method '" + m + "'");
    return methods;
}

pipeline::RegressorKind parse_regressor(const std::string& r) {
    if (r == "linear") return pipeline::RegressorKind::linear;
    if (r == "mlp") return pipeline::RegressorKind::mlp;
    throw ConfigError("unknown regressor '" + r + "' (expected linear or mlp)");
}

void check_format(const std::string& f) {
    if (f != "csv" && f != "table") throw ConfigError("unknown format '" + f + "'");
}

const Dataset& find_dataset(const std::vector<io::LoadedDataset>& datasets,
                            const std::string& name) {
    for (const auto& d : datasets)
        if (d.dataset.name() == name) return d.dataset;
    throw DataError("dataset '" + name + "' not found in manifest");
}

std::vector<const io::LoadedDataset*> select_targets(
    const std::vector<io::LoadedDataset>& datasets, const CommonOpts& opts) {
    std::vector<const io::LoadedDataset*> out;
    if (opts.targets.empty()) {
        for (const auto& d : datasets)
            if (d.dataset.name() != opts.base) out.push_back(&d);
    } else {
        for (const auto& name : split_list(opts.targets)) {
            const io::LoadedDataset* found = nullptr;
            for (const auto& d : datasets)
                if (d.dataset.name() == name) found = &d;
            if (!found) throw DataError("target '" + name + "' not found in manifest");
            out.push_back(found);
        }
    }
    if (out.empty()) throw DataError("no target datasets selected");
    std::sort(out.begin(), out.end(),
              [](const io::LoadedDataset* a, const io::LoadedDataset* b) {
                  return a->dataset.name() < b->dataset.name();
              });
    return out;
}

void ensure_writable_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "'");
    const fs::path probe = fs::path(dir) / ".dsg-write-probe";
    std::ofstream f(probe, std::ios::trunc);
    if (!f) throw ConfigError("output directory '" + dir + "' is not writable");
    f.close();
    fs::remove(probe, ec);
}

void maybe_write(const std::string& output_dir, const std::string& filename,
                 const std::string& content) {
    if (output_dir.empty()) return;
    ensure_writable_dir(output_dir);
    std::ofstream out(std::filesystem::path(output_dir) / filename, std::ios::trunc);
    out << content;
}

std::string measurements_table(const std::vector<pipeline::ShiftMeasurement>& ms) {
    std::string csv = pipeline::distances_csv(ms);
    std::stringstream ss(csv);
    std::string line, out;
    char buf[256];
    while (std::getline(ss, line)) {
        const auto cells = split_list(line);
        if (cells.size() == 4) {
            std::snprintf(buf, sizeof(buf), "%-14s %-20s %-16s %s\n", cells[0].c_str(),
                          cells[1].c_str(), cells[2].c_str(), cells[3].c_str());
            out += buf;
        }
    }
    return out;
}

int cmd_measure(const CommonOpts& opts) {
    check_format(opts.format);
    const auto methods = parse_methods(opts.methods);
    const auto datasets = io::load_manifest(opts.manifest);
    const Dataset& base = find_dataset(datasets, opts.base);
    const auto targets = select_targets(datasets, opts);

    pipeline::MeasureConfig cfg;
    cfg.seed = opts.seed;

    std::vector<pipeline::ShiftMeasurement> measurements;
    for (const auto* t : targets) {
        auto m = pipeline::measure(base, t->dataset, methods, cfg);
        m.group = t->group;
        measurements.push_back(std::move(m));
    }

    const std::string csv = pipeline::distances_csv(measurements);
    std::cout << (opts.format == "table" ? measurements_table(measurements) : csv);
    maybe_write(opts.output_dir, "distances.csv", csv);
    return 0;
}

int cmd_calibrate(const CommonOpts& opts) {
    if (opts.cal_group.empty()) throw ConfigError("calibrate requires --cal-group");
    if (!opts.val_group.empty() && opts.val_group == opts.cal_group)
        throw ConfigError("calibration/validation leakage");
    const auto methods = parse_methods(opts.methods);
    const auto datasets = io::load_manifest(opts.manifest);
    const Dataset& base = find_dataset(datasets, opts.base);
    if (!base.has_labels()) throw DataError("labels required: base dataset is unlabeled");

    std::vector<const io::LoadedDataset*> cal;
    for (const auto& d : datasets)
        if (d.group == opts.cal_group && d.dataset.name() != opts.base) cal.push_back(&d);
    if (cal.empty()) throw DataError("calibration group '" + opts.cal_group + "' is empty");
    std::sort(cal.begin(), cal.end(), [](auto* a, auto* b) {
        return a->dataset.name() < b->dataset.name();
    });

    pipeline::MeasureConfig mcfg;
    mcfg.seed = opts.seed;
    const bool wants_temp =
        std::find(methods.begin(), methods.end(), std::string("ac_tempscaling")) != methods.end();
    if (wants_temp)
        mcfg.base_temperature = confidence::fit_temperature(restrict(base, base.prob_classes()));

    std::vector<pipeline::ShiftMeasurement> measurements;
    for (const auto* t : cal) {
        auto m = pipeline::measure(base, t->dataset, methods, mcfg);
        m.group = t->group;
        measurements.push_back(std::move(m));
    }

    pipeline::FitConfig fcfg;
    fcfg.kind = parse_regressor(opts.regressor);
    fcfg.mlp.seed = opts.seed;

    const std::string out_dir = opts.output_dir.empty() ? "." : opts.output_dir;
    ensure_writable_dir(out_dir);
    for (const auto& method : methods) {
        auto p = pipeline::fit_predictor(measurements, method, fcfg);
        p.fitted_temperature = mcfg.base_temperature;
        const auto path = std::filesystem::path(out_dir) / ("predictor-" + method + ".json");
        pipeline::save_predictor(path, p);
        std::cout << "wrote " << path.string() << "\n";
    }
    return 0;
}

int cmd_predict(const CommonOpts& opts) {
    if (opts.predictor.empty()) throw ConfigError("predict requires --predictor");
    const auto p = pipeline::load_predictor(opts.predictor);
    const auto datasets = io::load_manifest(opts.manifest);
    const Dataset& base = find_dataset(datasets, opts.base);
    const auto targets = select_targets(datasets, opts);

    pipeline::MeasureConfig cfg;
    cfg.seed = opts.seed;
    cfg.base_temperature = p.fitted_temperature;

    std::string csv = "target,pred_acc\n";
    char buf[128];
    for (const auto* t : targets) {
        const auto m = pipeline::measure(base, t->dataset, {p.method}, cfg);
        std::snprintf(buf, sizeof(buf), "%s,%.12g\n", t->dataset.name().c_str(),
                      pipeline::predict_accuracy(p, m));
        csv += buf;
    }
    std::cout << csv;
    maybe_write(opts.output_dir, "predictions.csv", csv);
    return 0;
}

int cmd_evaluate(const CommonOpts& opts) {
    check_format(opts.format);
    const auto datasets = io::load_manifest(opts.manifest);

    if (!opts.predictor.empty()) {
        // evaluate one saved predictor on labeled targets
        const auto p = pipeline::load_predictor(opts.predictor);
        const Dataset& base = find_dataset(datasets, opts.base);
        CommonOpts sel = opts;
        if (sel.targets.empty() && !opts.val_group.empty()) {
            std::string names;
            for (const auto& d : datasets)
                if (d.group == opts.val_group && d.dataset.name() != opts.base)
                    names += (names.empty() ? "" : ",") + d.dataset.name();
            sel.targets = names;
        }
        const auto targets = select_targets(datasets, sel);

        pipeline::MeasureConfig cfg;
        cfg.seed = opts.seed;
        cfg.base_temperature = p.fitted_temperature;

        std::vector<pipeline::ShiftMeasurement> measurements;
        for (const auto* t : targets) {
            auto m = pipeline::measure(base, t->dataset, {p.method}, cfg);
            m.group = t->group;
            measurements.push_back(std::move(m));
        }
        const auto report = pipeline::evaluate(p, measurements);
        char buf[160];
        if (opts.format == "table") {
            std::snprintf(buf, sizeof(buf), "%-20s %10s %10s %10s\n", "target", "true_acc",
                          "pred_acc", "abs_err");
            std::cout << buf;
            for (const auto& row : report.rows) {
                std::snprintf(buf, sizeof(buf), "%-20s %10.4f %10.4f %10.4f\n",
                              row.target.c_str(), row.true_acc, row.pred_acc, row.abs_err);
                std::cout << buf;
            }
            std::snprintf(buf, sizeof(buf), "\nmae %.4f (std %.4f)\n", report.mae,
                          report.std_dev);
            std::cout << buf;
        } else {
            std::cout << pipeline::evaluation_csv(report);
            std::snprintf(buf, sizeof(buf), "mae,%.12g\nstd,%.12g\n", report.mae, report.std_dev);
            std::cout << buf;
        }
        maybe_write(opts.output_dir, "evaluation-" + p.method + ".csv",
                    pipeline::evaluation_csv(report));
        return 0;
    }

    // full protocol: calibrate on one group, evaluate on the other
    if (opts.cal_group.empty() || opts.val_group.empty())
        throw ConfigError("evaluate requires --predictor, or --cal-group and --val-group");
    const auto methods = parse_methods(opts.methods);
    pipeline::MeasureConfig mcfg;
    mcfg.seed = opts.seed;
    pipeline::FitConfig fcfg;
    fcfg.kind = parse_regressor(opts.regressor);
    fcfg.mlp.seed = opts.seed;

    const auto result = pipeline::run_protocol(datasets, opts.base, opts.cal_group,
                                               opts.val_group, methods, mcfg, fcfg);
    std::map<std::string, std::map<std::string, pipeline::EvaluationReport>> table_input;
    for (const auto& [method, rep] : result.reports) table_input[method][opts.val_group] = rep;
    std::cout << pipeline::summary_table(table_input);
    if (!opts.output_dir.empty()) {
        ensure_writable_dir(opts.output_dir);
        for (const auto& [method, rep] : result.reports)
            maybe_write(opts.output_dir, "evaluation-" + method + ".csv",
                        pipeline::evaluation_csv(rep));
    }
    return 0;
}

int cmd_demo(const CommonOpts& opts, bool methods_given) {
    const std::string out_dir = opts.output_dir.empty() ? "demo-out" : opts.output_dir;
    ensure_writable_dir(out_dir);

    workbench::DemoConfig cfg;
    if (methods_given) cfg.methods = parse_methods(opts.methods);
    cfg.fit.kind = parse_regressor(opts.regressor);
    cfg.fit.mlp.seed = opts.seed;

    const auto demo = workbench::run_demo(opts.seed, cfg);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "base accuracy: %.4f\n\n", demo.base_accuracy);
    std::cout << buf << demo.table;
    workbench::write_demo_artifacts(demo, out_dir);
    std::cout << "\nartifacts written to " << out_dir << "\n";
    return 0;
}

int cmd_inspect(const CommonOpts& opts) {
    const auto datasets = io::load_manifest(opts.manifest);
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-20s %-10s %8s %8s %8s %-8s %s\n", "name", "group", "rows",
                  "dims", "classes", "labeled", "label-space");
    std::cout << buf;
    for (const auto& d : datasets) {
        const Dataset& ds = d.dataset;
        std::string dims = ds.has_features() ? std::to_string(ds.features().cols()) : "-";
        std::string ids;
        const auto& ls = ds.prob_classes();
        for (std::size_t i = 0; i < std::min<std::size_t>(ls.size(), 6); ++i)
            ids += (i ? "," : "") + std::to_string(ls.at(i));
        if (ls.size() > 6) ids += ",...";
        std::snprintf(buf, sizeof(buf), "%-20s %-10s %8zu %8s %8zu %-8s {%s}\n",
                      ds.name().c_str(), d.group.c_str(), ds.size(), dims.c_str(),
                      ds.num_classes(), ds.has_labels() ? "yes" : "no", ids.c_str());
        std::cout << buf;
    }
    return 0;
}

void add_common(CLI::App* sub, CommonOpts& opts, bool needs_manifest) {
    if (needs_manifest)
        sub->add_option("--manifest", opts.manifest, "manifest JSON path")->required();
    sub->add_option("--base", opts.base, "base dataset name");
    sub->add_option("--targets", opts.targets, "comma-separated target names");
    sub->add_option("--methods", opts.methods, "comma-separated methods or 'all'");
    sub->add_option("--regressor", opts.regressor, "linear|mlp");
    sub->add_option("--cal-group", opts.cal_group, "calibration group tag");
    sub->add_option("--val-group", opts.val_group, "validation group tag");
    sub->add_option("--predictor", opts.predictor, "predictor JSON path");
    sub->add_option("--seed", opts.seed, "random seed (default 0)");
    sub->add_option("--output-dir", opts.output_dir, "directory for written artifacts");
    sub->add_option("--format", opts.format, "csv|table");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"difference measures, accuracy-gap calibration, and accuracy prediction\n"
                 "for classifiers under distribution shift"};
    app.require_subcommand(1);

    CommonOpts opts;
    auto* measure = app.add_subcommand("measure", "distance features for (base, target) pairs");
    add_common(measure, opts, true);
    auto* calibrate = app.add_subcommand("calibrate", "fit gap predictors on a calibration group");
    add_common(calibrate, opts, true);
    auto* predict = app.add_subcommand("predict", "predict accuracy on (unlabeled) targets");
    add_common(predict, opts, true);
    auto* evaluate = app.add_subcommand("evaluate", "score predictions against labeled targets");
    add_common(evaluate, opts, true);
    auto* demo = app.add_subcommand("demo", "synthetic end-to-end protocol run");
    add_common(demo, opts, false);
    auto* inspect = app.add_subcommand("inspect", "print dataset shapes and label spaces");
    add_common(inspect, opts, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (measure->parsed()) {
            if (opts.base.empty()) throw dsg::ConfigError("measure requires --base");
            return cmd_measure(opts);
        }
        if (calibrate->parsed()) {
            if (opts.base.empty()) throw dsg::ConfigError("calibrate requires --base");
            return cmd_calibrate(opts);
        }
        if (predict->parsed()) {
            if (opts.base.empty()) throw dsg::ConfigError("predict requires --base");
            return cmd_predict(opts);
        }
        if (evaluate->parsed()) {
            if (opts.base.empty()) throw dsg::ConfigError("evaluate requires --base");
            return cmd_evaluate(opts);
        }
        if (demo->parsed()) return cmd_demo(opts, demo->count("--methods") > 0);
        if (inspect->parsed()) return cmd_inspect(opts);
    } catch (const dsg::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const dsg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
