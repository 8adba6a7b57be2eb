// End-to-end checks of the command-line surface: exit codes, CSV contracts,
// and agreement between the CLI path and the library path on the same files.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dsg/io/manifest.hpp"
#include "dsg/io/tensor_file.hpp"
#include "dsg/pipeline/pipeline.hpp"
#include "dsg/rng.hpp"
#include "dsg/workbench/workbench.hpp"

using namespace dsg;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const fs::path out_file = fs::temp_directory_path() / "dsg-cli-out.txt";
    const std::string cmd = std::string(DSG_CLI_PATH) + " " + args + " > " + out_file.string() +
                            " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

/// Small world with an intensity-0 calibration anchor, an unlabeled copy of
/// it, and a featureless dataset, written as manifest + tensors.
struct World {
    fs::path dir;
    double base_acc = 0.0;
    double doc_null = 0.0; // library-path DoC(base, null target)
};

World build_world() {
    World w;
    w.dir = fs::temp_directory_path() / "dsg-cli-world";
    fs::remove_all(w.dir);
    fs::create_directories(w.dir);

    workbench::TaskConfig tcfg;
    tcfg.n_per_split = 800;
    tcfg.search_max_iter = 150;
    tcfg.classifier_max_iter = 600;
    const auto bundle = workbench::gen_task(21, 8, 16, tcfg);
    const auto ref = workbench::train_reference_classifier(bundle, tcfg);

    const Dataset base("base", ref.test.features(), ref.test.probabilities(),
                       ref.test.prob_classes(), ref.test.labels());
    w.base_acc = accuracy(restrict(base, base.prob_classes()));

    std::vector<io::LoadedDataset> datasets;
    datasets.push_back({base, "base"});

    workbench::ShiftFamily noise{workbench::ShiftFamily::Kind::feature_noise,
                                 {0.0, 0.4, 0.8, 1.2, 1.6}, 3};
    for (std::size_t gi = 0; gi < noise.intensity_grid.size(); ++gi)
        for (std::size_t si = 0; si < 2; ++si) {
            const std::string name = "noise-g" + std::to_string(gi) + "-s" + std::to_string(si);
            datasets.push_back({workbench::apply_shift(bundle.task, ref.model, noise,
                                                       noise.intensity_grid[gi], 500,
                                                       derive_seed(100, name), name),
                                "noise"});
        }

    workbench::ShiftFamily cov{workbench::ShiftFamily::Kind::covariance_scale, {1.0, 2.0}, 5};
    for (std::size_t gi = 0; gi < cov.intensity_grid.size(); ++gi) {
        const std::string name = "cov-g" + std::to_string(gi);
        datasets.push_back({workbench::apply_shift(bundle.task, ref.model, cov,
                                                   cov.intensity_grid[gi], 500,
                                                   derive_seed(200, name), name),
                            "val"});
    }

    // a fresh intensity-0 draw, kept unlabeled, for the predict path
    const Dataset null_labeled = workbench::apply_shift(bundle.task, ref.model, noise, 0.0, 600,
                                                        derive_seed(300, "null"), "null-target");
    const Dataset null_unlabeled("null-target", null_labeled.features(),
                                 null_labeled.probabilities(), null_labeled.prob_classes(),
                                 std::nullopt);
    w.doc_null = confidence::doc(base, null_unlabeled);
    datasets.push_back({null_unlabeled, "unlabeled"});

    // probabilities-only dataset: feature-based methods must fail cleanly
    const Dataset no_features("nofeat", std::nullopt, null_labeled.probabilities(),
                              null_labeled.prob_classes(), null_labeled.labels());
    datasets.push_back({no_features, "misc"});

    std::vector<io::ManifestEntry> entries;
    for (const auto& d : datasets) {
        io::ManifestEntry e;
        e.name = d.dataset.name();
        e.group = d.group;
        e.probabilities_path = e.name + ".probs.dsg";
        io::write_tensor(w.dir / e.probabilities_path, d.dataset.probabilities());
        if (d.dataset.has_features()) {
            e.features_path = e.name + ".features.dsg";
            io::write_tensor(w.dir / *e.features_path, d.dataset.features());
        }
        if (d.dataset.has_labels()) {
            e.labels_path = e.name + ".labels.dsg";
            io::write_tensor(w.dir / *e.labels_path, d.dataset.labels());
        }
        e.class_ids = d.dataset.prob_classes().ids();
        entries.push_back(std::move(e));
    }
    io::write_manifest(w.dir / "manifest.json", entries);
    return w;
}

const World& world() {
    static World w = build_world();
    return w;
}

std::string manifest_arg() { return "--manifest " + (world().dir / "manifest.json").string(); }

} // namespace

TEST_CASE("inspect lists every dataset") {
    const auto r = run_cli("inspect " + manifest_arg());
    CHECK(r.exit_code == 0);
    for (const char* name : {"base", "noise-g0-s0", "null-target", "nofeat"})
        CHECK(r.out.find(name) != std::string::npos);
}

TEST_CASE("measure against itself reports DoC 0 and emits valid CSV") {
    const auto r = run_cli("measure " + manifest_arg() + " --base base --targets base --methods doc");
    CHECK(r.exit_code == 0);
    CHECK(r.out.rfind("base,target,method,value\n", 0) == 0);
    CHECK(r.out.find("base,base,doc,0\n") != std::string::npos);
}

TEST_CASE("measure csv has one row per (target, method)") {
    const auto r = run_cli("measure " + manifest_arg() +
                           " --base base --targets noise-g0-s0,noise-g1-s0 --methods doc,mmd,ac");
    CHECK(r.exit_code == 0);
    std::size_t rows = 0;
    std::stringstream ss(r.out);
    std::string line;
    while (std::getline(ss, line)) ++rows;
    CHECK(rows == 1 + 2 * 3);
}

TEST_CASE("missing features for frechet exits 3 and names the method") {
    const auto r = run_cli("measure " + manifest_arg() +
                           " --base base --targets nofeat --methods frechet");
    CHECK(r.exit_code == 3);
    CHECK(r.out.find("frechet requires features") != std::string::npos);
}

TEST_CASE("unknown method exits 2") {
    const auto r = run_cli("measure " + manifest_arg() + " --base base --methods bogus");
    CHECK(r.exit_code == 2);
}

TEST_CASE("format flag selects table output and rejects unknown values") {
    const auto t = run_cli("measure " + manifest_arg() +
                           " --base base --targets noise-g0-s0 --methods doc --format table");
    CHECK(t.exit_code == 0);
    CHECK(t.out.find("doc") != std::string::npos);
    CHECK(t.out.find("base,target,method,value") == std::string::npos);

    const auto bad = run_cli("measure " + manifest_arg() +
                             " --base base --targets noise-g0-s0 --methods doc --format bogus");
    CHECK(bad.exit_code == 2);
}

TEST_CASE("calibrate writes predictors; leakage exits 2") {
    const fs::path out = world().dir / "predictors";
    const auto r = run_cli("calibrate " + manifest_arg() +
                           " --base base --cal-group noise --methods doc,ac --output-dir " +
                           out.string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(out / "predictor-doc.json"));
    CHECK(fs::exists(out / "predictor-ac.json"));

    const auto leak = run_cli("calibrate " + manifest_arg() +
                              " --base base --cal-group noise --val-group noise");
    CHECK(leak.exit_code == 2);
}

TEST_CASE("predict works on the unlabeled null target and lands near base accuracy") {
    const fs::path out = world().dir / "predictors";
    run_cli("calibrate " + manifest_arg() +
            " --base base --cal-group noise --methods doc --output-dir " + out.string());
    const auto r = run_cli("predict " + manifest_arg() + " --base base --targets null-target" +
                           " --predictor " + (out / "predictor-doc.json").string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.rfind("target,pred_acc\n", 0) == 0);

    double pred = -1.0;
    std::sscanf(r.out.c_str(), "target,pred_acc\nnull-target,%lf", &pred);
    CHECK(std::abs(pred - world().base_acc) <= 0.03);

    // CLI and library agree on the underlying measurement
    const auto datasets = io::load_manifest(world().dir / "manifest.json");
    const Dataset* base = nullptr;
    const Dataset* null_t = nullptr;
    for (const auto& d : datasets) {
        if (d.dataset.name() == "base") base = &d.dataset;
        if (d.dataset.name() == "null-target") null_t = &d.dataset;
    }
    REQUIRE(base);
    REQUIRE(null_t);
    CHECK(confidence::doc(*base, *null_t) == doctest::Approx(world().doc_null).epsilon(1e-12));

    // repeated prediction is byte-identical
    const auto again = run_cli("predict " + manifest_arg() + " --base base --targets null-target" +
                               " --predictor " + (out / "predictor-doc.json").string());
    CHECK(again.out == r.out);
}

TEST_CASE("evaluate with a saved predictor prints rows and mae; unlabeled targets exit 3") {
    const fs::path out = world().dir / "predictors";
    run_cli("calibrate " + manifest_arg() +
            " --base base --cal-group noise --methods doc --output-dir " + out.string());
    const auto r = run_cli("evaluate " + manifest_arg() + " --base base --val-group val" +
                           " --predictor " + (out / "predictor-doc.json").string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.rfind("target,true_acc,pred_acc,abs_err\n", 0) == 0);
    CHECK(r.out.find("mae,") != std::string::npos);

    const auto bad = run_cli("evaluate " + manifest_arg() + " --base base --targets null-target" +
                             " --predictor " + (out / "predictor-doc.json").string());
    CHECK(bad.exit_code == 3);
    CHECK(bad.out.find("labels required") != std::string::npos);
}

TEST_CASE("evaluate protocol path prints the method x group table") {
    const auto r = run_cli("evaluate " + manifest_arg() +
                           " --base base --cal-group noise --val-group val --methods doc,base_acc");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("method") != std::string::npos);
    CHECK(r.out.find("doc") != std::string::npos);
    CHECK(r.out.find("base_acc") != std::string::npos);

    const auto leak = run_cli("evaluate " + manifest_arg() +
                              " --base base --cal-group val --val-group val --methods doc");
    CHECK(leak.exit_code == 2);
}

TEST_CASE("malformed manifest exits 3 without crashing") {
    const fs::path bad = world().dir / "broken.json";
    std::ofstream(bad) << "{ not json";
    const auto r = run_cli("measure --manifest " + bad.string() + " --base base --methods doc");
    CHECK(r.exit_code == 3);
}

TEST_CASE("unwritable output directory exits 2") {
    const auto r = run_cli("demo --seed 1 --output-dir /proc/dsg-cannot-write-here");
    CHECK(r.exit_code == 2);
}

TEST_CASE("demo prints every method and its artifacts replay through the CLI") {
    const fs::path out = fs::temp_directory_path() / "dsg-cli-demo";
    fs::remove_all(out);
    const auto r = run_cli("demo --seed 6 --output-dir " + out.string());
    CHECK(r.exit_code == 0);
    for (const auto& method : pipeline::all_methods())
        CHECK(r.out.find(method) != std::string::npos);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "summary.txt"));
    CHECK(fs::exists(out / "distances.csv"));

    // the written world re-enters through the loader and the CLI agrees with
    // the library on a measurement over it
    const auto datasets = io::load_manifest(out / "manifest.json");
    const Dataset* base = nullptr;
    const Dataset* target = nullptr;
    for (const auto& d : datasets) {
        if (d.dataset.name() == "base") base = &d.dataset;
        if (d.dataset.name() == "noise-g3-s1") target = &d.dataset;
    }
    REQUIRE(base);
    REQUIRE(target);
    const double lib_doc = confidence::doc(*base, *target);

    const auto m = run_cli("measure --manifest " + (out / "manifest.json").string() +
                           " --base base --targets noise-g3-s1 --methods doc");
    CHECK(m.exit_code == 0);
    double cli_doc = 1e9;
    std::sscanf(m.out.c_str(), "base,target,method,value\nbase,noise-g3-s1,doc,%lf", &cli_doc);
    CHECK(cli_doc == doctest::Approx(lib_doc).epsilon(1e-9));
    fs::remove_all(out);
}

TEST_CASE("missing required flags exit 2") {
    CHECK(run_cli("measure " + manifest_arg()).exit_code == 2); // no --base
    CHECK(run_cli("measure --base base --methods doc").exit_code == 2); // no --manifest
    CHECK(run_cli("").exit_code == 2); // no subcommand
}
