#include "dsg/io/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "dsg/error.hpp"
#include "dsg/io/tensor_file.hpp"

namespace dsg::io {

using nlohmann::json;

std::vector<ManifestEntry> parse_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("datasets") || !doc["datasets"].is_array())
        throw DataError("manifest must be an object with a 'datasets' array");

    std::vector<ManifestEntry> entries;
    std::set<std::string> seen;
    for (const auto& item : doc["datasets"]) {
        ManifestEntry e;
        try {
            e.name = item.at("name").get<std::string>();
            e.group = item.value("group", std::string{});
            if (item.contains("features")) e.features_path = item["features"].get<std::string>();
            e.probabilities_path = item.at("probabilities").get<std::string>();
            if (item.contains("labels")) e.labels_path = item["labels"].get<std::string>();
            e.class_ids = item.at("class_ids").get<std::vector<ClassId>>();
        } catch (const json::exception& ex) {
            throw DataError("bad manifest entry: " + std::string(ex.what()));
        }
        if (!seen.insert(e.name).second)
            throw DataError("duplicate dataset name '" + e.name + "' in manifest");
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<LoadedDataset> load_manifest(const std::filesystem::path& path) {
    const auto entries = parse_manifest(path);
    const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : dir / fp;
    };

    std::vector<LoadedDataset> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        Matrix probs = read_tensor(resolve(e.probabilities_path)).as_matrix();
        std::optional<Matrix> feats;
        if (e.features_path) feats = read_tensor(resolve(*e.features_path)).as_matrix();
        std::optional<std::vector<ClassId>> labels;
        if (e.labels_path) labels = read_tensor(resolve(*e.labels_path)).as_labels();
        out.push_back(LoadedDataset{
            Dataset(e.name, std::move(feats), std::move(probs), LabelSpace(e.class_ids),
                    std::move(labels)),
            e.group});
    }
    return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
    json doc;
    doc["datasets"] = json::array();
    for (const auto& e : entries) {
        json item;
        item["name"] = e.name;
        item["group"] = e.group;
        if (e.features_path) item["features"] = *e.features_path;
        item["probabilities"] = e.probabilities_path;
        if (e.labels_path) item["labels"] = *e.labels_path;
        item["class_ids"] = e.class_ids;
        doc["datasets"].push_back(std::move(item));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out << doc.dump(2) << "\n";
}

} // namespace dsg::io
