#include "dsg/pipeline/predictor_io.hpp"

#include <fstream>

#include <json.hpp>

#include "dsg/io/tensor_file.hpp"

namespace dsg::pipeline {

using nlohmann::json;

namespace {

std::string stem_of(const std::filesystem::path& json_path) {
    return json_path.stem().string();
}

} // namespace

void save_predictor(const std::filesystem::path& json_path, const AccuracyPredictor& p) {
    const auto dir = json_path.has_parent_path() ? json_path.parent_path()
                                                 : std::filesystem::path(".");
    const std::string stem = stem_of(json_path);

    json doc;
    doc["method"] = p.method;
    doc["regressor"] = p.linear ? "linear" : (p.mlp ? "mlp" : "none");

    if (p.fitted_temperature) {
        const std::string name = stem + ".temperature.dsg";
        io::write_tensor(dir / name, std::vector<double>{p.fitted_temperature->t});
        doc["temperature"] = name;
    }
    if (p.linear) {
        std::vector<double> coef = p.linear->weights;
        coef.push_back(p.linear->bias);
        const std::string name = stem + ".linear.dsg";
        io::write_tensor(dir / name, coef);
        doc["linear_coef"] = name;
    }
    if (p.mlp) {
        json files = json::array();
        for (int l = 0; l < 4; ++l) {
            const std::string wname = stem + ".mlp_w" + std::to_string(l) + ".dsg";
            const std::string bname = stem + ".mlp_b" + std::to_string(l) + ".dsg";
            io::write_tensor(dir / wname, p.mlp->w[l]);
            io::write_tensor(dir / bname, p.mlp->b[l]);
            files.push_back(wname);
            files.push_back(bname);
        }
        std::vector<double> norm = p.mlp->in_shift;
        norm.insert(norm.end(), p.mlp->in_scale.begin(), p.mlp->in_scale.end());
        norm.push_back(p.mlp->target_shift);
        const std::string nname = stem + ".mlp_norm.dsg";
        io::write_tensor(dir / nname, norm);
        doc["mlp_layers"] = files;
        doc["mlp_norm"] = nname;
    }

    std::ofstream out(json_path, std::ios::trunc);
    if (!out) throw DataError("cannot open '" + json_path.string() + "' for writing");
    out << doc.dump(2) << "\n";
}

AccuracyPredictor load_predictor(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw DataError("cannot open predictor '" + json_path.string() + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("predictor file is not valid JSON: " + std::string(e.what()));
    }
    const auto dir = json_path.has_parent_path() ? json_path.parent_path()
                                                 : std::filesystem::path(".");

    AccuracyPredictor p;
    try {
        p.method = doc.at("method").get<std::string>();
        if (!is_method(p.method)) throw DataError("unknown method '" + p.method + "' in predictor");

        if (doc.contains("temperature")) {
            const auto v = io::read_tensor(dir / doc["temperature"].get<std::string>()).as_vector();
            if (v.size() != 1) throw DataError("bad temperature tensor");
            p.fitted_temperature = confidence::Temperature{v[0]};
        }
        const std::string kind = doc.at("regressor").get<std::string>();
        if (kind == "linear") {
            p.kind = RegressorKind::linear;
            auto coef = io::read_tensor(dir / doc.at("linear_coef").get<std::string>()).as_vector();
            if (coef.empty()) throw DataError("empty linear coefficient tensor");
            learn::LinearRegressor r;
            r.bias = coef.back();
            coef.pop_back();
            r.weights = std::move(coef);
            p.linear = std::move(r);
        } else if (kind == "mlp") {
            p.kind = RegressorKind::mlp;
            const auto files = doc.at("mlp_layers").get<std::vector<std::string>>();
            if (files.size() != 8) throw DataError("mlp predictor must list 8 layer tensors");
            learn::MlpRegressor mlp;
            for (int l = 0; l < 4; ++l) {
                mlp.w.push_back(io::read_tensor(dir / files[2 * l]).as_matrix());
                mlp.b.push_back(io::read_tensor(dir / files[2 * l + 1]).as_vector());
            }
            auto norm = io::read_tensor(dir / doc.at("mlp_norm").get<std::string>()).as_vector();
            if (norm.size() % 2 != 1) throw DataError("bad mlp normalization tensor");
            const std::size_t m = (norm.size() - 1) / 2;
            mlp.in_shift.assign(norm.begin(), norm.begin() + static_cast<std::ptrdiff_t>(m));
            mlp.in_scale.assign(norm.begin() + static_cast<std::ptrdiff_t>(m),
                                norm.begin() + static_cast<std::ptrdiff_t>(2 * m));
            mlp.target_shift = norm.back();
            if (mlp.w[0].cols() != m) throw DataError("mlp layer/normalization size mismatch");
            for (int l = 0; l < 4; ++l) {
                if (mlp.b[l].size() != mlp.w[l].rows())
                    throw DataError("mlp bias/weight shape mismatch");
                if (l > 0 && mlp.w[l].cols() != mlp.w[l - 1].rows())
                    throw DataError("mlp layer shapes do not chain");
            }
            if (mlp.w[3].rows() != 1) throw DataError("mlp output layer must have one unit");
            p.mlp = std::move(mlp);
        } else if (kind != "none") {
            throw DataError("unknown regressor kind '" + kind + "'");
        }
    } catch (const json::exception& e) {
        throw DataError("bad predictor file: " + std::string(e.what()));
    }
    return p;
}

} // namespace dsg::pipeline
