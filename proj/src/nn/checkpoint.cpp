#include "hamreg/nn/checkpoint.hpp"

#include <fstream>

namespace hamreg::nn {

using nlohmann::json;

json to_json(const Checkpoint& ck) {
    json j;
    j["layer_sizes"] = ck.params.layer_sizes();
    json weights = json::array();
    json biases = json::array();
    for (std::size_t l = 0; l < ck.params.num_layers(); ++l) {
        const Matrix& w = ck.params.weights[l];
        std::vector<double> row_major;
        row_major.reserve(static_cast<std::size_t>(w.size()));
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) row_major.push_back(w(r, c));
        weights.push_back(row_major);
        const Vector& b = ck.params.biases[l];
        biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    j["model"] = ck.model;
    j["system"] = ck.system;
    j["coords"] = ck.coords;
    if (!ck.scheme.empty()) j["scheme"] = ck.scheme;
    if (ck.lambda_h) j["lambda_h"] = *ck.lambda_h;
    if (ck.seed) j["seed"] = *ck.seed;
    return j;
}

Checkpoint checkpoint_from_json(const json& j) {
    try {
        Checkpoint ck;
        const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
        const auto& weights = j.at("weights");
        const auto& biases = j.at("biases");
        if (sizes.size() < 2 || weights.size() + 1 != sizes.size() || biases.size() + 1 != sizes.size()) {
            throw IoError("checkpoint: layer_sizes disagree with weights/biases");
        }
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            const auto w = weights[l].get<std::vector<double>>();
            const auto b = biases[l].get<std::vector<double>>();
            const auto rows = static_cast<std::size_t>(sizes[l + 1]);
            const auto cols = static_cast<std::size_t>(sizes[l]);
            if (w.size() != rows * cols || b.size() != rows) throw IoError("checkpoint: layer " + std::to_string(l) + " has wrong size");
            Matrix wm(sizes[l + 1], sizes[l]);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c) wm(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = w[r * cols + c];
            ck.params.weights.push_back(std::move(wm));
            ck.params.biases.push_back(Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size())));
        }
        ck.model = j.at("model").get<std::string>();
        ck.system = j.at("system").get<std::string>();
        ck.coords = j.at("coords").get<std::string>();
        if (j.contains("scheme")) ck.scheme = j["scheme"].get<std::string>();
        if (j.contains("lambda_h")) ck.lambda_h = j["lambda_h"].get<double>();
        if (j.contains("seed")) ck.seed = j["seed"].get<long>();
        return ck;
    } catch (const json::exception& e) {
        throw IoError(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json(ck).dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return checkpoint_from_json(j);
}

}  // namespace hamreg::nn
