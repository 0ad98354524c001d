#include "purify/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "purify/errors.hpp"

namespace purify {

using nlohmann::json;

void save_checkpoint(const Mlp& model, const std::string& path, std::uint64_t training_seed) {
    json j;
    j["schema_version"] = 1;
    j["layer_dims"] = model.layer_dims();
    j["time_embedding_dim"] = model.time_embedding_dim();
    j["training_seed"] = training_seed;
    json layers = json::array();
    for (int l = 0; l < model.num_layers(); ++l) {
        const Tensor& w = model.weight(l);
        json wj = json::array();
        for (std::size_t i = 0; i < w.rows(); ++i) {
            auto row = w.row(i);
            wj.push_back(std::vector<double>(row.begin(), row.end()));
        }
        json entry = json::array();
        entry.push_back(std::move(wj));
        entry.push_back(model.bias(l).data);
        layers.push_back(std::move(entry));
    }
    j["weights"] = std::move(layers);

    std::ofstream out(path);
    if (!out) throw DataError("save_checkpoint: cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_checkpoint: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("load_checkpoint: " + path + " is not valid JSON: " + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1) {
        throw DataError("load_checkpoint: " + path + " has unsupported schema_version");
    }

    LoadedCheckpoint ck;
    const auto dims = j.at("layer_dims").get<std::vector<int>>();
    const int time_dim = j.at("time_embedding_dim").get<int>();
    ck.training_seed = j.at("training_seed").get<std::uint64_t>();
    ck.model = Mlp(dims, time_dim, /*init_seed=*/0);

    const json& layers = j.at("weights");
    if (static_cast<int>(layers.size()) != ck.model.num_layers()) {
        throw DataError("load_checkpoint: " + path + " has " + std::to_string(layers.size()) +
                        " layers, layer_dims implies " + std::to_string(ck.model.num_layers()));
    }
    for (int l = 0; l < ck.model.num_layers(); ++l) {
        const json& entry = layers[static_cast<std::size_t>(l)];
        const json& wj = entry.at(0);
        Tensor& w = ck.model.mutable_weight(l);
        if (wj.size() != w.rows()) {
            throw DataError("load_checkpoint: layer " + std::to_string(l) + " weight rows " +
                            std::to_string(wj.size()) + " vs expected " + std::to_string(w.rows()));
        }
        for (std::size_t i = 0; i < w.rows(); ++i) {
            const auto row = wj[i].get<std::vector<double>>();
            if (row.size() != w.cols()) {
                throw DataError("load_checkpoint: layer " + std::to_string(l) + " weight cols " +
                                std::to_string(row.size()) + " vs expected " +
                                std::to_string(w.cols()));
            }
            std::copy(row.begin(), row.end(), w.row(i).begin());
        }
        const auto bias = entry.at(1).get<std::vector<double>>();
        Tensor& b = ck.model.mutable_bias(l);
        if (bias.size() != b.size()) {
            throw DataError("load_checkpoint: layer " + std::to_string(l) + " bias size " +
                            std::to_string(bias.size()) + " vs expected " +
                            std::to_string(b.size()));
        }
        b.data = bias;
    }
    ck.model.bump_version();
    return ck;
}

}  // namespace purify
