#include "fcdnet/checkpoint.hpp"

#include "fcdnet/errors.hpp"

#include <json.hpp>

namespace fcdnet {

using nlohmann::json;

Checkpoint make_checkpoint(FcdNet& model, const RunConfig& config) {
    Checkpoint c;
    c.config = config;
    c.config.model = model.config();
    c.nodes = model.config().nodes;
    c.features = model.config().features;
    c.stats = model.stats();
    for (const Parameter* p : model.parameters()) c.parameters.push_back({p->name, p->value});
    return c;
}

std::string checkpoint_json(const Checkpoint& ckpt) {
    json j;
    j["format"] = "fcdnet-checkpoint";
    j["version"] = 1;
    j["config"] = format_config(ckpt.config);
    j["nodes"] = ckpt.nodes;
    j["features"] = ckpt.features;
    j["stats"] = {{"mean", ckpt.stats.mean}, {"std", ckpt.stats.std}};
    json params = json::array();
    for (const NamedTensor& p : ckpt.parameters) {
        params.push_back({{"name", p.name},
                          {"shape", p.value.shape()},
                          {"values", std::vector<double>(p.value.values().begin(), p.value.values().end())}});
    }
    j["parameters"] = std::move(params);
    return j.dump() + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
    try {
        const json j = json::parse(text);
        if (j.at("format") != "fcdnet-checkpoint" || j.at("version") != 1) {
            throw DataError("checkpoint: unsupported format or version");
        }
        Checkpoint c;
        c.config = parse_config(j.at("config").get<std::string>(), "<checkpoint config>");
        c.nodes = j.at("nodes").get<std::size_t>();
        c.features = j.at("features").get<std::size_t>();
        c.config.model.nodes = c.nodes;
        c.config.model.features = c.features;
        c.stats.mean = j.at("stats").at("mean").get<std::vector<double>>();
        c.stats.std = j.at("stats").at("std").get<std::vector<double>>();
        for (const json& p : j.at("parameters")) {
            Shape shape = p.at("shape").get<Shape>();
            std::vector<double> values = p.at("values").get<std::vector<double>>();
            if (shape_size(shape) != values.size()) throw DataError("checkpoint: value count does not match shape");
            c.parameters.push_back({p.at("name").get<std::string>(), Tensor(std::move(shape), std::move(values))});
        }
        return c;
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint: malformed file: ") + e.what());
    }
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) { data::write_text(path, checkpoint_json(ckpt)); }

Checkpoint load_checkpoint(const std::string& path) { return parse_checkpoint(data::read_text(path)); }

void apply_checkpoint(FcdNet& model, const Checkpoint& ckpt) {
    const auto params = model.parameters();
    if (params.size() != ckpt.parameters.size()) {
        throw ShapeError("checkpoint holds " + std::to_string(ckpt.parameters.size()) + " parameters, model has " +
                         std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const NamedTensor& stored = ckpt.parameters[i];
        if (stored.name != params[i]->name || stored.value.shape() != params[i]->value.shape()) {
            throw ShapeError("checkpoint parameter " + stored.name + " " + shape_string(stored.value.shape()) +
                             " does not match model parameter " + params[i]->name + " " +
                             shape_string(params[i]->value.shape()));
        }
        params[i]->value = stored.value;
    }
}

} // namespace fcdnet
