#pragma once

#include "fcdnet/config.hpp"
#include "fcdnet/model.hpp"

#include <string>
#include <vector>

namespace fcdnet {

struct NamedTensor {
    std::string name;
    Tensor value;
};

/// Everything needed to rebuild a trained model against its dataset.
/// The long-term extractor's preprocessed tensors are recomputed from the
/// training split on load; they are a pure function of the data.
struct Checkpoint {
    RunConfig config;
    std::size_t nodes = 0;
    std::size_t features = 0;
    data::NormStats stats;
    std::vector<NamedTensor> parameters;
};

Checkpoint make_checkpoint(FcdNet& model, const RunConfig& config);
std::string checkpoint_json(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Copies stored values into the model; names and shapes must match exactly.
void apply_checkpoint(FcdNet& model, const Checkpoint& ckpt);

} // namespace fcdnet
