#pragma once

#include "fcdnet/data.hpp"
#include "fcdnet/model.hpp"
#include "fcdnet/training.hpp"

#include <string>
#include <vector>

namespace fcdnet {

struct DataSection {
    std::string path;
    std::string sample_rate = "unspecified";
    data::SplitFractions split;
};

/// Everything a `train` run needs besides the dataset itself.
///
/// Text form: `[data]`, `[model]` and `[train]` sections of `key = value`
/// lines; `#` starts a comment. Unknown sections and keys are errors.
/// Node and feature counts come from the dataset, not from the file.
struct RunConfig {
    DataSection data;
    ModelConfig model;
    train::TrainConfig train;

    data::FormatDescriptor format() const;
};

RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

// `section.key=value`, same rules as the file.
void apply_override(RunConfig& config, const std::string& assignment);

// Every key with its resolved value; parse_config(format_config(c)) == c.
std::string format_config(const RunConfig& config);

std::vector<std::string> config_keys();

} // namespace fcdnet
