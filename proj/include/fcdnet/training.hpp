#pragma once

#include "fcdnet/autograd.hpp"
#include "fcdnet/data.hpp"
#include "fcdnet/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fcdnet::train {

struct TrainConfig {
    double lr0 = 3e-3;
    double decay = 0.1;
    std::size_t decay_every = 10;
    double lr_min = 3e-5;
    std::size_t epochs = 250;
    double clip_norm = 5.0;
    std::uint64_t seed = 0;
    bool shuffle = true;

    void validate() const;
};

// max(lr0 * decay^floor(epoch / decay_every), lr_min).
double lr_schedule(std::size_t epoch, const TrainConfig& config = {});

// Expands a per-(b, e, n) mask to every feature of a [B, E, N, D] target.
Tensor expand_mask(const std::vector<std::uint8_t>& mask, const Shape& target_shape);

/// sum(mask |pred - target|) / sum(mask). Masked entries are skipped outright,
/// so their targets cannot reach the value or the gradient.
Var masked_mae(const Var& pred, const Tensor& target, const Tensor& mask);

struct MetricValues {
    double mae = 0.0;
    double rmse = 0.0;
    std::optional<double> mape;  // percent; absent without nonzero observed targets
    std::size_t points = 0;
    std::size_t mape_points = 0;
};

struct MetricReport {
    std::vector<MetricValues> horizons;
    MetricValues average;
    std::size_t masked_points = 0;
};

/// Pools masked error sums over batches of [B, E, N, D] predictions.
class MetricAccumulator {
public:
    void add(const Tensor& pred, const Tensor& target, const Tensor& mask);
    MetricReport report() const;

private:
    struct Sums {
        double abs = 0.0, sq = 0.0, pct = 0.0;
        std::size_t points = 0, pct_points = 0;
    };
    std::vector<Sums> per_horizon_;
    std::size_t masked_ = 0;
};

MetricReport metrics(const Tensor& pred, const Tensor& target, const Tensor& mask);

struct EpochLog {
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_mae = 0.0;
    double val_mae = 0.0;
    double val_rmse = 0.0;
    std::optional<double> val_mape;
    double wall_seconds = 0.0;
};

std::string log_header();
// wall_seconds is left out when `with_time` is false so logs compare bitwise.
std::string format_log_row(const EpochLog& row, bool with_time = true);

struct TrainResult {
    std::vector<EpochLog> log;
    std::optional<std::size_t> best_epoch;
    double best_val_mae = 0.0;
};

struct Dataset {
    data::SeriesFrame raw;
    data::SeriesFrame normalized;
    data::NormStats stats;
};

// z-scores with statistics fitted on the training split.
Dataset prepare(const data::SeriesFrame& raw);
// Normalized training split [T_train, N, D] with missing entries set to 0.
Tensor train_series(const Dataset& ds);

using EpochCallback = std::function<void(const EpochLog&)>;

/// Drop-last shuffled mini-batches, masked MAE on the raw scale, clipped Adam
/// steps, validation after every epoch. The model ends holding the parameters
/// of its best validation epoch. NumericError names the epoch and batch on
/// divergence.
TrainResult train(FcdNet& model, const Dataset& ds, const TrainConfig& config, const EpochCallback& on_epoch = {});

// Metrics over every window of a split, with the last batch padded.
MetricReport evaluate(FcdNet& model, const Dataset& ds, data::SplitPart part);

// Repeat-last-observation forecast scored over the split's windows.
MetricReport persistence_baseline(const Dataset& ds, data::SplitPart part, std::size_t input_length,
                                  std::size_t horizon);

// Area under the ROC curve with ties counted half. Requires both classes.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// AUC of the off-diagonal entries of `graph` against a {0, 1} support.
double graph_auc(const Tensor& graph, const Tensor& support);

} // namespace fcdnet::train
