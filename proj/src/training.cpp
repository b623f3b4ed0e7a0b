#include "fcdnet/training.hpp"

#include "fcdnet/adam.hpp"
#include "fcdnet/errors.hpp"
#include "fcdnet/stfe.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <random>

namespace fcdnet::train {

void TrainConfig::validate() const {
    if (!(lr0 > 0) || !(lr_min > 0) || !(decay > 0 && decay <= 1)) {
        throw ConfigError("train: lr0 and lr_min must be positive and decay in (0, 1]");
    }
    if (decay_every == 0) throw ConfigError("train: decay_every must be positive");
    if (!(clip_norm > 0)) throw ConfigError("train: clip norm must be positive");
}

double lr_schedule(std::size_t epoch, const TrainConfig& config) {
    const double raw = config.lr0 * std::pow(config.decay, static_cast<double>(epoch / config.decay_every));
    // Round to 12 significant digits so decimal schedules land on their literals (3e-3 * 0.1 == 3e-4).
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", raw);
    return std::max(std::strtod(buf, nullptr), config.lr_min);
}

Tensor expand_mask(const std::vector<std::uint8_t>& mask, const Shape& target_shape) {
    if (target_shape.size() != 4) throw ShapeError("expand_mask: expected a [B, E, N, D] target");
    const std::size_t d = target_shape[3];
    Tensor m(target_shape);
    if (mask.size() * d != m.size()) throw ShapeError("expand_mask: mask length does not match the target");
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = mask[i / d] ? 1.0 : 0.0;
    return m;
}

Var masked_mae(const Var& pred, const Tensor& target, const Tensor& mask) {
    if (pred.shape() != target.shape() || mask.shape() != target.shape()) {
        throw ShapeError("masked_mae: pred " + shape_string(pred.shape()) + ", target " + shape_string(target.shape()) +
                         " and mask " + shape_string(mask.shape()) + " must agree");
    }
    const Tensor& p = pred.value();
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (mask[i] == 0.0) continue;
        total += std::abs(p[i] - target[i]);
        ++count;
    }
    if (count == 0) throw DataError("masked_mae: every target is masked");
    const double inv = 1.0 / static_cast<double>(count);
    return pred.tape().record("masked_mae", Tensor::scalar(total * inv), {pred},
                              [pred, target, mask, inv](Tape& t, const Tensor& g, const Tensor&) {
                                  if (!t.requires_grad(pred)) return;
                                  const Tensor& pv = t.value(pred);
                                  Tensor& gp = t.grad_of(pred);
                                  for (std::size_t i = 0; i < pv.size(); ++i) {
                                      if (mask[i] == 0.0) continue;
                                      const double diff = pv[i] - target[i];
                                      const double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
                                      gp[i] += g[0] * sign * inv;
                                  }
                              });
}

void MetricAccumulator::add(const Tensor& pred, const Tensor& target, const Tensor& mask) {
    if (pred.shape() != target.shape() || mask.shape() != target.shape() || target.rank() != 4) {
        throw ShapeError("metrics: pred, target and mask must share one [B, E, N, D] shape");
    }
    const std::size_t horizon = target.dim(1);
    const std::size_t inner = target.dim(2) * target.dim(3);
    if (per_horizon_.empty()) per_horizon_.resize(horizon);
    if (per_horizon_.size() != horizon) throw ShapeError("metrics: horizon changed between batches");
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (mask[i] == 0.0) {
            ++masked_;
            continue;
        }
        Sums& s = per_horizon_[(i / inner) % horizon];
        const double err = pred[i] - target[i];
        s.abs += std::abs(err);
        s.sq += err * err;
        ++s.points;
        if (target[i] != 0.0) {
            s.pct += std::abs(err) / std::abs(target[i]);
            ++s.pct_points;
        }
    }
}

namespace {

MetricValues finish(double abs, double sq, double pct, std::size_t points, std::size_t pct_points) {
    MetricValues v;
    v.points = points;
    v.mape_points = pct_points;
    if (points > 0) {
        v.mae = abs / static_cast<double>(points);
        v.rmse = std::sqrt(sq / static_cast<double>(points));
    }
    if (pct_points > 0) v.mape = 100.0 * pct / static_cast<double>(pct_points);
    return v;
}

} // namespace

MetricReport MetricAccumulator::report() const {
    MetricReport r;
    r.masked_points = masked_;
    Sums all;
    for (const Sums& s : per_horizon_) {
        r.horizons.push_back(finish(s.abs, s.sq, s.pct, s.points, s.pct_points));
        all.abs += s.abs;
        all.sq += s.sq;
        all.pct += s.pct;
        all.points += s.points;
        all.pct_points += s.pct_points;
    }
    r.average = finish(all.abs, all.sq, all.pct, all.points, all.pct_points);
    return r;
}

MetricReport metrics(const Tensor& pred, const Tensor& target, const Tensor& mask) {
    MetricAccumulator acc;
    acc.add(pred, target, mask);
    return acc.report();
}

std::string log_header() { return "epoch,lr,train_mae,val_mae,val_rmse,val_mape,wall_seconds"; }

std::string format_log_row(const EpochLog& row, bool with_time) {
    std::string s = std::to_string(row.epoch) + "," + data::format_number(row.lr) + "," +
                    data::format_number(row.train_mae) + "," + data::format_number(row.val_mae) + "," +
                    data::format_number(row.val_rmse) + "," + (row.val_mape ? data::format_number(*row.val_mape) : "");
    if (with_time) s += "," + data::format_number(row.wall_seconds);
    return s;
}

Dataset prepare(const data::SeriesFrame& raw) {
    auto [normalized, stats] = data::zscore_fit_apply(raw);
    return {raw, std::move(normalized), std::move(stats)};
}

Tensor train_series(const Dataset& ds) {
    const data::StepRange r = ds.normalized.range(data::SplitPart::train);
    const std::size_t n = ds.normalized.nodes(), d = ds.normalized.features();
    Tensor out({r.length(), n, d});
    // Missing entries are imputed with 0 on the normalized scale, as in the input windows.
    for (std::size_t t = 0; t < r.length(); ++t)
        for (std::size_t i = 0; i < n; ++i) {
            if (!ds.normalized.observed(r.begin + t, i)) continue;
            for (std::size_t f = 0; f < d; ++f) out[(t * n + i) * d + f] = ds.normalized.values[((r.begin + t) * n + i) * d + f];
        }
    return out;
}

MetricReport evaluate(FcdNet& model, const Dataset& ds, data::SplitPart part) {
    const ModelConfig& c = model.config();
    const auto starts = data::window_starts(ds.raw, part, c.input_length, c.horizon);
    MetricAccumulator acc;
    for (const auto& group : data::make_batches(starts, c.batch_size, false)) {
        const stfe::PaddedStarts padded = stfe::pad_batch(group, c.batch_size);
        const data::ForecastBatch batch = data::make_batch(ds.raw, ds.normalized, ds.stats, padded.starts,
                                                           c.input_length, c.horizon, padded.valid);
        Tape tape;
        const Var pred = model.forward(tape, batch.inputs).prediction;
        acc.add(pred.value(), batch.targets, expand_mask(batch.target_mask, batch.targets.shape()));
    }
    return acc.report();
}

TrainResult train(FcdNet& model, const Dataset& ds, const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    const ModelConfig& c = model.config();
    const auto starts = data::window_starts(ds.raw, data::SplitPart::train, c.input_length, c.horizon);
    data::window_starts(ds.raw, data::SplitPart::val, c.input_length, c.horizon);
    if (starts.size() < c.batch_size) {
        throw DataError("train: " + std::to_string(starts.size()) + " training windows cannot fill one batch of " +
                        std::to_string(c.batch_size));
    }
    const auto params = model.parameters();
    Adam adam(params);
    TrainResult result;
    std::vector<Tensor> best;
    std::mt19937_64 rng(config.seed);
    const auto t0 = std::chrono::steady_clock::now();

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = lr_schedule(epoch, config);
        std::vector<std::size_t> order = starts;
        if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        std::size_t batch_index = 0;
        for (const auto& group : data::make_batches(order, c.batch_size, true)) {
            const data::ForecastBatch batch =
                data::make_batch(ds.raw, ds.normalized, ds.stats, group, c.input_length, c.horizon);
            const Tensor mask = expand_mask(batch.target_mask, batch.targets.shape());
            if (std::all_of(mask.values().begin(), mask.values().end(), [](double m) { return m == 0.0; })) {
                ++batch_index;
                continue;
            }
            for (Parameter* p : params) p->zero_grad();
            try {
                Tape tape;
                const Var pred = model.forward(tape, batch.inputs).prediction;
                const Var loss = masked_mae(pred, batch.targets, mask);
                tape.backward(loss);
                loss_sum += loss.value().item();
                ++loss_count;
                for (const Parameter* p : params) {
                    if (!p->grad.all_finite()) throw NumericError("non-finite gradient in " + p->name);
                }
            } catch (const NumericError& e) {
                throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(batch_index) + ": " + e.what());
            }
            clip_grad_norm(params, config.clip_norm);
            adam.step(params, lr);
            ++batch_index;
        }

        EpochLog row;
        row.epoch = epoch;
        row.lr = lr;
        row.train_mae = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
        const MetricReport val = evaluate(model, ds, data::SplitPart::val);
        row.val_mae = val.average.mae;
        row.val_rmse = val.average.rmse;
        row.val_mape = val.average.mape;
        row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!result.best_epoch || row.val_mae < result.best_val_mae) {
            result.best_epoch = epoch;
            result.best_val_mae = row.val_mae;
            best = model.snapshot();
        }
        result.log.push_back(row);
        if (on_epoch) on_epoch(row);
    }
    if (!best.empty()) model.restore(best);
    return result;
}

MetricReport persistence_baseline(const Dataset& ds, data::SplitPart part, std::size_t input_length,
                                  std::size_t horizon) {
    const auto starts = data::window_starts(ds.raw, part, input_length, horizon);
    const data::ForecastBatch batch = data::make_batch(ds.raw, ds.normalized, ds.stats, starts, input_length, horizon);
    const std::size_t n = ds.raw.nodes(), d = ds.raw.features();
    Tensor pred(batch.targets.shape());
    for (std::size_t b = 0; b < starts.size(); ++b) {
        const std::size_t last = starts[b] + input_length - 1;
        for (std::size_t e = 0; e < horizon; ++e)
            for (std::size_t i = 0; i < n * d; ++i) pred[((b * horizon + e) * n * d) + i] = ds.raw.values[last * n * d + i];
    }
    return metrics(pred, batch.targets, expand_mask(batch.target_mask, batch.targets.shape()));
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw ContractError("roc_auc: scores and labels differ in length");
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[idx[k]]) rank_sum += avg_rank;
        }
        i = j;
    }
    for (int l : labels) pos += l ? 1 : 0;
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw ContractError("roc_auc: both classes are required");
    const double p = static_cast<double>(pos);
    return (rank_sum - p * (p + 1) / 2) / (p * static_cast<double>(neg));
}

double graph_auc(const Tensor& graph, const Tensor& support) {
    if (graph.rank() != 2 || graph.shape() != support.shape() || graph.dim(0) != graph.dim(1)) {
        throw ShapeError("graph_auc: expected two square matrices of one shape");
    }
    std::vector<double> scores;
    std::vector<int> labels;
    const std::size_t n = graph.dim(0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            scores.push_back(graph[i * n + j]);
            labels.push_back(support[i * n + j] != 0.0 ? 1 : 0);
        }
    return roc_auc(scores, labels);
}

} // namespace fcdnet::train
