#include "fcdnet/commands.hpp"

#include "fcdnet/errors.hpp"
#include "fcdnet/gradient_suite.hpp"
#include "fcdnet/stfe.hpp"
#include "fcdnet/synth.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace fcdnet::cmd {
namespace {

std::string join(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory '" + dir + "': " + ec.message());
}

std::string metric_cell(const std::optional<double>& v) { return v ? data::format_number(*v) : ""; }

} // namespace

TrainOutputs output_paths(const std::string& out_dir) {
    return {join(out_dir, "model.ckpt"), join(out_dir, "log.csv"), join(out_dir, "resolved.cfg")};
}

train::TrainResult run_train(const RunConfig& config, const std::string& out_dir, std::ostream& out) {
    if (config.data.path.empty()) throw ConfigError("train: no dataset path (set data.path or pass --data)");
    const data::SeriesFrame frame = data::load_series(config.data.path, config.format());
    const train::Dataset ds = train::prepare(frame);
    RunConfig resolved = config;
    resolved.model.nodes = frame.nodes();
    resolved.model.features = frame.features();
    out << frame.summary() << "\n";

    FcdNet model(resolved.model, train::train_series(ds), ds.stats);
    out << "parameters: " << model.parameter_count() << "\n";
    ensure_dir(out_dir);
    const TrainOutputs paths = output_paths(out_dir);
    data::write_text(paths.resolved, format_config(resolved));

    std::ofstream log(paths.log, std::ios::binary);
    if (!log) throw DataError("cannot write '" + paths.log + "'");
    log << train::log_header() << "\n";
    const train::TrainResult result = train::train(model, ds, resolved.train, [&](const train::EpochLog& row) {
        log << train::format_log_row(row) << "\n";
        log.flush();
        out << "epoch " << row.epoch << "  lr " << row.lr << "  train_mae " << row.train_mae << "  val_mae "
            << row.val_mae << "\n";
    });
    save_checkpoint(paths.checkpoint, make_checkpoint(model, resolved));
    if (result.best_epoch) {
        out << "best epoch " << *result.best_epoch << " (val_mae " << result.best_val_mae << ")\n";
    } else {
        out << "no epochs run; checkpoint holds the initial weights\n";
    }
    out << "wrote " << paths.checkpoint << ", " << paths.log << ", " << paths.resolved << "\n";
    return result;
}

LoadedModel load_model(const std::string& checkpoint_path, const std::string& data_path) {
    LoadedModel lm;
    lm.checkpoint = load_checkpoint(checkpoint_path);
    const RunConfig& cfg = lm.checkpoint.config;
    const std::string path = data_path.empty() ? cfg.data.path : data_path;
    if (path.empty()) throw ConfigError("no dataset path given and none stored in the checkpoint");
    const data::SeriesFrame frame = data::load_series(path, cfg.format());
    if (frame.nodes() != lm.checkpoint.nodes || frame.features() != lm.checkpoint.features) {
        throw ShapeError("dataset does not match checkpoint: N " + std::to_string(frame.nodes()) + " vs " +
                         std::to_string(lm.checkpoint.nodes) + ", D " + std::to_string(frame.features()) + " vs " +
                         std::to_string(lm.checkpoint.features) + " (T_in " + std::to_string(cfg.model.input_length) +
                         ", E " + std::to_string(cfg.model.horizon) + " from the checkpoint)");
    }
    lm.dataset.raw = frame;
    lm.dataset.stats = lm.checkpoint.stats;
    lm.dataset.normalized = data::zscore_apply(frame, lm.dataset.stats);
    lm.model = std::make_unique<FcdNet>(cfg.model, train::train_series(lm.dataset), lm.dataset.stats);
    apply_checkpoint(*lm.model, lm.checkpoint);
    return lm;
}

std::string format_report_csv(const train::MetricReport& report) {
    std::string s = "horizon,mae,rmse,mape,points\n";
    for (std::size_t h = 0; h < report.horizons.size(); ++h) {
        const auto& m = report.horizons[h];
        s += std::to_string(h + 1) + "," + data::format_number(m.mae) + "," + data::format_number(m.rmse) + "," +
             metric_cell(m.mape) + "," + std::to_string(m.points) + "\n";
    }
    const auto& a = report.average;
    s += "average," + data::format_number(a.mae) + "," + data::format_number(a.rmse) + "," + metric_cell(a.mape) + "," +
         std::to_string(a.points) + "\n";
    return s;
}

train::MetricReport run_evaluate(const std::string& checkpoint_path, const std::string& data_path,
                                 data::SplitPart part, const std::string& csv_path, std::ostream& out) {
    LoadedModel lm = load_model(checkpoint_path, data_path);
    const train::MetricReport report = train::evaluate(*lm.model, lm.dataset, part);
    char line[160];
    out << "split " << data::to_string(part) << ", " << report.average.points << " points, " << report.masked_points
        << " masked\n";
    out << "horizon       MAE        RMSE       MAPE(%)\n";
    auto row = [&](const std::string& label, const train::MetricValues& m) {
        std::snprintf(line, sizeof line, "%-8s %10.4f %10.4f %10s\n", label.c_str(), m.mae, m.rmse,
                      m.mape ? std::to_string(*m.mape).c_str() : "-");
        out << line;
    };
    for (std::size_t h = 0; h < report.horizons.size(); ++h) row(std::to_string(h + 1), report.horizons[h]);
    row("average", report.average);
    if (!report.average.mape) out << "note: MAPE omitted, no nonzero observed targets\n";
    if (!csv_path.empty()) data::write_text(csv_path, format_report_csv(report));
    return report;
}

void run_export_graphs(const std::string& checkpoint_path, const std::string& data_path, data::SplitPart part,
                       std::size_t batch_index, const std::string& out_dir, std::ostream& out) {
    LoadedModel lm = load_model(checkpoint_path, data_path);
    const ModelConfig& c = lm.model->config();
    const auto starts = data::window_starts(lm.dataset.raw, part, c.input_length, c.horizon);
    const auto groups = data::make_batches(starts, c.batch_size, false);
    if (batch_index >= groups.size()) {
        throw ConfigError("batch index " + std::to_string(batch_index) + " out of range; split " +
                          data::to_string(part) + " has " + std::to_string(groups.size()) + " batches");
    }
    const stfe::PaddedStarts padded = stfe::pad_batch(groups[batch_index], c.batch_size);
    const data::ForecastBatch batch = data::make_batch(lm.dataset.raw, lm.dataset.normalized, lm.dataset.stats,
                                                       padded.starts, c.input_length, c.horizon, padded.valid);
    ensure_dir(out_dir);
    data::save_matrix(join(out_dir, "A_LF.csv"), lm.model->long_term_graph());
    data::save_matrix(join(out_dir, "A_HF.csv"), lm.model->short_term_graph(batch.inputs));
    out << "wrote " << join(out_dir, "A_LF.csv") << " and " << join(out_dir, "A_HF.csv") << "\n";
}

void run_synth(const std::string& spec_path, std::size_t steps, std::uint64_t seed, const std::string& out_dir,
               std::ostream& out) {
    const data::PlantedSpec spec = data::parse_planted_spec(data::read_text(spec_path));
    const data::PlantedSystem system = data::make_planted_system(spec, seed);
    const data::PlantedData generated = data::generate_planted(system, steps, seed + 1);
    ensure_dir(out_dir);
    data::save_series(join(out_dir, "series.csv"), generated.frame);
    data::save_matrix(join(out_dir, "static_graph.csv"), generated.static_graph);
    data::save_matrix(join(out_dir, "burst_graph.csv"), generated.burst_graph);
    std::string schedule = "start,end\n";
    for (const auto& [a, b] : system.burst_schedule) schedule += std::to_string(a) + "," + std::to_string(b) + "\n";
    data::write_text(join(out_dir, "schedule.csv"), schedule);
    out << "wrote " << steps << " steps of " << spec.nodes << " nodes to " << out_dir << "\n";
}

bool run_grad_check(const std::string& scope, std::ostream& out) {
    bool ok = true;
    char line[200];
    for (const SuiteResult& r : run_gradient_suite(scope)) {
        std::snprintf(line, sizeof line, "%-4s %-10s %-16s max_rel_err %.3e (threshold %.0e, %zu entries, worst %s)\n",
                      r.passed() ? "ok" : "FAIL", r.scope.c_str(), r.report.name.c_str(), r.report.max_rel_error,
                      r.threshold, r.report.entries_checked, r.report.worst_parameter.c_str());
        out << line;
        ok = ok && r.passed();
    }
    return ok;
}

} // namespace fcdnet::cmd
