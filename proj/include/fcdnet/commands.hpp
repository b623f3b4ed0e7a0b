#pragma once

#include "fcdnet/checkpoint.hpp"
#include "fcdnet/config.hpp"
#include "fcdnet/training.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>

// The command-line operations as library calls. The executable only parses
// arguments and maps exceptions to exit codes.
namespace fcdnet::cmd {

struct TrainOutputs {
    std::string checkpoint;  // model.ckpt
    std::string log;         // log.csv
    std::string resolved;    // resolved.cfg
};

TrainOutputs output_paths(const std::string& out_dir);

// Trains per `config` on config.data.path and writes the three outputs.
train::TrainResult run_train(const RunConfig& config, const std::string& out_dir, std::ostream& out);

// A checkpoint rebuilt against a dataset.
struct LoadedModel {
    Checkpoint checkpoint;
    train::Dataset dataset;
    std::unique_ptr<FcdNet> model;
};

// `data_path` empty means the path stored in the checkpoint's config.
LoadedModel load_model(const std::string& checkpoint_path, const std::string& data_path);

// Prints per-horizon and average metrics; writes them as CSV when csv_path is set.
train::MetricReport run_evaluate(const std::string& checkpoint_path, const std::string& data_path,
                                 data::SplitPart part, const std::string& csv_path, std::ostream& out);

std::string format_report_csv(const train::MetricReport& report);

// Writes A_LF.csv and A_HF.csv; A_HF comes from batch `batch_index` of the split.
void run_export_graphs(const std::string& checkpoint_path, const std::string& data_path, data::SplitPart part,
                       std::size_t batch_index, const std::string& out_dir, std::ostream& out);

// series.csv, static_graph.csv, burst_graph.csv, schedule.csv.
void run_synth(const std::string& spec_path, std::size_t steps, std::uint64_t seed, const std::string& out_dir,
               std::ostream& out);

// True when every check passes.
bool run_grad_check(const std::string& scope, std::ostream& out);

} // namespace fcdnet::cmd
