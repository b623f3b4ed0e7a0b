#include "fcdnet/commands.hpp"
#include "fcdnet/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

} // namespace

int main(int argc, char** argv) {
    using namespace fcdnet;
    CLI::App app{"FCDNet: frequency-guided dependency graphs for multivariate forecasting"};
    app.require_subcommand(1);

    // train
    std::string config_path, data_path, out_dir = "run", ablation;
    std::vector<std::string> overrides;
    std::size_t epochs = 0;
    std::uint64_t seed = 0;
    auto* train = app.add_subcommand("train", "Train a model and write checkpoint, log and resolved config");
    train->add_option("--config", config_path, "Config file with [data], [model], [train] sections");
    train->add_option("--data", data_path, "Dataset CSV (overrides data.path)");
    train->add_option("--out", out_dir, "Output directory")->capture_default_str();
    auto* epochs_opt = train->add_option("--epochs", epochs, "Override train.epochs");
    auto* seed_opt = train->add_option("--seed", seed, "Override train.seed");
    train->add_option("--ablation", ablation, "full, no_ltfe or no_stfe");
    train->add_option("--set", overrides, "section.key=value override (repeatable)");

    // evaluate / export-graphs
    std::string ckpt, split = "test", csv_out, graph_dir = "graphs";
    std::size_t batch_index = 0;
    auto* evaluate = app.add_subcommand("evaluate", "Per-horizon MAE, RMSE and MAPE of a checkpoint");
    evaluate->add_option("--checkpoint", ckpt, "Checkpoint file")->required();
    evaluate->add_option("--data", data_path, "Dataset CSV (defaults to the path in the checkpoint)");
    evaluate->add_option("--split", split, "train, val or test")->capture_default_str();
    evaluate->add_option("--csv", csv_out, "Also write the metrics as CSV");

    auto* export_graphs = app.add_subcommand("export-graphs", "Write A_LF and one batch's A_HF as N x N CSV");
    export_graphs->add_option("--checkpoint", ckpt, "Checkpoint file")->required();
    export_graphs->add_option("--data", data_path, "Dataset CSV (defaults to the path in the checkpoint)");
    export_graphs->add_option("--split", split, "train, val or test")->capture_default_str();
    export_graphs->add_option("--batch", batch_index, "Batch index within the split")->capture_default_str();
    export_graphs->add_option("--out", graph_dir, "Output directory")->capture_default_str();

    // synth-data
    std::string spec_path, synth_dir = "synth";
    std::size_t steps = 2000;
    auto* synth = app.add_subcommand("synth-data", "Generate a planted-graph dataset");
    synth->add_option("--spec", spec_path, "Planted system spec (key = value)")->required();
    synth->add_option("--steps", steps, "Number of time steps")->capture_default_str();
    synth->add_option("--seed", seed, "Seed for graphs and noise")->capture_default_str();
    synth->add_option("--out", synth_dir, "Output directory")->capture_default_str();

    // grad-check
    std::string scope = "all";
    auto* grad = app.add_subcommand("grad-check", "Finite-difference checks of every parameterized operation");
    grad->add_option("--scope", scope, "all, numeric, ltfe, stfe, graphops, forecaster, training or model")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*train) {
            RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
            for (const auto& o : overrides) apply_override(cfg, o);
            if (!data_path.empty()) cfg.data.path = data_path;
            if (*epochs_opt) cfg.train.epochs = epochs;
            if (*seed_opt) cfg.train.seed = cfg.model.seed = seed;
            if (!ablation.empty()) cfg.model.ablation = parse_ablation(ablation);
            cmd::run_train(cfg, out_dir, std::cout);
        } else if (*evaluate) {
            cmd::run_evaluate(ckpt, data_path, data::parse_split_part(split), csv_out, std::cout);
        } else if (*export_graphs) {
            cmd::run_export_graphs(ckpt, data_path, data::parse_split_part(split), batch_index, graph_dir, std::cout);
        } else if (*synth) {
            cmd::run_synth(spec_path, steps, seed, synth_dir, std::cout);
        } else if (*grad) {
            return cmd::run_grad_check(scope, std::cout) ? kOk : kNumeric;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const ContractError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    }
    return kOk;
}
