#pragma once

#include "fcdnet/autograd.hpp"
#include "fcdnet/data.hpp"
#include "fcdnet/forecaster.hpp"
#include "fcdnet/ltfe.hpp"
#include "fcdnet/stfe.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fcdnet {

enum class Ablation { full, no_ltfe, no_stfe };

Ablation parse_ablation(const std::string& name);
std::string to_string(Ablation mode);

struct ModelConfig {
    std::size_t nodes = 0;
    std::size_t features = 1;
    std::size_t input_length = 12;
    std::size_t horizon = 12;

    ltfe::LtfeConfig ltfe;
    std::size_t stfe_width = 10;   // F
    std::size_t batch_size = 64;   // B, fixed by the short-term extractor
    std::size_t fagru_hidden = 64;
    std::size_t fagru_order = 2;
    std::size_t fagwn_channels = 32;
    std::size_t fagwn_head = 64;
    std::size_t fagwn_order = 2;
    std::vector<std::size_t> dilations{1, 2, 1, 2};
    double epsilon = graph::kDefaultEpsilon;
    double beta_init = 0.9;
    double gamma_init = 0.8;
    double eta_init = 0.1;
    double chi_tau = 1.0;

    Ablation ablation = Ablation::full;
    std::size_t rank = 10;  // of the substitute graph in ablation runs
    std::uint64_t seed = 0;

    void validate() const;
};

// Trainable chi(E1 E2^T) standing in for an ablated extractor.
struct LowRankGraph {
    Parameter e1;  // [N, rank]
    Parameter e2;

    Var forward(Tape& tape, double chi_tau);
};

/// The full forecaster: both extractors, both predictors and their fusion.
///
/// Inputs are z-scored windows [B, T_in, N, D]; predictions come back on the
/// raw scale using the stored normalization statistics.
class FcdNet {
public:
    // `train_series` is the normalized training split [T_train, N, D].
    FcdNet(const ModelConfig& config, const Tensor& train_series, data::NormStats stats);

    struct Output {
        Var prediction;  // [B, E, N, D], raw scale
        Var a_lf;        // [N, N]
        Var a_hf;        // [N, N]
    };

    Output forward(Tape& tape, const Tensor& inputs);

    Tensor long_term_graph();
    Tensor short_term_graph(const Tensor& inputs);

    std::vector<Parameter*> parameters();
    std::size_t parameter_count();

    const ModelConfig& config() const { return config_; }
    const data::NormStats& stats() const { return stats_; }

    // Parameter values in registration order.
    std::vector<Tensor> snapshot();
    void restore(const std::vector<Tensor>& values);

private:
    ModelConfig config_;
    data::NormStats stats_;
    std::optional<ltfe::LtfePreprocessed> pre_;
    ltfe::LtfeParams ltfe_;
    stfe::StfeParams stfe_;
    LowRankGraph substitute_;
    Parameter gamma_raw_;
    Parameter eta_raw_;
    forecast::FagruParams fagru_;
    forecast::FagwnParams fagwn_;
};

} // namespace fcdnet
