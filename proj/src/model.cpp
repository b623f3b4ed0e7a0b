#include "fcdnet/model.hpp"

#include "fcdnet/errors.hpp"
#include "fcdnet/graphops.hpp"
#include "fcdnet/ops.hpp"

namespace fcdnet {

Ablation parse_ablation(const std::string& name) {
    if (name == "full") return Ablation::full;
    if (name == "no_ltfe") return Ablation::no_ltfe;
    if (name == "no_stfe") return Ablation::no_stfe;
    throw ConfigError("unknown ablation mode '" + name + "' (expected full, no_ltfe or no_stfe)");
}

std::string to_string(Ablation mode) {
    switch (mode) {
    case Ablation::full: return "full";
    case Ablation::no_ltfe: return "no_ltfe";
    case Ablation::no_stfe: return "no_stfe";
    }
    return "full";
}

void ModelConfig::validate() const {
    if (nodes == 0 || features == 0) throw ConfigError("model: nodes and features must be positive");
    if (input_length == 0 || horizon == 0) throw ConfigError("model: input length and horizon must be positive");
    if (batch_size == 0) throw ConfigError("model: batch size must be positive");
    if (ablation != Ablation::full && rank == 0) throw ConfigError("model: ablation rank must be positive");
    if (!(beta_init > 0 && beta_init < 1) || !(gamma_init > 0 && gamma_init < 1) || !(eta_init > 0)) {
        throw ConfigError("model: beta and gamma must lie in (0, 1) and eta must be positive");
    }
    if (!(chi_tau > 0)) throw ConfigError("model: chi temperature must be positive");
}

Var LowRankGraph::forward(Tape& tape, double chi_tau) {
    return ops::chi(ops::matmul_nt(tape.param(e1), tape.param(e2)), chi_tau);
}

FcdNet::FcdNet(const ModelConfig& config, const Tensor& train_series, data::NormStats stats)
    : config_(config), stats_(std::move(stats)) {
    config_.validate();
    if (train_series.rank() != 3 || train_series.dim(1) != config_.nodes || train_series.dim(2) != config_.features) {
        throw ShapeError("FcdNet: training series " + shape_string(train_series.shape()) + " does not match N=" +
                         std::to_string(config_.nodes) + ", D=" + std::to_string(config_.features));
    }
    if (stats_.mean.size() != config_.features || stats_.std.size() != config_.features) {
        throw ShapeError("FcdNet: normalization statistics do not cover every feature");
    }
    Initializer init(config_.seed);
    const std::size_t n = config_.nodes, d = config_.features;

    if (config_.ablation != Ablation::no_ltfe) {
        pre_ = ltfe::ltfe_preprocess(train_series, config_.ltfe);
        ltfe_ = ltfe::init_ltfe(*pre_, config_.ltfe, config_.beta_init, init);
    }
    if (config_.ablation != Ablation::no_stfe) {
        stfe_ = stfe::init_stfe({config_.batch_size, d, config_.input_length, n, config_.stfe_width, config_.chi_tau},
                                init);
    }
    if (config_.ablation != Ablation::full) {
        const std::size_t r = config_.rank;
        substitute_.e1 = Parameter("lowrank.e1", init.glorot({n, r}, n, r));
        substitute_.e2 = Parameter("lowrank.e2", init.glorot({n, r}, n, r));
    }
    gamma_raw_ = Parameter("fagru.gamma_raw", Tensor::scalar(logit(config_.gamma_init)));
    eta_raw_ = Parameter("fusion.eta_raw", Tensor::scalar(inverse_softplus(config_.eta_init)));
    fagru_ = forecast::init_fagru({d, config_.fagru_hidden, config_.fagru_order, config_.horizon, d}, init);
    forecast::FagwnConfig wn;
    wn.input_dim = d;
    wn.channels = config_.fagwn_channels;
    wn.dilations = config_.dilations;
    wn.order = config_.fagwn_order;
    wn.head_channels = config_.fagwn_head;
    wn.input_length = config_.input_length;
    wn.horizon = config_.horizon;
    wn.output_dim = d;
    wn.epsilon = config_.epsilon;
    fagwn_ = forecast::init_fagwn(wn, init);
}

FcdNet::Output FcdNet::forward(Tape& tape, const Tensor& inputs) {
    const Shape want{config_.batch_size, config_.input_length, config_.nodes, config_.features};
    if (inputs.shape() != want) {
        throw ShapeError("FcdNet: input " + shape_string(inputs.shape()) + " expected " + shape_string(want));
    }
    Output out;
    out.a_lf = config_.ablation == Ablation::no_ltfe ? substitute_.forward(tape, config_.chi_tau)
                                                     : ltfe::ltfe_forward(tape, *pre_, ltfe_, config_.chi_tau);
    out.a_hf = config_.ablation == Ablation::no_stfe ? substitute_.forward(tape, config_.chi_tau)
                                                     : stfe::stfe_forward(tape, inputs, stfe_, config_.chi_tau);

    const Var x = tape.constant(inputs);
    const Var gamma = ops::sigmoid(tape.param(gamma_raw_));
    const Var op_lf = graph::fuse_gamma(graph::build_filters(out.a_lf, config_.epsilon), gamma);
    const Var x1 = forecast::fagru_forward(x, op_lf, fagru_, config_.horizon, config_.features);
    const Var x2 = forecast::fagwn_forward(x, out.a_hf, fagwn_);
    const Var fused = forecast::fuse_outputs(x1, x2, ops::softplus(tape.param(eta_raw_)));

    const Tensor scale({config_.features}, std::vector<double>(stats_.std));
    const Tensor shift({config_.features}, std::vector<double>(stats_.mean));
    out.prediction = ops::add_bias(ops::mul_last(fused, tape.constant(scale)), tape.constant(shift));
    return out;
}

Tensor FcdNet::long_term_graph() {
    Tape tape;
    if (config_.ablation == Ablation::no_ltfe) return substitute_.forward(tape, config_.chi_tau).value();
    return ltfe::ltfe_forward(tape, *pre_, ltfe_, config_.chi_tau).value();
}

Tensor FcdNet::short_term_graph(const Tensor& inputs) {
    Tape tape;
    if (config_.ablation == Ablation::no_stfe) return substitute_.forward(tape, config_.chi_tau).value();
    return stfe::stfe_forward(tape, inputs, stfe_, config_.chi_tau).value();
}

std::vector<Parameter*> FcdNet::parameters() {
    std::vector<Parameter*> out;
    if (config_.ablation != Ablation::no_ltfe) ltfe_.collect(out);
    if (config_.ablation != Ablation::no_stfe) stfe_.collect(out);
    if (config_.ablation != Ablation::full) {
        out.push_back(&substitute_.e1);
        out.push_back(&substitute_.e2);
    }
    out.push_back(&gamma_raw_);
    fagru_.collect(out);
    fagwn_.collect(out);
    out.push_back(&eta_raw_);
    return out;
}

std::size_t FcdNet::parameter_count() {
    std::size_t total = 0;
    for (const Parameter* p : parameters()) total += p->value.size();
    return total;
}

std::vector<Tensor> FcdNet::snapshot() {
    std::vector<Tensor> values;
    for (const Parameter* p : parameters()) values.push_back(p->value);
    return values;
}

void FcdNet::restore(const std::vector<Tensor>& values) {
    const auto params = parameters();
    if (values.size() != params.size()) throw ContractError("FcdNet::restore: parameter count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (values[i].shape() != params[i]->value.shape()) {
            throw ShapeError("FcdNet::restore: shape mismatch for " + params[i]->name);
        }
        params[i]->value = values[i];
    }
}

} // namespace fcdnet
