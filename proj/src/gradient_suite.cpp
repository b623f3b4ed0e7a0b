#include "fcdnet/gradient_suite.hpp"

#include "fcdnet/errors.hpp"
#include "fcdnet/forecaster.hpp"
#include "fcdnet/graphops.hpp"
#include "fcdnet/ltfe.hpp"
#include "fcdnet/model.hpp"
#include "fcdnet/ops.hpp"
#include "fcdnet/stfe.hpp"
#include "fcdnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

namespace fcdnet {
namespace {

constexpr double kOpThreshold = 1e-4;
constexpr double kModelThreshold = 1e-3;

Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Initializer init(seed);
    return init.uniform(std::move(shape), lo, hi);
}

// sum(y * w) for a fixed random w.
Var weighted_sum(const Var& y, std::uint64_t seed) {
    return ops::sum_all(ops::mul(y, y.tape().constant(random_tensor(y.shape(), seed))));
}

// Small planted-looking series for the extractor and whole-model checks.
Tensor toy_series(std::size_t steps, std::size_t nodes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    Tensor x({steps, nodes, 1});
    for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t n = 0; n < nodes; ++n)
            x[t * nodes + n] = std::sin(0.7 * static_cast<double>(t) + static_cast<double>(n)) + noise(rng);
    return x;
}

struct Collector {
    std::string wanted;
    std::vector<SuiteResult> results;

    bool want(const std::string& scope) const { return wanted == "all" || wanted == scope; }

    void check(const std::string& scope, const std::string& name, const LossBuilder& loss,
               const std::vector<Parameter*>& params, double threshold = kOpThreshold, std::size_t max_entries = 0) {
        GradCheckOptions opt;
        opt.step = 1e-4;
        opt.max_entries_per_param = max_entries;
        opt.seed = 7;
        results.push_back({scope, grad_check(name, loss, params, opt), threshold});
    }
};

void numeric_checks(Collector& c) {
    auto x = std::make_shared<Parameter>("x", random_tensor({3, 4}, 1, -3, 3));
    c.check("numeric", "chi", [x](Tape& t) { return weighted_sum(ops::chi(t.param(*x), 1.3), 11); }, {x.get()});

    auto q = std::make_shared<Tensor>(random_tensor({2, 6, 5}, 2));
    auto gain = std::make_shared<Parameter>("gain", random_tensor({3}, 3, 0.5, 1.5));
    auto bias = std::make_shared<Parameter>("bias", random_tensor({3}, 4));
    c.check("numeric", "stnorm_affine",
            [=](Tape& t) { return weighted_sum(ops::channel_affine(t.constant(*q), t.param(*gain), t.param(*bias)), 12); },
            {gain.get(), bias.get()});
}

void ltfe_checks(Collector& c) {
    ltfe::LtfeConfig cfg;
    cfg.period = 8;
    cfg.levels = 3;
    cfg.wavelet_order = 2;
    cfg.conv_channels = 3;
    cfg.hidden = 5;
    auto pre = std::make_shared<ltfe::LtfePreprocessed>(ltfe::ltfe_preprocess(toy_series(40, 3, 5), cfg));
    Initializer init(21);
    auto params = std::make_shared<ltfe::LtfeParams>(ltfe::init_ltfe(*pre, cfg, 0.9, init));
    // Nonzero biases keep ReLU kinks away from the probed points.
    for (ltfe::BranchParams* b : {&params->branch1, &params->branch2}) {
        b->conv_b.value = random_tensor(b->conv_b.value.shape(), 31, 0.05, 0.2);
        b->fc3_b.value = random_tensor(b->fc3_b.value.shape(), 32, 0.05, 0.2);
        b->fc2_b.value = random_tensor(b->fc2_b.value.shape(), 33, 0.05, 0.2);
        b->stn_gain.value = random_tensor(b->stn_gain.value.shape(), 34, 0.5, 1.5);
    }
    std::vector<Parameter*> branch;
    params->branch1.collect(branch);
    c.check("ltfe", "ltfe_branch",
            [=](Tape& t) { return weighted_sum(ltfe::ltfe_branch(t, pre->q1.tensor(), params->branch1, 1.0), 13); }, branch);

    auto a1 = std::make_shared<Parameter>("a1", random_tensor({3, 3}, 6, 0, 1));
    auto a2 = std::make_shared<Parameter>("a2", random_tensor({3, 3}, 7, 0, 1));
    auto beta = std::make_shared<Parameter>("beta_raw", Tensor::scalar(logit(0.9)));
    c.check("ltfe", "fuse_beta",
            [=](Tape& t) {
                return weighted_sum(ltfe::fuse_beta(t.param(*a1), t.param(*a2), ops::sigmoid(t.param(*beta))), 14);
            },
            {a1.get(), a2.get(), beta.get()});

    std::vector<Parameter*> all;
    params->collect(all);
    c.check("ltfe", "ltfe_forward", [=](Tape& t) { return weighted_sum(ltfe::ltfe_forward(t, *pre, *params, 1.0), 15); },
            all);
}

void stfe_checks(Collector& c) {
    stfe::StfeConfig cfg{2, 1, 6, 3, 4, 1.0};
    Initializer init(41);
    auto params = std::make_shared<stfe::StfeParams>(stfe::init_stfe(cfg, init));
    params->b_u_real.value = random_tensor({4}, 42, -0.5, 0.5);
    params->b_u_imag.value = random_tensor({4}, 43, -0.5, 0.5);
    auto x = std::make_shared<Tensor>(random_tensor({2, 6, 3, 1}, 44));
    std::vector<Parameter*> all;
    params->collect(all);
    c.check("stfe", "stfe_forward", [=](Tape& t) { return weighted_sum(stfe::stfe_forward(t, *x, *params, 1.0), 16); },
            all);
}

void graphops_checks(Collector& c) {
    auto raw = std::make_shared<Parameter>("graph_raw", random_tensor({3, 3}, 51, -2, 2));
    auto gamma = std::make_shared<Parameter>("gamma_raw", Tensor::scalar(logit(0.8)));
    c.check("graphops", "filters_gamma",
            [=](Tape& t) {
                const auto f = graph::build_filters(ops::chi(t.param(*raw)));
                return weighted_sum(graph::fuse_gamma(f, ops::sigmoid(t.param(*gamma))), 17);
            },
            {raw.get(), gamma.get()});

    auto op = std::make_shared<Parameter>("op", random_tensor({3, 3}, 52, -0.6, 0.6));
    auto x = std::make_shared<Parameter>("x", random_tensor({2, 3, 2}, 53));
    auto w = std::make_shared<Parameter>("w", random_tensor({6, 4}, 54));
    c.check("graphops", "poly_graph_conv",
            [=](Tape& t) { return weighted_sum(graph::poly_graph_conv(t.param(*op), t.param(*x), t.param(*w), 2), 18); },
            {op.get(), x.get(), w.get()});
}

void forecaster_checks(Collector& c) {
    {
        Initializer init(61);
        auto p = std::make_shared<forecast::FagruParams>(forecast::init_fagru({2, 3, 2, 2, 1}, init));
        p->b_r.value = random_tensor({3}, 62);
        p->b_u.value = random_tensor({3}, 63);
        p->b_c.value = random_tensor({3}, 64);
        auto x = std::make_shared<Tensor>(random_tensor({2, 3, 2}, 65));
        auto h = std::make_shared<Tensor>(random_tensor({2, 3, 3}, 66));
        auto op = std::make_shared<Tensor>(random_tensor({3, 3}, 67, -0.5, 0.5));
        std::vector<Parameter*> all{&p->w_r, &p->b_r, &p->w_u, &p->b_u, &p->w_c, &p->b_c};
        c.check("forecaster", "fagru_cell",
                [=](Tape& t) {
                    return weighted_sum(forecast::fagru_cell(t.constant(*x), t.constant(*h), t.constant(*op), *p), 19);
                },
                all);
    }
    {
        auto x = std::make_shared<Parameter>("x", random_tensor({1, 2, 6, 3}, 71));
        auto fw = std::make_shared<Parameter>("filter_w", random_tensor({6, 3}, 72));
        auto fb = std::make_shared<Parameter>("filter_b", random_tensor({3}, 73));
        auto gw = std::make_shared<Parameter>("gate_w", random_tensor({6, 3}, 74));
        auto gb = std::make_shared<Parameter>("gate_b", random_tensor({3}, 75));
        c.check("forecaster", "gated_tcn",
                [=](Tape& t) {
                    return weighted_sum(forecast::gated_tcn(t.param(*x), t.param(*fw), t.param(*fb), t.param(*gw),
                                                            t.param(*gb), 2),
                                        20);
                },
                {x.get(), fw.get(), fb.get(), gw.get(), gb.get()});
    }
    {
        auto raw = std::make_shared<Parameter>("graph_raw", random_tensor({3, 3}, 81, -2, 2));
        auto z = std::make_shared<Parameter>("z", random_tensor({1, 3, 4, 2}, 82));
        auto lw = std::make_shared<Parameter>("low_w", random_tensor({6, 2}, 83));
        auto hw = std::make_shared<Parameter>("high_w", random_tensor({6, 2}, 84));
        c.check("forecaster", "fagcn_layer",
                [=](Tape& t) {
                    const auto f = graph::build_filters(ops::chi(t.param(*raw)));
                    return weighted_sum(forecast::fagcn_layer(f, t.param(*z), t.param(*lw), t.param(*hw), 2), 21);
                },
                {raw.get(), z.get(), lw.get(), hw.get()});
    }
    {
        forecast::FagwnConfig cfg;
        cfg.channels = 3;
        cfg.head_channels = 4;
        cfg.input_length = 8;
        cfg.horizon = 2;
        Initializer init(91);
        auto p = std::make_shared<forecast::FagwnParams>(forecast::init_fagwn(cfg, init));
        p->head2_b.value = random_tensor(p->head2_b.value.shape(), 92, 0.05, 0.2);
        auto x = std::make_shared<Tensor>(random_tensor({2, 8, 2, 1}, 93));
        auto a = std::make_shared<Parameter>("graph_raw", random_tensor({2, 2}, 94, -2, 2));
        std::vector<Parameter*> all{a.get()};
        p->collect(all);
        c.check("forecaster", "fagwn_forward",
                [=](Tape& t) {
                    return weighted_sum(forecast::fagwn_forward(t.constant(*x), ops::chi(t.param(*a)), *p), 22);
                },
                all);
    }
    {
        auto x1 = std::make_shared<Parameter>("x1", random_tensor({2, 2, 3, 1}, 101));
        auto x2 = std::make_shared<Parameter>("x2", random_tensor({2, 2, 3, 1}, 102));
        auto eta = std::make_shared<Parameter>("eta_raw", Tensor::scalar(inverse_softplus(0.1)));
        c.check("forecaster", "fuse_eta",
                [=](Tape& t) {
                    return weighted_sum(
                        forecast::fuse_outputs(t.param(*x1), t.param(*x2), ops::softplus(t.param(*eta))), 23);
                },
                {x1.get(), x2.get(), eta.get()});
    }
}

void training_checks(Collector& c) {
    auto pred = std::make_shared<Parameter>("pred", random_tensor({2, 2, 3, 1}, 111));
    auto target = std::make_shared<Tensor>(random_tensor({2, 2, 3, 1}, 112, 2, 3));
    auto mask = std::make_shared<Tensor>(random_tensor({2, 2, 3, 1}, 113, 0, 1));
    for (double& m : mask->values()) m = m < 0.7 ? 1.0 : 0.0;
    c.check("training", "masked_mae", [=](Tape& t) { return train::masked_mae(t.param(*pred), *target, *mask); },
            {pred.get()});
}

void model_checks(Collector& c) {
    ModelConfig cfg;
    cfg.nodes = 3;
    cfg.input_length = 8;
    cfg.horizon = 2;
    cfg.batch_size = 2;
    cfg.ltfe.period = 8;
    cfg.ltfe.levels = 3;
    cfg.ltfe.wavelet_order = 2;
    cfg.ltfe.conv_channels = 3;
    cfg.ltfe.hidden = 4;
    cfg.stfe_width = 3;
    cfg.fagru_hidden = 4;
    cfg.fagwn_channels = 4;
    cfg.fagwn_head = 4;
    cfg.seed = 121;
    data::NormStats stats{{0.5}, {2.0}};
    auto model = std::make_shared<FcdNet>(cfg, toy_series(48, 3, 122), stats);
    // Shift biases off zero so no ReLU sits on its kink and no imaginary
    // spectrum entry sits on the phase branch cut.
    for (Parameter* p : model->parameters()) {
        if ((p->name.ends_with("_b") || p->name.starts_with("stfe.b_")) && p->value.size() > 1) {
            p->value = random_tensor(p->value.shape(), std::hash<std::string>{}(p->name) % 1000, 0.05, 0.2);
        }
    }
    auto x = std::make_shared<Tensor>(random_tensor({2, 8, 3, 1}, 123));
    c.check("model", "full_model",
            [=](Tape& t) { return ops::scale(weighted_sum(model->forward(t, *x).prediction, 24), 0.1); },
            model->parameters(), kModelThreshold, 12);
}

} // namespace

std::vector<std::string> gradient_scopes() {
    return {"numeric", "ltfe", "stfe", "graphops", "forecaster", "training", "model"};
}

std::vector<SuiteResult> run_gradient_suite(const std::string& scope) {
    const auto scopes = gradient_scopes();
    if (scope != "all" && std::find(scopes.begin(), scopes.end(), scope) == scopes.end()) {
        throw ConfigError("unknown grad-check scope '" + scope + "'");
    }
    Collector c{scope, {}};
    if (c.want("numeric")) numeric_checks(c);
    if (c.want("ltfe")) ltfe_checks(c);
    if (c.want("stfe")) stfe_checks(c);
    if (c.want("graphops")) graphops_checks(c);
    if (c.want("forecaster")) forecaster_checks(c);
    if (c.want("training")) training_checks(c);
    if (c.want("model")) model_checks(c);
    return c.results;
}

} // namespace fcdnet
