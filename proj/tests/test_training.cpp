#include "fcdnet/errors.hpp"
#include "fcdnet/gradient_suite.hpp"
#include "fcdnet/model.hpp"
#include "fcdnet/ops.hpp"
#include "fcdnet/synth.hpp"
#include "fcdnet/training.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace fcdnet;
using namespace fcdnet::train;
using fcdnet::testing::random_tensor;

namespace {

data::SeriesFrame small_frame(std::uint64_t seed = 1, std::size_t steps = 260) {
    data::PlantedSpec spec;
    spec.nodes = 4;
    spec.season_period = 16;
    const auto sys = data::make_planted_system(spec, seed);
    return data::generate_planted(sys, steps, seed + 1).frame;
}

ModelConfig small_model(std::size_t nodes = 4) {
    ModelConfig c;
    c.nodes = nodes;
    c.input_length = 8;
    c.horizon = 3;
    c.batch_size = 4;
    c.ltfe.period = 16;
    c.ltfe.levels = 3;
    c.ltfe.conv_channels = 3;
    c.ltfe.hidden = 6;
    c.stfe_width = 4;
    c.fagru_hidden = 5;
    c.fagwn_channels = 3;
    c.fagwn_head = 5;
    c.dilations = {1, 2};
    c.rank = 2;
    c.seed = 7;
    return c;
}

TrainConfig quick(std::size_t epochs) {
    TrainConfig t;
    t.epochs = epochs;
    t.seed = 3;
    return t;
}

Tensor ones_like(const Tensor& t) { return Tensor(t.shape(), 1.0); }

} // namespace

TEST_SUITE("training") {

TEST_CASE("learning-rate schedule") {
    CHECK(lr_schedule(0) == 3e-3);
    CHECK(lr_schedule(9) == 3e-3);
    CHECK(lr_schedule(10) == 3e-4);
    CHECK(lr_schedule(20) == 3e-5);
    CHECK(lr_schedule(25) == 3e-5);
    CHECK(lr_schedule(40) == 3e-5);
    CHECK(lr_schedule(400) == 3e-5);
    TrainConfig slow;
    slow.lr0 = 1e-2;
    slow.decay = 0.5;
    slow.decay_every = 3;
    slow.lr_min = 1e-4;
    CHECK(lr_schedule(7, slow) == 2.5e-3);
}

TEST_CASE("masked MAE examples") {
    Tape tape;
    const Tensor target({1, 2, 1, 1}, std::vector<double>{1, 4});
    const Var pred = tape.constant(Tensor({1, 2, 1, 1}, std::vector<double>{1, 2}));
    CHECK(masked_mae(pred, target, ones_like(target)).value().item() == doctest::Approx(1.0));
    CHECK(masked_mae(tape.constant(target), target, ones_like(target)).value().item() == 0.0);
    const Tensor half({1, 2, 1, 1}, std::vector<double>{1, 0});
    CHECK(masked_mae(pred, target, half).value().item() == 0.0);
    CHECK_THROWS_AS(masked_mae(pred, target, Tensor(target.shape())), DataError);
}

TEST_CASE("masked targets never reach the gradient") {
    Parameter p("p", random_tensor({1, 3, 2, 1}, 1));
    Tensor target = random_tensor({1, 3, 2, 1}, 2);
    Tensor mask = ones_like(target);
    mask[2] = 0.0;
    auto grad_for = [&](const Tensor& t) {
        p.zero_grad();
        Tape tape;
        tape.backward(masked_mae(tape.param(p), t, mask));
        return p.grad;
    };
    const Tensor g1 = grad_for(target);
    target[2] = 1e6;
    CHECK(grad_for(target) == g1);
    CHECK(g1[2] == 0.0);
}

TEST_CASE("metric examples") {
    const Tensor pred({1, 1, 1, 1}, std::vector<double>{3}), target({1, 1, 1, 1}, std::vector<double>{2});
    const MetricReport r = metrics(pred, target, ones_like(target));
    CHECK(r.average.mae == doctest::Approx(1.0));
    CHECK(r.average.rmse == doctest::Approx(1.0));
    REQUIRE(r.average.mape.has_value());
    CHECK(*r.average.mape == doctest::Approx(50.0));

    const Tensor p2({1, 2, 1, 1}, std::vector<double>{1, 5}), t2({1, 2, 1, 1}, std::vector<double>{0, 4});
    const MetricReport r2 = metrics(p2, t2, ones_like(t2));
    CHECK(r2.average.mape_points == 1);
    CHECK(*r2.average.mape == doctest::Approx(25.0));
    CHECK(r2.horizons.size() == 2);
    CHECK_FALSE(r2.horizons[0].mape.has_value());

    const MetricReport zeros = metrics(p2, Tensor(t2.shape()), ones_like(t2));
    CHECK_FALSE(zeros.average.mape.has_value());

    const Tensor p3 = random_tensor({3, 4, 2, 1}, 3), t3 = random_tensor({3, 4, 2, 1}, 4);
    Tensor m3 = ones_like(t3);
    m3[5] = 0.0;
    const MetricReport r3 = metrics(p3, t3, m3);
    CHECK(r3.average.rmse >= r3.average.mae);
    CHECK(r3.masked_points == 1);
    for (const auto& h : r3.horizons) CHECK(h.rmse >= h.mae);
}

TEST_CASE("metric accumulation equals one pooled call") {
    const Tensor p = random_tensor({4, 2, 3, 1}, 5), t = random_tensor({4, 2, 3, 1}, 6);
    MetricAccumulator acc;
    acc.add(Tensor({2, 2, 3, 1}, std::vector<double>(p.values().begin(), p.values().begin() + 12)),
            Tensor({2, 2, 3, 1}, std::vector<double>(t.values().begin(), t.values().begin() + 12)), Tensor({2, 2, 3, 1}, 1.0));
    acc.add(Tensor({2, 2, 3, 1}, std::vector<double>(p.values().begin() + 12, p.values().end())),
            Tensor({2, 2, 3, 1}, std::vector<double>(t.values().begin() + 12, t.values().end())), Tensor({2, 2, 3, 1}, 1.0));
    const MetricReport pooled = metrics(p, t, ones_like(t));
    CHECK(acc.report().average.mae == doctest::Approx(pooled.average.mae).epsilon(1e-14));
    CHECK(acc.report().average.rmse == doctest::Approx(pooled.average.rmse).epsilon(1e-14));
}

TEST_CASE("reported MAE follows consistent shifts and scales of the data") {
    const data::SeriesFrame raw = small_frame();
    data::SeriesFrame shifted = raw, scaled = raw;
    for (double& v : shifted.values.values()) v += 25.0;
    for (double& v : scaled.values.values()) v *= 4.0;
    const Dataset a = prepare(raw), b = prepare(shifted), c = prepare(scaled);
    FcdNet ma(small_model(), train_series(a), a.stats);
    FcdNet mb(small_model(), train_series(b), b.stats);
    FcdNet mc(small_model(), train_series(c), c.stats);
    const double ea = evaluate(ma, a, data::SplitPart::test).average.mae;
    CHECK(std::abs(evaluate(mb, b, data::SplitPart::test).average.mae - ea) < 1e-10);
    CHECK(std::abs(evaluate(mc, c, data::SplitPart::test).average.mae - 4.0 * ea) < 1e-10);
}

TEST_CASE("zero epochs leave the model untouched") {
    const Dataset ds = prepare(small_frame());
    FcdNet model(small_model(), train_series(ds), ds.stats);
    const auto before = model.snapshot();
    const TrainResult r = train::train(model, ds, quick(0));
    CHECK(r.log.empty());
    CHECK_FALSE(r.best_epoch.has_value());
    CHECK(model.snapshot() == before);
}

TEST_CASE("identical seeds give identical logs and weights") {
    const Dataset ds = prepare(small_frame());
    FcdNet m1(small_model(), train_series(ds), ds.stats), m2(small_model(), train_series(ds), ds.stats);
    const TrainResult r1 = train::train(m1, ds, quick(3)), r2 = train::train(m2, ds, quick(3));
    REQUIRE(r1.log.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(format_log_row(r1.log[i], false) == format_log_row(r2.log[i], false));
    CHECK(m1.snapshot() == m2.snapshot());
}

TEST_CASE("best validation epoch is restored") {
    const Dataset ds = prepare(small_frame());
    FcdNet model(small_model(), train_series(ds), ds.stats);
    const TrainResult r = train::train(model, ds, quick(5));
    for (const auto& row : r.log) CHECK(r.best_val_mae <= row.val_mae);
    CHECK(evaluate(model, ds, data::SplitPart::val).average.mae == r.best_val_mae);
}

TEST_CASE("training reduces the training loss") {
    const Dataset ds = prepare(small_frame());
    FcdNet model(small_model(), train_series(ds), ds.stats);
    TrainConfig cfg = quick(8);
    cfg.decay_every = 100;
    const TrainResult r = train::train(model, ds, cfg);
    CHECK(r.log.back().train_mae < r.log.front().train_mae);
}

TEST_CASE("masked targets do not change the trajectory") {
    data::SeriesFrame raw = small_frame();
    const std::size_t step = raw.range(data::SplitPart::train).begin + 40;
    raw.mask[step * raw.nodes() + 2] = 0;
    data::SeriesFrame flipped = raw;
    flipped.values[step * raw.nodes() + 2] = 1e4;
    const Dataset a = prepare(raw), b = prepare(flipped);
    FcdNet ma(small_model(), train_series(a), a.stats), mb(small_model(), train_series(b), b.stats);
    train::train(ma, a, quick(2));
    train::train(mb, b, quick(2));
    CHECK(ma.snapshot() == mb.snapshot());
}

TEST_CASE("divergence names the epoch and batch") {
    const Dataset ds = prepare(small_frame());
    FcdNet model(small_model(), train_series(ds), ds.stats);
    for (Parameter* p : model.parameters())
        if (p->name == "fagru.readout_b") p->value.fill(1e308);
    try {
        train::train(model, ds, quick(1));
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("epoch 0") != std::string::npos);
        CHECK(msg.find("batch 0") != std::string::npos);
    }
}

TEST_CASE("too few training windows for one batch") {
    const Dataset ds = prepare(small_frame(1, 260));
    ModelConfig c = small_model();
    c.batch_size = 500;
    FcdNet model(c, train_series(ds), ds.stats);
    CHECK_THROWS_AS(train::train(model, ds, quick(1)), DataError);
}

TEST_CASE("ablation substitutes a low-rank graph") {
    const Dataset ds = prepare(small_frame());
    auto has = [](FcdNet& m, const std::string& prefix) {
        for (Parameter* p : m.parameters())
            if (p->name.rfind(prefix, 0) == 0) return true;
        return false;
    };
    const Tensor x1 = random_tensor({4, 8, 4, 1}, 10), x2 = random_tensor({4, 8, 4, 1}, 11);

    ModelConfig full = small_model();
    FcdNet mf(full, train_series(ds), ds.stats);
    CHECK_FALSE(has(mf, "lowrank."));
    CHECK(has(mf, "ltfe."));
    CHECK(has(mf, "stfe."));

    ModelConfig no_ltfe = small_model();
    no_ltfe.ablation = Ablation::no_ltfe;
    FcdNet ml(no_ltfe, train_series(ds), ds.stats);
    CHECK(has(ml, "lowrank."));
    CHECK_FALSE(has(ml, "ltfe."));
    CHECK(has(ml, "stfe."));
    CHECK_FALSE(ml.short_term_graph(x1) == ml.short_term_graph(x2));
    for (double v : fcdnet::testing::vec(ml.long_term_graph())) CHECK((v >= 0.0 && v <= 1.0));

    ModelConfig no_stfe = small_model();
    no_stfe.ablation = Ablation::no_stfe;
    FcdNet ms(no_stfe, train_series(ds), ds.stats);
    CHECK(has(ms, "ltfe."));
    CHECK_FALSE(has(ms, "stfe."));
    CHECK(ms.short_term_graph(x1) == ms.short_term_graph(x2));
    for (double v : fcdnet::testing::vec(ms.short_term_graph(x1))) CHECK((v >= 0.0 && v <= 1.0));
    for (Parameter* p : ms.parameters())
        if (p->name == "lowrank.e1") CHECK(p->value.shape() == Shape{4, 2});

    // The substitute graph is trained end to end.
    FcdNet trained(no_stfe, train_series(ds), ds.stats);
    const Tensor before = trained.short_term_graph(x1);
    train::train(trained, ds, quick(1));
    CHECK_FALSE(trained.short_term_graph(x1) == before);

    CHECK(parse_ablation("no_ltfe") == Ablation::no_ltfe);
    CHECK(to_string(Ablation::no_stfe) == "no_stfe");
    CHECK_THROWS_AS(parse_ablation("no_graph"), ConfigError);
}

TEST_CASE("persistence baseline") {
    // A series constant within each window span scores zero.
    data::SeriesFrame f;
    f.values = Tensor({60, 2, 1}, 3.0);
    f.values[0] = 1.0;
    f.mask.assign(120, 1);
    const Dataset ds = prepare(f);
    const MetricReport r = persistence_baseline(ds, data::SplitPart::test, 4, 2);
    CHECK(r.average.mae == 0.0);
}

TEST_CASE("ROC AUC matches pairwise counting") {
    const Tensor s = random_tensor({40}, 12);
    std::vector<double> scores(s.values().begin(), s.values().end());
    for (std::size_t i = 0; i < 10; ++i) scores[i * 3] = scores[i * 3 + 1];  // ties
    std::vector<int> labels(40);
    for (std::size_t i = 0; i < 40; ++i) labels[i] = (i * 7) % 3 == 0 ? 1 : 0;
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 40; ++j)
            if (labels[i] == 1 && labels[j] == 0) {
                pairs += 1.0;
                wins += scores[i] > scores[j] ? 1.0 : (scores[i] == scores[j] ? 0.5 : 0.0);
            }
    CHECK(roc_auc(scores, labels) == doctest::Approx(wins / pairs).epsilon(1e-14));
    CHECK(roc_auc({0.1, 0.9}, {0, 1}) == 1.0);
    CHECK(roc_auc({0.5, 0.5}, {0, 1}) == 0.5);
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {1, 1}), ContractError);

    const Tensor support({3, 3}, std::vector<double>{1, 1, 0, 0, 1, 0, 1, 0, 1});
    const Tensor graph({3, 3}, std::vector<double>{0.0, 0.9, 0.1, 0.2, 0.0, 0.3, 0.8, 0.25, 0.0});
    CHECK(graph_auc(graph, support) == 1.0);
}

TEST_CASE("training scope of the gradient suite") {
    for (const auto& r : run_gradient_suite("training")) {
        INFO(r.report.name);
        CHECK(r.passed());
    }
}

}
