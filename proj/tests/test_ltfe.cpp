#include "fcdnet/adam.hpp"
#include "fcdnet/errors.hpp"
#include "fcdnet/gradient_suite.hpp"
#include "fcdnet/ltfe.hpp"
#include "fcdnet/ops.hpp"
#include "fcdnet/signal.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace fcdnet;
using namespace fcdnet::ltfe;
using fcdnet::testing::random_tensor;

namespace {

LtfeConfig small_config(std::size_t period = 16, std::size_t levels = 3) {
    LtfeConfig c;
    c.period = period;
    c.levels = levels;
    c.conv_channels = 4;
    c.hidden = 6;
    return c;
}

std::size_t parameter_count(LtfeParams& p) {
    std::vector<Parameter*> all;
    p.collect(all);
    std::size_t n = 0;
    for (Parameter* q : all) n += q->value.size();
    return n;
}

} // namespace

TEST_SUITE("ltfe") {

TEST_CASE("preprocessed shapes for P=288, L=5, N=4") {
    const Tensor series = random_tensor({576, 4, 1}, 1);
    const LtfePreprocessed pre = ltfe_preprocess(series, LtfeConfig{});
    CHECK(pre.q1.shape() == Shape{4, 10, 288});
    CHECK(pre.q2.shape() == Shape{4, 1440, 2});
    CHECK(pre.segments == 2);
    CHECK(pre.merged_features == 5);
}

TEST_CASE("constant series preprocesses to zeros") {
    const LtfePreprocessed pre = ltfe_preprocess(Tensor({64, 3, 2}, 4.5), small_config());
    for (double v : fcdnet::testing::vec(pre.q1.tensor())) CHECK(v == 0.0);
    for (double v : fcdnet::testing::vec(pre.q2.tensor())) CHECK(v == 0.0);
}

TEST_CASE("too few periods is a data error") {
    CHECK_THROWS_AS(ltfe_preprocess(random_tensor({31, 2, 1}, 2), small_config()), DataError);
}

TEST_CASE("q1 layout matches an independent recomputation") {
    const std::size_t p = 16, levels = 3, n = 3, d = 2;
    const Tensor series = random_tensor({50, n, d}, 3);
    const LtfeConfig cfg = small_config(p, levels);
    const LtfePreprocessed pre = ltfe_preprocess(series, cfg);
    const std::size_t s = 3;
    REQUIRE(pre.q1.shape() == Shape{n, s * d * levels, p});
    REQUIRE(pre.q2.shape() == Shape{n, p * d * levels, s});

    // Z[s][t][i][f][l] by direct decomposition of the differenced series.
    const auto w = signal::Wavelet::daubechies(4);
    const auto gates = cfg.resolved_gates();
    std::vector<double> z(s * p * n * d * levels);
    auto zi = [&](std::size_t a, std::size_t t, std::size_t i, std::size_t f, std::size_t l) {
        return (((a * p + t) * n + i) * d + f) * levels + l;
    };
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t f = 0; f < d; ++f) {
                std::vector<double> seg(p);
                for (std::size_t t = 0; t < p; ++t) {
                    const std::size_t step = a * p + t;
                    seg[t] = step == 0 ? 0.0 : series.at({step, i, f}) - series.at({step - 1, i, f});
                }
                const auto parts = signal::reconstruct_levels(signal::gate_coeffs(signal::dwt_decompose(seg, w, levels - 1), gates), w);
                for (std::size_t t = 0; t < p; ++t)
                    for (std::size_t l = 0; l < levels; ++l) z[zi(a, t, i, f, l)] = parts.at({t, l});
            }
    const Tensor q1 = pre.q1.tensor(), q2 = pre.q2.tensor();
    double err1 = 0.0, err2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < d; ++f)
            for (std::size_t l = 0; l < levels; ++l)
                for (std::size_t t = 0; t < p; ++t) {
                    // Branch 1: standardize each (t, i, f, l) over segments.
                    double m = 0.0, v = 0.0;
                    for (std::size_t a = 0; a < s; ++a) m += z[zi(a, t, i, f, l)] / 3.0;
                    for (std::size_t a = 0; a < s; ++a) v += std::pow(z[zi(a, t, i, f, l)] - m, 2) / 3.0;
                    for (std::size_t a = 0; a < s; ++a) {
                        const double expect = (z[zi(a, t, i, f, l)] - m) / (std::sqrt(v) + signal::kStNormEps);
                        const std::size_t ch = (a * d + f) * levels + l;
                        err1 = std::max(err1, std::abs(q1.at({i, ch, t}) - expect));
                    }
                }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < d; ++f)
            for (std::size_t l = 0; l < levels; ++l)
                for (std::size_t a = 0; a < s; ++a) {
                    // Branch 2: standardize each (s, i, f, l) over positions.
                    double m = 0.0, v = 0.0;
                    for (std::size_t t = 0; t < p; ++t) m += z[zi(a, t, i, f, l)] / 16.0;
                    for (std::size_t t = 0; t < p; ++t) v += std::pow(z[zi(a, t, i, f, l)] - m, 2) / 16.0;
                    for (std::size_t t = 0; t < p; ++t) {
                        const double expect = (z[zi(a, t, i, f, l)] - m) / (std::sqrt(v) + signal::kStNormEps);
                        const std::size_t ch = (t * d + f) * levels + l;
                        err2 = std::max(err2, std::abs(q2.at({i, ch, a}) - expect));
                    }
                }
    CHECK(err1 < 1e-10);
    CHECK(err2 < 1e-10);
}

TEST_CASE("permuting segments permutes q1 channels and reshuffles q2") {
    const std::size_t p = 16, n = 2, levels = 3;
    // Build both series from their differences, with a zero difference at
    // every segment start so that segments carry no cross-boundary step.
    Tensor d = random_tensor({48, n, 1}, 4);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < n; ++i) d.at({a * p, i, 0}) = 0.0;
    const std::vector<std::size_t> order{2, 0, 1};
    Tensor dp({48, n, 1});
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t t = 0; t < p; ++t)
            for (std::size_t i = 0; i < n; ++i) dp.at({a * p + t, i, 0}) = d.at({order[a] * p + t, i, 0});
    auto integrate = [&](const Tensor& diffs) {
        Tensor x({48, n, 1});
        for (std::size_t t = 1; t < 48; ++t)
            for (std::size_t i = 0; i < n; ++i) x.at({t, i, 0}) = x.at({t - 1, i, 0}) + diffs.at({t, i, 0});
        return x;
    };

    const auto cfg = small_config(p, levels);
    const LtfePreprocessed a = ltfe_preprocess(integrate(d), cfg), b = ltfe_preprocess(integrate(dp), cfg);
    const Tensor a1 = a.q1.tensor(), b1 = b.q1.tensor();
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t s = 0; s < 3; ++s)
            for (std::size_t l = 0; l < levels; ++l)
                for (std::size_t t = 0; t < p; ++t)
                    err = std::max(err, std::abs(b1.at({i, s * levels + l, t}) - a1.at({i, order[s] * levels + l, t})));
    CHECK(err < 1e-9);
    CHECK(max_abs_diff(a.q2.tensor(), b.q2.tensor()) > 1e-3);
}

TEST_CASE("preprocessing is stable and compact storage stays close") {
    const Tensor series = random_tensor({64, 3, 1}, 5);
    auto cfg = small_config();
    const LtfePreprocessed a = ltfe_preprocess(series, cfg), b = ltfe_preprocess(series, cfg);
    CHECK(a.q1.tensor() == b.q1.tensor());
    CHECK(a.q2.tensor() == b.q2.tensor());
    cfg.compact_storage = true;
    const LtfePreprocessed c = ltfe_preprocess(series, cfg);
    CHECK(c.q1.compact());
    CHECK(max_abs_diff(c.q1.tensor(), a.q1.tensor()) < 1e-5);
}

TEST_CASE("zero input with zero biases gives a uniform 0.5 graph") {
    Initializer init(6);
    LtfePreprocessed pre;
    pre.nodes = 5;
    pre.merged_features = 3;
    pre.q1 = StoredTensor(Tensor({5, 6, 16}), false);
    pre.q2 = StoredTensor(Tensor({5, 48, 2}), false);
    const auto cfg = small_config();
    LtfeParams params = init_ltfe(pre, cfg, 0.9, init);
    Tape tape;
    const Tensor a = ltfe_forward(tape, pre, params, 1.0).value();
    CHECK(a.shape() == Shape{5, 5});
    for (double v : a.values()) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("graph entries stay in [0, 1] with large weights") {
    const LtfePreprocessed pre = ltfe_preprocess(random_tensor({64, 4, 1}, 7), small_config());
    Initializer init(8);
    LtfeParams params = init_ltfe(pre, small_config(), 0.9, init);
    for (double& v : params.branch1.fc1_w.value.values()) v *= 50.0;
    for (double& v : params.branch2.fc1_b.value.values()) v = -40.0;
    Tape tape;
    const Tensor a = ltfe_forward(tape, pre, params, 1.0).value();
    for (double v : a.values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("chi squashing") {
    Tape tape;
    const Tensor x = random_tensor({200}, 9, -6, 6);
    const Tensor y = ops::chi(tape.constant(x)).value();
    const Tensor ym = ops::chi(tape.constant(Tensor({200}, 0.0))).value();
    CHECK(ym[0] == 0.5);
    Tensor neg = x;
    for (double& v : neg.values()) v = -v;
    const Tensor yn = ops::chi(tape.constant(neg)).value();
    for (std::size_t i = 0; i < 200; ++i) CHECK(y[i] + yn[i] == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t i = 0; i < 200; ++i)
        for (std::size_t j = 0; j < 200; ++j)
            if (x[i] < x[j]) CHECK(y[i] < y[j]);
}

TEST_CASE("beta fusion") {
    Tape tape;
    const Var a1 = tape.constant(random_tensor({3, 3}, 10, 0, 1));
    const Var a2 = tape.constant(random_tensor({3, 3}, 11, 0, 1));
    const Tensor at_one = fuse_beta(a1, a2, tape.constant(Tensor::scalar(1.0))).value();
    CHECK(at_one == a1.value());
    const Tensor same = fuse_beta(a1, a1, tape.constant(Tensor::scalar(0.37))).value();
    CHECK(max_abs_diff(same, a1.value()) < 1e-15);

    const LtfePreprocessed pre = ltfe_preprocess(random_tensor({64, 2, 1}, 12), small_config());
    Initializer init(13);
    const LtfeParams params = init_ltfe(pre, small_config(), 0.9, init);
    CHECK(1.0 / (1.0 + std::exp(-params.beta_raw.value[0])) == doctest::Approx(0.9));
}

TEST_CASE("default gates") {
    LtfeConfig c;
    CHECK(c.resolved_gates() == std::vector<double>{1.0, 0.1, 0.1, 0.1, 0.1});
    c.gates = {1.0, 0.5};
    CHECK_THROWS_AS(c.resolved_gates(), ConfigError);
}

TEST_CASE("parameter count is affine in N") {
    auto count_for = [](std::size_t n) {
        const LtfePreprocessed pre = ltfe_preprocess(random_tensor({64, n, 1}, 14 + n), small_config());
        Initializer init(1);
        LtfeParams p = init_ltfe(pre, small_config(), 0.9, init);
        return parameter_count(p);
    };
    const std::size_t c1 = count_for(3), c2 = count_for(6), c3 = count_for(9);
    CHECK(c2 - c1 == c3 - c2);
    CHECK(c2 > c1);
}

TEST_CASE("one training step changes both conv kernels") {
    const LtfePreprocessed pre = ltfe_preprocess(random_tensor({64, 4, 1}, 20), small_config());
    Initializer init(21);
    LtfeParams params = init_ltfe(pre, small_config(), 0.9, init);
    const Tensor k1 = params.branch1.conv_w.value, k2 = params.branch2.conv_w.value;
    std::vector<Parameter*> all;
    params.collect(all);
    Adam adam(all);
    for (Parameter* p : all) p->zero_grad();
    Tape tape;
    const Var a = ltfe_forward(tape, pre, params, 1.0);
    const Var target = tape.constant(random_tensor({4, 4}, 22, 0, 1));
    tape.backward(ops::sum_all(ops::square(ops::sub(a, target))));
    adam.step(all, 1e-2);
    CHECK_FALSE(params.branch1.conv_w.value == k1);
    CHECK_FALSE(params.branch2.conv_w.value == k2);
}

TEST_CASE("ltfe scope of the gradient suite") {
    for (const auto& r : run_gradient_suite("ltfe")) {
        INFO(r.report.name);
        CHECK(r.passed());
    }
}

}
