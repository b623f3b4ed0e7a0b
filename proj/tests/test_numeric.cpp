#include "fcdnet/adam.hpp"
#include "fcdnet/autograd.hpp"
#include "fcdnet/errors.hpp"
#include "fcdnet/grad_check.hpp"
#include "fcdnet/gradient_suite.hpp"
#include "fcdnet/ops.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace fcdnet;
using fcdnet::testing::random_tensor;

TEST_SUITE("numeric") {

TEST_CASE("tensor value count follows the shape") {
    Tensor t({2, 3, 4});
    CHECK(t.size() == 24);
    t.at({1, 2, 3}) = 5.0;
    CHECK(t[23] == 5.0);
    CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(t.reshaped({5, 5}), ShapeError);
}

TEST_CASE("permute moves axes") {
    Tensor t({2, 3}, std::vector<double>{0, 1, 2, 3, 4, 5});
    const Tensor p = permute(t, {1, 0});
    CHECK(p.shape() == Shape{3, 2});
    CHECK(p.at({2, 1}) == 5.0);
    CHECK(p.at({1, 0}) == 1.0);
}

TEST_CASE("backward of sum of squares") {
    Tape tape;
    Parameter x("x", Tensor({2}, std::vector<double>{1, 2}));
    x.zero_grad();
    const Var loss = ops::sum_all(ops::square(tape.param(x)));
    tape.backward(loss);
    CHECK(x.grad[0] == doctest::Approx(2.0));
    CHECK(x.grad[1] == doctest::Approx(4.0));
}

TEST_CASE("constant loss leaves gradients zero") {
    Tape tape;
    Parameter x("x", Tensor({3}, 1.5));
    x.zero_grad();
    const Var c = tape.constant(Tensor::scalar(4.0));
    const Var unused = tape.param(x);
    (void)unused;
    tape.backward(c);
    for (double g : x.grad.values()) CHECK(g == 0.0);
}

TEST_CASE("parameter reuse accumulates every contribution") {
    Tape tape;
    Parameter w("w", Tensor::scalar(3.0));
    w.zero_grad();
    Var h = tape.constant(Tensor::scalar(1.0));
    for (int step = 0; step < 4; ++step) h = ops::scale_by(h, tape.param(w));
    tape.backward(h);  // d(w^4)/dw = 4 w^3
    CHECK(w.grad[0] == doctest::Approx(108.0));
}

TEST_CASE("non-scalar loss is a contract error") {
    Tape tape;
    const Var v = tape.constant(Tensor({2}));
    CHECK_THROWS_AS(tape.backward(v), ContractError);
}

TEST_CASE("non-finite results raise a numeric error naming the op") {
    Tape tape;
    const Var x = tape.constant(Tensor({2}, std::vector<double>{1.0, -1.0}));
    CHECK_THROWS_AS(ops::pow_scalar(x, 0.5), NumericError);
    const Var big = tape.constant(Tensor::scalar(std::numeric_limits<double>::max()));
    try {
        ops::scale(big, 10.0);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("scale") != std::string::npos);
    }
}

TEST_CASE("relu subgradient at zero is zero") {
    Tape tape;
    Parameter x("x", Tensor({3}, std::vector<double>{-1.0, 0.0, 2.0}));
    x.zero_grad();
    tape.backward(ops::sum_all(ops::relu(tape.param(x))));
    CHECK(x.grad[0] == 0.0);
    CHECK(x.grad[1] == 0.0);
    CHECK(x.grad[2] == 1.0);
}

TEST_CASE("dilated causal convolution matches a brute-force sliding dot product") {
    const Tensor x = random_tensor({2, 3, 9}, 1);
    const Tensor w = random_tensor({4, 3, 2}, 2);
    const std::size_t d = 2;
    Tape tape;
    const Tensor y = ops::dilated_causal_conv1d(tape.constant(x), tape.constant(w), d).value();
    REQUIRE(y.shape() == Shape{2, 4, 7});
    double err = 0.0;
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t o = 0; o < 4; ++o)
            for (std::size_t t = 0; t < 7; ++t) {
                double acc = 0.0;
                for (std::size_t c = 0; c < 3; ++c)
                    for (std::size_t j = 0; j < 2; ++j) acc += w.at({o, c, j}) * x.at({b, c, t + j * d});
                err = std::max(err, std::abs(acc - y.at({b, o, t})));
            }
    CHECK(err < 1e-12);
}

TEST_CASE("unit kernel convolution is the identity") {
    const Tensor x = random_tensor({1, 1, 6}, 3);
    Tape tape;
    const Tensor y = ops::dilated_causal_conv1d(tape.constant(x), tape.constant(Tensor({1, 1, 1}, 1.0)), 1).value();
    CHECK(y == x);
}

TEST_CASE("causal convolution never reads past its window") {
    const Tensor w = random_tensor({2, 2, 2}, 4);
    Tensor x = random_tensor({1, 2, 10}, 5);
    Tape tape;
    const Tensor before = ops::dilated_causal_conv1d(tape.constant(x), tape.constant(w), 2).value();
    for (std::size_t c = 0; c < 2; ++c) x.at({0, c, 7}) += 1.0;
    const Tensor after = ops::dilated_causal_conv1d(tape.constant(x), tape.constant(w), 2).value();
    // Output t reads x[t] and x[t + 2]; index 7 first enters at t = 5.
    for (std::size_t o = 0; o < 2; ++o)
        for (std::size_t t = 0; t < 5; ++t) CHECK(before.at({0, o, t}) == after.at({0, o, t}));
    CHECK(before.at({0, 0, 5}) != after.at({0, 0, 5}));
}

TEST_CASE("convolution input too short is a shape error") {
    Tape tape;
    CHECK_THROWS_AS(ops::dilated_causal_conv1d(tape.constant(Tensor({1, 1, 2})), tape.constant(Tensor({1, 1, 2})), 2),
                    ShapeError);
}

TEST_CASE("first Adam step moves by lr against the gradient sign") {
    Tensor p({3}, std::vector<double>{0.5, -0.5, 2.0});
    const Tensor g({3}, std::vector<double>{3.0, -0.01, 1e-3});
    AdamState s(p.shape());
    adam_step(p, g, s, 0.1);
    CHECK(s.t == 1);
    CHECK(p[0] == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(-0.4).epsilon(1e-5));
    CHECK(p[2] == doctest::Approx(1.9).epsilon(1e-4));
}

TEST_CASE("Adam with zero gradient or zero rate is the identity") {
    Tensor p({2}, std::vector<double>{1.0, -3.0});
    const Tensor before = p;
    AdamState s(p.shape());
    adam_step(p, Tensor({2}), s, 0.1);
    CHECK(p == before);
    adam_step(p, Tensor({2}, 1.0), s, 0.0);
    CHECK(p == before);
}

TEST_CASE("Adam drives x^2 towards zero") {
    // Reference loop of the textbook update, run side by side.
    Tensor p = Tensor::scalar(1.0);
    AdamState s(p.shape());
    double x = 1.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 100; ++t) {
        adam_step(p, Tensor::scalar(2.0 * p[0]), s, 0.1);
        const double g = 2.0 * x;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        x -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    }
    CHECK(std::abs(p[0]) < 0.1);
    CHECK(p[0] == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("Adam rejects mismatched shapes") {
    Tensor p({2});
    AdamState s(p.shape());
    CHECK_THROWS_AS(adam_step(p, Tensor({3}), s, 0.1), ContractError);
}

TEST_CASE("gradient clipping rescales to the global norm") {
    Parameter a("a", Tensor({2}));
    Parameter b("b", Tensor({1}));
    a.grad = Tensor({2}, std::vector<double>{3.0, 0.0});
    b.grad = Tensor({1}, std::vector<double>{4.0});
    CHECK(clip_grad_norm({&a, &b}, 1.0) == doctest::Approx(5.0));
    CHECK(a.grad[0] == doctest::Approx(0.6));
    CHECK(b.grad[0] == doctest::Approx(0.8));
}

TEST_CASE("grad_check on small operations") {
    GradCheckOptions opt;
    SUBCASE("matrix multiply") {
        Parameter a("a", random_tensor({3, 4}, 10));
        Parameter b("b", random_tensor({4, 2}, 11));
        const auto r = grad_check("matmul", [&](Tape& t) { return ops::sum_all(ops::square(ops::matmul(t.param(a), t.param(b)))); },
                                  {&a, &b}, opt);
        CHECK(r.max_rel_error < 1e-6);
        CHECK(r.entries_checked == 20);
    }
    SUBCASE("relu away from zero") {
        Tensor x0 = random_tensor({10}, 12);
        for (double& v : x0.values())
            if (std::abs(v) < 1e-3) v = 0.5;
        Parameter x("x", x0);
        const Tensor w = random_tensor({10}, 13);
        const auto r = grad_check("relu", [&](Tape& t) { return ops::sum_all(ops::mul(ops::relu(t.param(x)), t.constant(w))); },
                                  {&x}, opt);
        CHECK(r.max_rel_error < 1e-6);
    }
    SUBCASE("chi on (0.1, 0.9)") {
        Parameter x("x", random_tensor({8}, 14, 0.1, 0.9));
        const auto r = grad_check("chi", [&](Tape& t) { return ops::sum_all(ops::square(ops::chi(t.param(x)))); }, {&x}, opt);
        CHECK(r.max_rel_error < 1e-5);
    }
}

TEST_CASE("grad_check restores parameters") {
    Parameter x("x", random_tensor({5}, 15));
    const Tensor before = x.value;
    grad_check("id", [&](Tape& t) { return ops::sum_all(ops::tanh(t.param(x))); }, {&x});
    CHECK(x.value == before);
}

TEST_CASE("a corrupted backward is reported with its name") {
    Parameter x("x", random_tensor({4}, 16));
    const auto broken = [&](Tape& t) {
        const Var px = t.param(x);
        Tensor y = px.value();
        for (double& v : y.values()) v = v * v;
        // Claims d(x^2)/dx = x instead of 2x.
        const Var sq = t.record("broken_square", y, {px}, [px](Tape& tt, const Tensor& g, const Tensor&) {
            Tensor& gx = tt.grad_of(px);
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * tt.value(px)[i];
        });
        return ops::sum_all(sq);
    };
    const auto r = grad_check("broken_square", broken, {&x});
    CHECK_FALSE(r.passed(1e-4));
    CHECK(r.name == "broken_square");
    CHECK(r.worst_parameter == "x");
    CHECK(r.max_rel_error == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("numeric scope of the gradient suite") {
    for (const auto& r : run_gradient_suite("numeric")) {
        INFO(r.report.name);
        CHECK(r.passed());
    }
}

}
