#include "fcdnet/ops.hpp"

#include "fcdnet/errors.hpp"
#include "fcdnet/fft.hpp"
#include "fcdnet/signal.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace fcdnet::ops {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

Tape& same_tape(const char* op, const Var& a, const Var& b) {
    if (!a.valid() || !b.valid()) throw ContractError(std::string(op) + ": invalid operand");
    if (&a.tape() != &b.tape()) throw ContractError(std::string(op) + ": operands on different tapes");
    return a.tape();
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
    }
}

double stable_sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Elementwise unary op given value and derivative-from-(x, y) functions.
template <typename F, typename DF>
Var unary(const char* op, const Var& x, F f, DF df) {
    const Tensor& xv = x.value();
    Tensor y(xv.shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(xv[i]);
    return x.tape().record(op, std::move(y), {x}, [x, df](Tape& t, const Tensor& g, const Tensor& out) {
        const Tensor& xv = t.value(x);
        Tensor& gx = t.grad_of(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * df(xv[i], out[i]);
    });
}

struct AxisSplit {
    std::size_t outer = 1;
    std::size_t len = 1;
    std::size_t inner = 1;
};

AxisSplit split_at(const Shape& s, std::size_t axis) {
    AxisSplit r;
    for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
    r.len = s[axis];
    for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
    return r;
}

} // namespace

Var add(const Var& a, const Var& b) {
    Tape& tape = same_tape("add", a, b);
    require_same_shape("add", a, b);
    Tensor y = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
    return tape.record("add", std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g, const Tensor&) {
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

Var sub(const Var& a, const Var& b) {
    Tape& tape = same_tape("sub", a, b);
    require_same_shape("sub", a, b);
    Tensor y = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
    return tape.record("sub", std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g, const Tensor&) {
        t.accumulate(a, g);
        if (t.requires_grad(b)) {
            Tensor& gb = t.grad_of(b);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    Tape& tape = same_tape("mul", a, b);
    require_same_shape("mul", a, b);
    Tensor y = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
    return tape.record("mul", std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g, const Tensor&) {
        const Tensor& av = t.value(a);
        const Tensor& bv = t.value(b);
        if (t.requires_grad(a)) {
            Tensor& ga = t.grad_of(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (t.requires_grad(b)) {
            Tensor& gb = t.grad_of(b);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
    });
}

Var scale(const Var& x, double c) {
    return unary("scale", x, [c](double v) { return c * v; }, [c](double, double) { return c; });
}

Var add_scalar(const Var& x, double c) {
    return unary("add_scalar", x, [c](double v) { return v + c; }, [](double, double) { return 1.0; });
}

Var one_minus(const Var& x) {
    return unary("one_minus", x, [](double v) { return 1.0 - v; }, [](double, double) { return -1.0; });
}

Var neg(const Var& x) { return scale(x, -1.0); }

Var scale_by(const Var& x, const Var& s) {
    Tape& tape = same_tape("scale_by", x, s);
    if (s.size() != 1) throw ShapeError("scale_by: scale must hold one value");
    const double c = s.value()[0];
    Tensor y = x.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= c;
    return tape.record("scale_by", std::move(y), {x, s}, [x, s](Tape& t, const Tensor& g, const Tensor&) {
        const double c = t.value(s)[0];
        const Tensor& xv = t.value(x);
        if (t.requires_grad(x)) {
            Tensor& gx = t.grad_of(x);
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * c;
        }
        if (t.requires_grad(s)) {
            double acc = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * xv[i];
            t.grad_of(s)[0] += acc;
        }
    });
}

Var sigmoid(const Var& x) {
    return unary("sigmoid", x, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& x) {
    return unary("tanh", x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(const Var& x) {
    return unary("relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
                 [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var softplus(const Var& x) {
    return unary("softplus", x, [](double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); },
                 [](double v, double) { return stable_sigmoid(v); });
}

Var pow_scalar(const Var& x, double p) {
    for (double v : x.value().values()) {
        if (!(v > 0.0)) throw NumericError("pow_scalar: base must be strictly positive");
    }
    return unary("pow_scalar", x, [p](double v) { return std::pow(v, p); },
                 [p](double v, double) { return p * std::pow(v, p - 1.0); });
}

Var square(const Var& x) {
    return unary("square", x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Var chi(const Var& x, double tau) {
    if (!(tau > 0.0)) throw ContractError("chi: temperature must be positive");
    return unary("chi", x, [tau](double v) { return stable_sigmoid(v / tau); },
                 [tau](double, double y) { return y * (1.0 - y) / tau; });
}

Var add_bias(const Var& x, const Var& b) {
    Tape& tape = same_tape("add_bias", x, b);
    const std::size_t c = b.size();
    if (x.shape().empty() || x.shape().back() != c) {
        throw ShapeError("add_bias: bias of size " + std::to_string(c) + " does not match " + shape_string(x.shape()));
    }
    Tensor y = x.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i % c];
    return tape.record("add_bias", std::move(y), {x, b}, [x, b, c](Tape& t, const Tensor& g, const Tensor&) {
        t.accumulate(x, g);
        if (t.requires_grad(b)) {
            Tensor& gb = t.grad_of(b);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i % c] += g[i];
        }
    });
}

Var mul_last(const Var& x, const Var& gvar) {
    Tape& tape = same_tape("mul_last", x, gvar);
    const std::size_t c = gvar.size();
    if (x.shape().empty() || x.shape().back() != c) throw ShapeError("mul_last: size mismatch");
    Tensor y = x.value();
    const Tensor& gv = gvar.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= gv[i % c];
    return tape.record("mul_last", std::move(y), {x, gvar}, [x, gvar, c](Tape& t, const Tensor& g, const Tensor&) {
        const Tensor& xv = t.value(x);
        const Tensor& gv = t.value(gvar);
        if (t.requires_grad(x)) {
            Tensor& gx = t.grad_of(x);
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * gv[i % c];
        }
        if (t.requires_grad(gvar)) {
            Tensor& gg = t.grad_of(gvar);
            for (std::size_t i = 0; i < g.size(); ++i) gg[i % c] += g[i] * xv[i];
        }
    });
}

Var matmul(const Var& x, const Var& w) {
    Tape& tape = same_tape("matmul", x, w);
    if (w.shape().size() != 2 || x.shape().empty() || x.shape().back() != w.dim(0)) {
        throw ShapeError("matmul: cannot multiply " + shape_string(x.shape()) + " by " + shape_string(w.shape()));
    }
    const std::size_t k = w.dim(0);
    const std::size_t m = w.dim(1);
    const std::size_t rows = x.size() / k;
    Shape out_shape = x.shape();
    out_shape.back() = m;
    Tensor y(out_shape);
    MapMat(y.data(), rows, m).noalias() = CMapMat(x.value().data(), rows, k) * CMapMat(w.value().data(), k, m);
    return tape.record("matmul", std::move(y), {x, w}, [x, w, rows, k, m](Tape& t, const Tensor& g, const Tensor&) {
        CMapMat gm(g.data(), rows, m);
        if (t.requires_grad(x)) {
            MapMat(t.grad_of(x).data(), rows, k).noalias() += gm * CMapMat(t.value(w).data(), k, m).transpose();
        }
        if (t.requires_grad(w)) {
            MapMat(t.grad_of(w).data(), k, m).noalias() += CMapMat(t.value(x).data(), rows, k).transpose() * gm;
        }
    });
}

Var matmul_nt(const Var& a, const Var& b) {
    Tape& tape = same_tape("matmul_nt", a, b);
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.dim(1) != b.dim(1)) {
        throw ShapeError("matmul_nt: incompatible " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
    Tensor y({m, n});
    MapMat(y.data(), m, n).noalias() = CMapMat(a.value().data(), m, k) * CMapMat(b.value().data(), n, k).transpose();
    return tape.record("matmul_nt", std::move(y), {a, b}, [a, b, m, k, n](Tape& t, const Tensor& g, const Tensor&) {
        CMapMat gm(g.data(), m, n);
        if (t.requires_grad(a)) {
            MapMat(t.grad_of(a).data(), m, k).noalias() += gm * CMapMat(t.value(b).data(), n, k);
        }
        if (t.requires_grad(b)) {
            MapMat(t.grad_of(b).data(), n, k).noalias() += gm.transpose() * CMapMat(t.value(a).data(), m, k);
        }
    });
}

Var outer(const Var& u, const Var& v) {
    Tape& tape = same_tape("outer", u, v);
    const std::size_t m = u.size(), n = v.size();
    Tensor y({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) y[i * n + j] = u.value()[i] * v.value()[j];
    return tape.record("outer", std::move(y), {u, v}, [u, v, m, n](Tape& t, const Tensor& g, const Tensor&) {
        const Tensor& uv = t.value(u);
        const Tensor& vv = t.value(v);
        if (t.requires_grad(u)) {
            Tensor& gu = t.grad_of(u);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) gu[i] += g[i * n + j] * vv[j];
        }
        if (t.requires_grad(v)) {
            Tensor& gv = t.grad_of(v);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) gv[j] += g[i * n + j] * uv[i];
        }
    });
}

Var graph_mix(const Var& a, const Var& x) {
    Tape& tape = same_tape("graph_mix", a, x);
    if (a.shape().size() != 2 || a.dim(0) != a.dim(1)) throw ShapeError("graph_mix: operator must be square");
    const std::size_t n = a.dim(0);
    const Shape& xs = x.shape();
    std::size_t batch = 0;
    if (xs.size() == 2 && xs[0] == n) {
        batch = 1;
    } else if (xs.size() >= 3 && xs[1] == n) {
        batch = xs[0];
    } else {
        throw ShapeError("graph_mix: operand " + shape_string(xs) + " has no node axis of length " + std::to_string(n));
    }
    const std::size_t m = x.size() / (batch * n);
    Tensor y(xs);
    CMapMat am(a.value().data(), n, n);
    for (std::size_t b = 0; b < batch; ++b) {
        MapMat(y.data() + b * n * m, n, m).noalias() = am * CMapMat(x.value().data() + b * n * m, n, m);
    }
    return tape.record("graph_mix", std::move(y), {a, x}, [a, x, n, m, batch](Tape& t, const Tensor& g, const Tensor&) {
        CMapMat am(t.value(a).data(), n, n);
        const Tensor& xv = t.value(x);
        const bool ga = t.requires_grad(a);
        const bool gx = t.requires_grad(x);
        for (std::size_t b = 0; b < batch; ++b) {
            CMapMat gb(g.data() + b * n * m, n, m);
            if (ga) MapMat(t.grad_of(a).data(), n, n).noalias() += gb * CMapMat(xv.data() + b * n * m, n, m).transpose();
            if (gx) MapMat(t.grad_of(x).data() + b * n * m, n, m).noalias() += am.transpose() * gb;
        }
    });
}

Var reshape(const Var& x, Shape shape) {
    Tensor y = x.value().reshaped(std::move(shape));
    return x.tape().record("reshape", std::move(y), {x}, [x](Tape& t, const Tensor& g, const Tensor&) {
        if (!t.requires_grad(x)) return;
        Tensor& gx = t.grad_of(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
}

Var permute(const Var& x, const std::vector<std::size_t>& perm) {
    Tensor y = fcdnet::permute(x.value(), perm);
    std::vector<std::size_t> inverse(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = i;
    return x.tape().record("permute", std::move(y), {x}, [x, inverse](Tape& t, const Tensor& g, const Tensor&) {
        if (!t.requires_grad(x)) return;
        Tensor back = fcdnet::permute(g, inverse);
        t.accumulate(x, back);
    });
}

Var concat(const std::vector<Var>& xs, std::size_t axis) {
    if (xs.empty()) throw ContractError("concat: no operands");
    const Shape& s0 = xs.front().shape();
    if (axis >= s0.size()) throw ShapeError("concat: axis out of range");
    Shape out_shape = s0;
    out_shape[axis] = 0;
    for (const Var& v : xs) {
        same_tape("concat", xs.front(), v);
        const Shape& s = v.shape();
        if (s.size() != s0.size()) throw ShapeError("concat: rank mismatch");
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i != axis && s[i] != s0[i]) throw ShapeError("concat: shape mismatch off the concat axis");
        }
        out_shape[axis] += s[axis];
    }
    const AxisSplit so = split_at(out_shape, axis);
    Tensor y(out_shape);
    std::vector<std::size_t> offsets;
    std::size_t off = 0;
    for (const Var& v : xs) {
        offsets.push_back(off);
        const std::size_t len = v.shape()[axis];
        const Tensor& vv = v.value();
        for (std::size_t o = 0; o < so.outer; ++o) {
            const double* src = vv.data() + o * len * so.inner;
            double* dst = y.data() + (o * so.len + off) * so.inner;
            std::copy(src, src + len * so.inner, dst);
        }
        off += len;
    }
    return xs.front().tape().record("concat", std::move(y), xs,
                                    [xs, offsets, so, axis](Tape& t, const Tensor& g, const Tensor&) {
                                        for (std::size_t k = 0; k < xs.size(); ++k) {
                                            if (!t.requires_grad(xs[k])) continue;
                                            const std::size_t len = t.value(xs[k]).shape()[axis];
                                            Tensor& gx = t.grad_of(xs[k]);
                                            for (std::size_t o = 0; o < so.outer; ++o) {
                                                const double* src = g.data() + (o * so.len + offsets[k]) * so.inner;
                                                double* dst = gx.data() + o * len * so.inner;
                                                for (std::size_t i = 0; i < len * so.inner; ++i) dst[i] += src[i];
                                            }
                                        }
                                    });
}

Var slice(const Var& x, std::size_t axis, std::size_t start, std::size_t length) {
    const Shape& xs = x.shape();
    if (axis >= xs.size() || start + length > xs[axis] || length == 0) {
        throw ShapeError("slice: [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") out of range on axis " + std::to_string(axis) + " of " + shape_string(xs));
    }
    const AxisSplit sp = split_at(xs, axis);
    Shape out_shape = xs;
    out_shape[axis] = length;
    Tensor y(out_shape);
    const Tensor& xv = x.value();
    for (std::size_t o = 0; o < sp.outer; ++o) {
        const double* src = xv.data() + (o * sp.len + start) * sp.inner;
        std::copy(src, src + length * sp.inner, y.data() + o * length * sp.inner);
    }
    return x.tape().record("slice", std::move(y), {x}, [x, sp, start, length](Tape& t, const Tensor& g, const Tensor&) {
        if (!t.requires_grad(x)) return;
        Tensor& gx = t.grad_of(x);
        for (std::size_t o = 0; o < sp.outer; ++o) {
            double* dst = gx.data() + (o * sp.len + start) * sp.inner;
            const double* src = g.data() + o * length * sp.inner;
            for (std::size_t i = 0; i < length * sp.inner; ++i) dst[i] += src[i];
        }
    });
}

Var sum_all(const Var& x) {
    double s = 0.0;
    for (double v : x.value().values()) s += v;
    return x.tape().record("sum_all", Tensor::scalar(s), {x}, [x](Tape& t, const Tensor& g, const Tensor&) {
        if (!t.requires_grad(x)) return;
        Tensor& gx = t.grad_of(x);
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0];
    });
}

Var mean_all(const Var& x) { return scale(sum_all(x), 1.0 / static_cast<double>(x.size())); }

Var sum_axis(const Var& x, std::size_t axis) {
    const Shape& xs = x.shape();
    if (axis >= xs.size()) throw ShapeError("sum_axis: axis out of range");
    const AxisSplit sp = split_at(xs, axis);
    Shape out_shape;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (i != axis) out_shape.push_back(xs[i]);
    if (out_shape.empty()) out_shape.push_back(1);
    Tensor y(out_shape);
    const Tensor& xv = x.value();
    for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t l = 0; l < sp.len; ++l)
            for (std::size_t i = 0; i < sp.inner; ++i) y[o * sp.inner + i] += xv[(o * sp.len + l) * sp.inner + i];
    return x.tape().record("sum_axis", std::move(y), {x}, [x, sp](Tape& t, const Tensor& g, const Tensor&) {
        if (!t.requires_grad(x)) return;
        Tensor& gx = t.grad_of(x);
        for (std::size_t o = 0; o < sp.outer; ++o)
            for (std::size_t l = 0; l < sp.len; ++l)
                for (std::size_t i = 0; i < sp.inner; ++i) gx[(o * sp.len + l) * sp.inner + i] += g[o * sp.inner + i];
    });
}

Var mean_axis(const Var& x, std::size_t axis) {
    return scale(sum_axis(x, axis), 1.0 / static_cast<double>(x.shape().at(axis)));
}

Var channel_affine(const Var& q, const Var& gain, const Var& bias) {
    Tape& tape = same_tape("channel_affine", q, gain);
    same_tape("channel_affine", q, bias);
    if (q.shape().size() != 3) throw ShapeError("channel_affine: expected [N, C, Len]");
    const std::size_t f = gain.size();
    const std::size_t c = q.dim(1);
    const std::size_t len = q.dim(2);
    if (bias.size() != f || f == 0 || c % f != 0) {
        throw ShapeError("channel_affine: " + std::to_string(c) + " channels are not a tiling of " + std::to_string(f));
    }
    const std::size_t n = q.dim(0);
    Tensor y = q.value();
    const Tensor& gv = gain.value();
    const Tensor& bv = bias.value();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch) {
            double* row = y.data() + (i * c + ch) * len;
            for (std::size_t l = 0; l < len; ++l) row[l] = row[l] * gv[ch % f] + bv[ch % f];
        }
    return tape.record("channel_affine", std::move(y), {q, gain, bias},
                       [q, gain, bias, n, c, len, f](Tape& t, const Tensor& g, const Tensor&) {
                           const Tensor& qv = t.value(q);
                           const Tensor& gv = t.value(gain);
                           const bool gq = t.requires_grad(q);
                           const bool gg = t.requires_grad(gain);
                           const bool gb = t.requires_grad(bias);
                           for (std::size_t i = 0; i < n; ++i)
                               for (std::size_t ch = 0; ch < c; ++ch) {
                                   const std::size_t base = (i * c + ch) * len;
                                   double sg = 0.0, sgq = 0.0;
                                   for (std::size_t l = 0; l < len; ++l) {
                                       sg += g[base + l];
                                       sgq += g[base + l] * qv[base + l];
                                   }
                                   if (gq) {
                                       Tensor& dq = t.grad_of(q);
                                       for (std::size_t l = 0; l < len; ++l) dq[base + l] += g[base + l] * gv[ch % f];
                                   }
                                   if (gg) t.grad_of(gain)[ch % f] += sgq;
                                   if (gb) t.grad_of(bias)[ch % f] += sg;
                               }
                       });
}

Var amplitude(const Var& re, const Var& im) {
    Tape& tape = same_tape("amplitude", re, im);
    require_same_shape("amplitude", re, im);
    Tensor y(re.shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::hypot(re.value()[i], im.value()[i]);
    return tape.record("amplitude", std::move(y), {re, im}, [re, im](Tape& t, const Tensor& g, const Tensor& out) {
        const Tensor& rv = t.value(re);
        const Tensor& iv = t.value(im);
        for (int which = 0; which < 2; ++which) {
            const Var& v = which == 0 ? re : im;
            if (!t.requires_grad(v)) continue;
            const Tensor& src = which == 0 ? rv : iv;
            Tensor& gv = t.grad_of(v);
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (out[i] > 0.0) gv[i] += g[i] * src[i] / out[i];
            }
        }
    });
}

Var phase(const Var& re, const Var& im) {
    Tape& tape = same_tape("phase", re, im);
    require_same_shape("phase", re, im);
    Tensor y(re.shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = signal::phase_value(re.value()[i], im.value()[i]);
    return tape.record("phase", std::move(y), {re, im}, [re, im](Tape& t, const Tensor& g, const Tensor&) {
        const Tensor& rv = t.value(re);
        const Tensor& iv = t.value(im);
        const bool gr = t.requires_grad(re);
        const bool gi = t.requires_grad(im);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double r = rv[i], m = iv[i];
            const double d = r * r + m * m;
            if (d == 0.0) continue;
            if (gr) t.grad_of(re)[i] += g[i] * m / d;
            if (gi) t.grad_of(im)[i] -= g[i] * r / d;
        }
    });
}

Var ifft_real(const Var& re, const Var& im) {
    Tape& tape = same_tape("ifft_real", re, im);
    require_same_shape("ifft_real", re, im);
    if (re.shape().size() != 3) throw ShapeError("ifft_real: expected [A, T, F]");
    const std::size_t a = re.dim(0), len = re.dim(1), f = re.dim(2);
    Tensor y(re.shape());
    std::vector<std::complex<double>> buf(len);
    for (std::size_t i = 0; i < a; ++i)
        for (std::size_t c = 0; c < f; ++c) {
            for (std::size_t k = 0; k < len; ++k) {
                const std::size_t idx = (i * len + k) * f + c;
                buf[k] = {re.value()[idx], im.value()[idx]};
            }
            const auto out = signal::ifft(buf);
            for (std::size_t k = 0; k < len; ++k) y[(i * len + k) * f + c] = out[k].real();
        }
    return tape.record("ifft_real", std::move(y), {re, im}, [re, im, a, len, f](Tape& t, const Tensor& g, const Tensor&) {
        // Adjoint of Re(IDFT): d re = Re(DFT(g)) / T, d im = Im(DFT(g)) / T.
        std::vector<std::complex<double>> buf(len);
        const double inv = 1.0 / static_cast<double>(len);
        const bool gr = t.requires_grad(re);
        const bool gi = t.requires_grad(im);
        for (std::size_t i = 0; i < a; ++i)
            for (std::size_t c = 0; c < f; ++c) {
                for (std::size_t k = 0; k < len; ++k) buf[k] = {g[(i * len + k) * f + c], 0.0};
                const auto spec = signal::fft(buf);
                for (std::size_t k = 0; k < len; ++k) {
                    const std::size_t idx = (i * len + k) * f + c;
                    if (gr) t.grad_of(re)[idx] += spec[k].real() * inv;
                    if (gi) t.grad_of(im)[idx] += spec[k].imag() * inv;
                }
            }
    });
}

Var conv1d(const Var& x, const Var& w, const Var& bias, std::size_t dilation, std::size_t pad_left,
           std::size_t pad_right) {
    Tape& tape = same_tape("conv1d", x, w);
    if (x.shape().size() != 3 || w.shape().size() != 3 || x.dim(1) != w.dim(1)) {
        throw ShapeError("conv1d: input " + shape_string(x.shape()) + " incompatible with kernel " +
                         shape_string(w.shape()));
    }
    if (dilation == 0) throw ContractError("conv1d: dilation must be positive");
    const std::size_t batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
    const std::size_t cout = w.dim(0), k = w.dim(2);
    const std::size_t span = (k - 1) * dilation;
    const std::size_t padded = len + pad_left + pad_right;
    if (padded <= span) {
        throw ShapeError("conv1d: input length " + std::to_string(len) + " too short for receptive field " +
                         std::to_string(span + 1));
    }
    const std::size_t lout = padded - span;
    const bool has_bias = bias.valid();
    if (has_bias) {
        same_tape("conv1d", x, bias);
        if (bias.size() != cout) throw ShapeError("conv1d: bias size mismatch");
    }
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    Tensor y({batch, cout, lout});
    // Output position t reads input position t + j * dilation - pad_left.
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t o = 0; o < cout; ++o) {
            double* yrow = y.data() + (b * cout + o) * lout;
            if (has_bias)
                for (std::size_t t = 0; t < lout; ++t) yrow[t] = bias.value()[o];
            for (std::size_t c = 0; c < cin; ++c) {
                const double* xrow = xv.data() + (b * cin + c) * len;
                for (std::size_t j = 0; j < k; ++j) {
                    const double wj = wv[(o * cin + c) * k + j];
                    const long shift = static_cast<long>(j * dilation) - static_cast<long>(pad_left);
                    const long t0 = std::max(0L, -shift);
                    const long t1 = std::min(static_cast<long>(lout), static_cast<long>(len) - shift);
                    for (long t = t0; t < t1; ++t) yrow[t] += wj * xrow[t + shift];
                }
            }
        }
    std::vector<Var> parents{x, w};
    if (has_bias) parents.push_back(bias);
    return tape.record("conv1d", std::move(y), parents,
                       [x, w, bias, has_bias, batch, cin, len, cout, k, dilation, pad_left, lout](
                           Tape& t, const Tensor& g, const Tensor&) {
                           const Tensor& xv = t.value(x);
                           const Tensor& wv = t.value(w);
                           const bool gx = t.requires_grad(x);
                           const bool gw = t.requires_grad(w);
                           for (std::size_t b = 0; b < batch; ++b)
                               for (std::size_t o = 0; o < cout; ++o) {
                                   const double* grow = g.data() + (b * cout + o) * lout;
                                   if (has_bias && t.requires_grad(bias)) {
                                       double s = 0.0;
                                       for (std::size_t tt = 0; tt < lout; ++tt) s += grow[tt];
                                       t.grad_of(bias)[o] += s;
                                   }
                                   for (std::size_t c = 0; c < cin; ++c) {
                                       const double* xrow = xv.data() + (b * cin + c) * len;
                                       for (std::size_t j = 0; j < k; ++j) {
                                           const std::size_t widx = (o * cin + c) * k + j;
                                           const long shift = static_cast<long>(j * dilation) - static_cast<long>(pad_left);
                                           const long t0 = std::max(0L, -shift);
                                           const long t1 = std::min(static_cast<long>(lout), static_cast<long>(len) - shift);
                                           if (gw) {
                                               double s = 0.0;
                                               for (long tt = t0; tt < t1; ++tt) s += grow[tt] * xrow[tt + shift];
                                               t.grad_of(w)[widx] += s;
                                           }
                                           if (gx) {
                                               double* gxrow = t.grad_of(x).data() + (b * cin + c) * len;
                                               const double wj = wv[widx];
                                               for (long tt = t0; tt < t1; ++tt) gxrow[tt + shift] += wj * grow[tt];
                                           }
                                       }
                                   }
                               }
                       });
}

Var dilated_causal_conv1d(const Var& x, const Var& w, std::size_t dilation) {
    return conv1d(x, w, Var{}, dilation, 0, 0);
}

} // namespace fcdnet::ops
