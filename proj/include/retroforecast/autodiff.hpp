// Tape-based reverse-mode differentiation over batched matrices.
//
// Every op appends a node holding the value, a zeroed gradient slot and a
// backward closure over parent indices; running the closures in reverse
// creation order yields exact gradients of a scalar output with respect to
// any leaf (parameters or free inputs such as the MAP variables). All
// arithmetic is double precision; batch rows never mix except in explicit
// reductions, so row-level results are independent of how callers batch.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "matrix.hpp"

namespace rf::ad {

using Var = int32_t;

class Tape {
public:
    struct Node {
        Matrix val;
        Matrix grad;
        std::function<void(Tape&, Var)> back;  // (tape, self index)
    };

    Var push(Matrix value, std::function<void(Tape&, Var)> back = {}) {
        nodes_.push_back(Node{std::move(value), Matrix(), std::move(back)});
        Node& n = nodes_.back();
        n.grad = Matrix(n.val.rows(), n.val.cols());
        return static_cast<Var>(nodes_.size() - 1);
    }

    Var leaf(Matrix value) { return push(std::move(value)); }

    const Matrix& val(Var v) const { return nodes_[static_cast<size_t>(v)].val; }
    Matrix& grad(Var v) { return nodes_[static_cast<size_t>(v)].grad; }
    const Matrix& grad(Var v) const { return nodes_[static_cast<size_t>(v)].grad; }

    // Seeds d(out)/d(out) = 1 for a 1x1 output and back-propagates.
    void backward(Var out) {
        Matrix& g = grad(out);
        if (g.size() != 1) throw std::invalid_argument("backward: output must be a 1x1 scalar");
        g(0, 0) = 1.0;
        for (size_t i = static_cast<size_t>(out) + 1; i-- > 0;) {
            if (nodes_[i].back) nodes_[i].back(*this, static_cast<Var>(i));
        }
    }

    size_t size() const { return nodes_.size(); }

private:
    std::vector<Node> nodes_;
};

// -------------------------------------------------------------------- ops

inline Var matmul(Tape& t, Var a, Var b) {
    Matrix out = rf::matmul(t.val(a), t.val(b));
    return t.push(std::move(out), [a, b](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        matmul_nt_acc(g, tp.val(b), tp.grad(a));   // dA += G * B^T
        matmul_tn_acc(tp.val(a), g, tp.grad(b));   // dB += A^T * G
    });
}

// Elementwise add; rhs may be a 1 x C row vector broadcast over rows.
inline Var add(Tape& t, Var a, Var b) {
    const Matrix& va = t.val(a);
    const Matrix& vb = t.val(b);
    const bool broadcast = vb.rows() == 1 && va.rows() != 1 && vb.cols() == va.cols();
    if (!broadcast) require_shape(va, vb, "add");
    Matrix out = va;
    for (size_t i = 0; i < out.rows(); ++i)
        for (size_t j = 0; j < out.cols(); ++j) out(i, j) += vb(broadcast ? 0 : i, j);
    return t.push(std::move(out), [a, b, broadcast](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        Matrix& ga = tp.grad(a);
        Matrix& gb = tp.grad(b);
        for (size_t i = 0; i < g.rows(); ++i)
            for (size_t j = 0; j < g.cols(); ++j) {
                ga(i, j) += g(i, j);
                gb(broadcast ? 0 : i, j) += g(i, j);
            }
    });
}

inline Var sub(Tape& t, Var a, Var b) {
    const Matrix& va = t.val(a);
    const Matrix& vb = t.val(b);
    require_shape(va, vb, "sub");
    Matrix out = va;
    for (size_t i = 0; i < out.size(); ++i) out.raw()[i] -= vb.raw()[i];
    return t.push(std::move(out), [a, b](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        Matrix& ga = tp.grad(a);
        Matrix& gb = tp.grad(b);
        for (size_t i = 0; i < g.size(); ++i) {
            ga.raw()[i] += g.raw()[i];
            gb.raw()[i] -= g.raw()[i];
        }
    });
}

inline Var mul(Tape& t, Var a, Var b) {
    const Matrix& va = t.val(a);
    const Matrix& vb = t.val(b);
    require_shape(va, vb, "mul");
    Matrix out = va;
    for (size_t i = 0; i < out.size(); ++i) out.raw()[i] *= vb.raw()[i];
    return t.push(std::move(out), [a, b](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        const Matrix& va = tp.val(a);
        const Matrix& vb = tp.val(b);
        Matrix& ga = tp.grad(a);
        Matrix& gb = tp.grad(b);
        for (size_t i = 0; i < g.size(); ++i) {
            ga.raw()[i] += g.raw()[i] * vb.raw()[i];
            gb.raw()[i] += g.raw()[i] * va.raw()[i];
        }
    });
}

inline Var scale(Tape& t, Var a, double c) {
    Matrix out = t.val(a);
    for (double& v : out.raw()) v *= c;
    return t.push(std::move(out), [a, c](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        Matrix& ga = tp.grad(a);
        for (size_t i = 0; i < g.size(); ++i) ga.raw()[i] += c * g.raw()[i];
    });
}

inline Var add_const(Tape& t, Var a, double c) {
    Matrix out = t.val(a);
    for (double& v : out.raw()) v += c;
    return t.push(std::move(out), [a](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        Matrix& ga = tp.grad(a);
        for (size_t i = 0; i < g.size(); ++i) ga.raw()[i] += g.raw()[i];
    });
}

inline Var relu(Tape& t, Var a) {
    Matrix out = t.val(a);
    for (double& v : out.raw()) v = v > 0.0 ? v : 0.0;
    return t.push(std::move(out), [a](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        const Matrix& va = tp.val(a);
        Matrix& ga = tp.grad(a);
        for (size_t i = 0; i < g.size(); ++i)
            if (va.raw()[i] > 0.0) ga.raw()[i] += g.raw()[i];
    });
}

inline Var tanh_(Tape& t, Var a) {
    Matrix out = t.val(a);
    for (double& v : out.raw()) v = std::tanh(v);
    return t.push(std::move(out), [a](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        const Matrix& vo = tp.val(self);
        Matrix& ga = tp.grad(a);
        for (size_t i = 0; i < g.size(); ++i)
            ga.raw()[i] += g.raw()[i] * (1.0 - vo.raw()[i] * vo.raw()[i]);
    });
}

inline Var exp_(Tape& t, Var a) {
    Matrix out = t.val(a);
    for (double& v : out.raw()) v = std::exp(v);
    return t.push(std::move(out), [a](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        const Matrix& vo = tp.val(self);
        Matrix& ga = tp.grad(a);
        for (size_t i = 0; i < g.size(); ++i) ga.raw()[i] += g.raw()[i] * vo.raw()[i];
    });
}

// Gradient passes through inside [lo, hi] (inclusive), zero outside.
inline Var clamp(Tape& t, Var a, double lo, double hi) {
    Matrix out = t.val(a);
    for (double& v : out.raw()) v = std::min(std::max(v, lo), hi);
    return t.push(std::move(out), [a, lo, hi](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        const Matrix& va = tp.val(a);
        Matrix& ga = tp.grad(a);
        for (size_t i = 0; i < g.size(); ++i)
            if (va.raw()[i] >= lo && va.raw()[i] <= hi) ga.raw()[i] += g.raw()[i];
    });
}

inline Var square(Tape& t, Var a) {
    Matrix out = t.val(a);
    for (double& v : out.raw()) v *= v;
    return t.push(std::move(out), [a](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        const Matrix& va = tp.val(a);
        Matrix& ga = tp.grad(a);
        for (size_t i = 0; i < g.size(); ++i) ga.raw()[i] += 2.0 * va.raw()[i] * g.raw()[i];
    });
}

// Broadcast multiply by a constant row pattern (no gradient to the pattern).
inline Var mul_row(Tape& t, Var a, std::vector<double> pattern) {
    const Matrix& va = t.val(a);
    if (pattern.size() != va.cols()) throw std::invalid_argument("mul_row: pattern width mismatch");
    Matrix out = va;
    for (size_t i = 0; i < out.rows(); ++i)
        for (size_t j = 0; j < out.cols(); ++j) out(i, j) *= pattern[j];
    return t.push(std::move(out), [a, pattern = std::move(pattern)](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        Matrix& ga = tp.grad(a);
        for (size_t i = 0; i < g.rows(); ++i)
            for (size_t j = 0; j < g.cols(); ++j) ga(i, j) += g(i, j) * pattern[j];
    });
}

inline Var concat_cols(Tape& t, Var a, Var b) {
    const Matrix& va = t.val(a);
    const Matrix& vb = t.val(b);
    if (va.rows() != vb.rows()) throw std::invalid_argument("concat_cols: row count mismatch");
    Matrix out(va.rows(), va.cols() + vb.cols());
    for (size_t i = 0; i < va.rows(); ++i) {
        for (size_t j = 0; j < va.cols(); ++j) out(i, j) = va(i, j);
        for (size_t j = 0; j < vb.cols(); ++j) out(i, va.cols() + j) = vb(i, j);
    }
    const size_t ac = va.cols();
    return t.push(std::move(out), [a, b, ac](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        Matrix& ga = tp.grad(a);
        Matrix& gb = tp.grad(b);
        for (size_t i = 0; i < g.rows(); ++i) {
            for (size_t j = 0; j < ac; ++j) ga(i, j) += g(i, j);
            for (size_t j = ac; j < g.cols(); ++j) gb(i, j - ac) += g(i, j);
        }
    });
}

inline Var slice_cols(Tape& t, Var a, size_t from, size_t count) {
    const Matrix& va = t.val(a);
    if (from + count > va.cols()) throw std::invalid_argument("slice_cols: out of range");
    Matrix out(va.rows(), count);
    for (size_t i = 0; i < va.rows(); ++i)
        for (size_t j = 0; j < count; ++j) out(i, j) = va(i, from + j);
    return t.push(std::move(out), [a, from, count](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        Matrix& ga = tp.grad(a);
        for (size_t i = 0; i < g.rows(); ++i)
            for (size_t j = 0; j < count; ++j) ga(i, from + j) += g(i, j);
    });
}

// Row-wise sum: N x C -> N x 1.
inline Var sum_cols(Tape& t, Var a) {
    const Matrix& va = t.val(a);
    Matrix out(va.rows(), 1);
    for (size_t i = 0; i < va.rows(); ++i) {
        double s = 0.0;
        for (size_t j = 0; j < va.cols(); ++j) s += va(i, j);
        out(i, 0) = s;
    }
    return t.push(std::move(out), [a](Tape& tp, Var self) {
        const Matrix& g = tp.grad(self);
        Matrix& ga = tp.grad(a);
        for (size_t i = 0; i < ga.rows(); ++i)
            for (size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g(i, 0);
    });
}

inline Var sum_all(Tape& t, Var a) {
    double s = 0.0;
    for (double v : t.val(a).raw()) s += v;
    Matrix out(1, 1);
    out(0, 0) = s;
    return t.push(std::move(out), [a](Tape& tp, Var self) {
        const double g = tp.grad(self)(0, 0);
        Matrix& ga = tp.grad(a);
        for (double& v : ga.raw()) v += g;
    });
}

inline Var mean_all(Tape& t, Var a) {
    const size_t count = t.val(a).size();
    if (count == 0) throw std::invalid_argument("mean_all: empty input");
    double s = 0.0;
    for (double v : t.val(a).raw()) s += v;
    Matrix out(1, 1);
    out(0, 0) = s / static_cast<double>(count);
    return t.push(std::move(out), [a, count](Tape& tp, Var self) {
        const double g = tp.grad(self)(0, 0) / static_cast<double>(count);
        Matrix& ga = tp.grad(a);
        for (double& v : ga.raw()) v += g;
    });
}

// ----------------------------------------------------- composite densities

constexpr double kHalfLog2Pi = 0.91893853320467274178;

// Row-wise diagonal Gaussian log density:
//   sum_j [ -1/2 log 2pi - log_std_j - 1/2 ((x_j - mu_j)/sigma_j)^2 ]
inline Var gaussian_logpdf_rows(Tape& t, Var x, Var mu, Var log_std) {
    Var z = mul(t, sub(t, x, mu), exp_(t, scale(t, log_std, -1.0)));
    Var terms = add(t, scale(t, square(t, z), -0.5), scale(t, log_std, -1.0));
    return sum_cols(t, add_const(t, terms, -kHalfLog2Pi));
}

// Row-wise -log N(x; 0, I) = 1/2 ||x||^2 + (d/2) log 2pi.
inline Var std_normal_nll_rows(Tape& t, Var x) {
    return sum_cols(t, add_const(t, scale(t, square(t, x), 0.5), kHalfLog2Pi));
}

// Row-wise KL( N(mu, diag sigma^2) || N(0, I) ), closed form.
inline Var kl_to_std_normal_rows(Tape& t, Var mu, Var log_std) {
    Var inner = add(t, square(t, mu), exp_(t, scale(t, log_std, 2.0)));
    inner = add(t, inner, scale(t, log_std, -2.0));
    return scale(t, sum_cols(t, add_const(t, inner, -1.0)), 0.5);
}

// Row-wise KL( N(mu_q, sq^2) || N(mu_p, sp^2) ) for diagonal Gaussians.
inline Var kl_diag_gaussians_rows(Tape& t, Var mu_q, Var log_std_q, Var mu_p, Var log_std_p) {
    Var var_ratio_num = add(t, exp_(t, scale(t, log_std_q, 2.0)), square(t, sub(t, mu_q, mu_p)));
    Var quad = mul(t, var_ratio_num, exp_(t, scale(t, log_std_p, -2.0)));
    Var terms = add(t, sub(t, log_std_p, log_std_q), scale(t, quad, 0.5));
    return sum_cols(t, add_const(t, terms, -0.5));
}

}  // namespace rf::ad
