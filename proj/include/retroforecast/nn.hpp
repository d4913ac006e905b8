// Fully-connected network building blocks on top of the tape: a trunk of
// hidden layers with a pointwise activation, finished either by a single
// linear output or by twin Gaussian heads (mean + clamped log-std).
//
// A tape-free forward path mirrors the recorded one for cheap prediction and
// sampling; both walk parameters in the same order and produce identical
// values.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "matrix.hpp"
#include "params.hpp"
#include "rng.hpp"

namespace rf {

enum class Activation { relu, tanh, identity };

constexpr double kLogStdMin = -7.0;
constexpr double kLogStdMax = 2.0;

struct NetworkSpec {
    size_t input_dim = 0;
    std::vector<size_t> hidden;  // widths of hidden layers, activation after each
    size_t output_dim = 0;
    Activation activation = Activation::relu;
    bool gaussian_heads = false;  // mean + log-std heads instead of one linear output
};

inline Matrix glorot_uniform(size_t fan_in, size_t fan_out, RngStream& rng) {
    Matrix w(fan_in, fan_out);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w.raw()) v = rng.uniform(-limit, limit);
    return w;
}

namespace detail {
inline std::string layer_name(const std::string& prefix, size_t i, const char* kind) {
    return prefix + ".l" + std::to_string(i) + "." + kind;
}
}  // namespace detail

// zero_output initializes the final layer(s) to zero, which makes Gaussian
// heads start at N(0,1) and coupling nets start as the identity map.
inline void init_network(ParamStore& ps, const std::string& prefix, const NetworkSpec& spec,
                         RngStream& rng, bool zero_output = false) {
    size_t in = spec.input_dim;
    for (size_t i = 0; i < spec.hidden.size(); ++i) {
        ps.define(detail::layer_name(prefix, i, "W"), glorot_uniform(in, spec.hidden[i], rng));
        ps.define(detail::layer_name(prefix, i, "b"), Matrix(1, spec.hidden[i]));
        in = spec.hidden[i];
    }
    auto head = [&](const char* name) {
        Matrix w = zero_output ? Matrix(in, spec.output_dim)
                               : glorot_uniform(in, spec.output_dim, rng);
        ps.define(prefix + "." + name + ".W", std::move(w));
        ps.define(prefix + "." + name + ".b", Matrix(1, spec.output_dim));
    };
    if (spec.gaussian_heads) {
        head("mean");
        head("logstd");
    } else {
        head("out");
    }
}

struct NetOutput {
    ad::Var mean = -1;
    ad::Var log_std = -1;  // unset unless gaussian_heads
};

inline ad::Var apply_activation(ad::Tape& t, Activation act, ad::Var x) {
    switch (act) {
        case Activation::relu: return ad::relu(t, x);
        case Activation::tanh: return ad::tanh_(t, x);
        case Activation::identity: return x;
    }
    return x;
}

inline NetOutput network_forward(PassContext& ctx, const std::string& prefix,
                                 const NetworkSpec& spec, ad::Var input) {
    ad::Tape& t = ctx.tape();
    ad::Var h = input;
    for (size_t i = 0; i < spec.hidden.size(); ++i) {
        h = ad::add(t, ad::matmul(t, h, ctx.param(detail::layer_name(prefix, i, "W"))),
                    ctx.param(detail::layer_name(prefix, i, "b")));
        h = apply_activation(t, spec.activation, h);
    }
    NetOutput out;
    auto head = [&](const char* name) {
        return ad::add(t, ad::matmul(t, h, ctx.param(prefix + "." + name + ".W")),
                       ctx.param(prefix + "." + name + ".b"));
    };
    if (spec.gaussian_heads) {
        out.mean = head("mean");
        out.log_std = ad::clamp(t, head("logstd"), kLogStdMin, kLogStdMax);
    } else {
        out.mean = head("out");
    }
    return out;
}

// ------------------------------------------------------- tape-free forward

struct PlainNetOutput {
    Matrix mean;
    Matrix log_std;
};

inline Matrix linear_plain(const ParamStore& ps, const std::string& w_name,
                           const std::string& b_name, const Matrix& x) {
    const Matrix& w = ps.value(w_name);
    const Matrix& b = ps.value(b_name);
    Matrix out(x.rows(), w.cols());
    matmul_nn_acc(x, w, out);
    for (size_t i = 0; i < out.rows(); ++i)
        for (size_t j = 0; j < out.cols(); ++j) out(i, j) += b(0, j);
    return out;
}

inline void apply_activation_plain(Activation act, Matrix& m) {
    switch (act) {
        case Activation::relu:
            for (double& v : m.raw()) v = v > 0.0 ? v : 0.0;
            break;
        case Activation::tanh:
            for (double& v : m.raw()) v = std::tanh(v);
            break;
        case Activation::identity: break;
    }
}

inline PlainNetOutput network_forward_plain(const ParamStore& ps, const std::string& prefix,
                                            const NetworkSpec& spec, const Matrix& input) {
    Matrix h = input;
    for (size_t i = 0; i < spec.hidden.size(); ++i) {
        h = linear_plain(ps, detail::layer_name(prefix, i, "W"),
                         detail::layer_name(prefix, i, "b"), h);
        apply_activation_plain(spec.activation, h);
    }
    PlainNetOutput out;
    if (spec.gaussian_heads) {
        out.mean = linear_plain(ps, prefix + ".mean.W", prefix + ".mean.b", h);
        out.log_std = linear_plain(ps, prefix + ".logstd.W", prefix + ".logstd.b", h);
        for (double& v : out.log_std.raw()) v = std::min(std::max(v, kLogStdMin), kLogStdMax);
    } else {
        out.mean = linear_plain(ps, prefix + ".out.W", prefix + ".out.b", h);
    }
    return out;
}

// Row-wise diagonal Gaussian log density, tape-free.
inline std::vector<double> gaussian_logpdf_rows_plain(const Matrix& x, const Matrix& mu,
                                                      const Matrix& log_std) {
    require_shape(x, mu, "gaussian_logpdf");
    require_shape(x, log_std, "gaussian_logpdf");
    std::vector<double> out(x.rows(), 0.0);
    for (size_t i = 0; i < x.rows(); ++i) {
        double s = 0.0;
        for (size_t j = 0; j < x.cols(); ++j) {
            const double z = (x(i, j) - mu(i, j)) * std::exp(-log_std(i, j));
            s += -ad::kHalfLog2Pi - log_std(i, j) - 0.5 * z * z;
        }
        out[i] = s;
    }
    return out;
}

}  // namespace rf
