// RealNVP normalizing flow over future windows: affine coupling layers with
// alternating even/odd binary masks. Each layer's scale and translation come
// from small tanh MLPs of the masked coordinates; the scale output is
// bounded by 2*tanh(.) for stability. Coupling nets are zero-initialized in
// the output layer, so a freshly built flow is exactly the identity map with
// zero log-determinant.
//
// The data->base direction is the recorded (differentiable) one used for
// likelihood; the base->data inverse is tape-free and used for sampling.
#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "autodiff.hpp"
#include "matrix.hpp"
#include "nn.hpp"
#include "params.hpp"
#include "rng.hpp"

namespace rf {

struct FlowSpec {
    size_t dim = 16;
    size_t n_layers = 8;
    std::vector<size_t> hidden{64, 64};

    NetworkSpec coupling_net() const {
        NetworkSpec s;
        s.input_dim = dim;
        s.hidden = hidden;
        s.output_dim = dim;
        s.activation = Activation::tanh;
        return s;
    }

    // mask[j] == 1 marks coordinates passed through unchanged at layer l.
    std::vector<double> mask(size_t layer) const {
        std::vector<double> m(dim);
        for (size_t j = 0; j < dim; ++j) m[j] = (j % 2 == layer % 2) ? 1.0 : 0.0;
        return m;
    }
};

namespace detail {
inline std::string coupling_prefix(const std::string& prefix, size_t layer, const char* which) {
    return prefix + ".cl" + std::to_string(layer) + "." + which;
}
}  // namespace detail

inline void init_flow(ParamStore& ps, const std::string& prefix, const FlowSpec& spec,
                      RngStream& rng) {
    const NetworkSpec net = spec.coupling_net();
    for (size_t l = 0; l < spec.n_layers; ++l) {
        init_network(ps, detail::coupling_prefix(prefix, l, "s"), net, rng, /*zero_output=*/true);
        init_network(ps, detail::coupling_prefix(prefix, l, "t"), net, rng, /*zero_output=*/true);
    }
}

struct FlowForward {
    ad::Var u;            // base-space points, N x dim
    ad::Var log_det_rows; // N x 1
};

// Data -> base, differentiable. log|det J| accumulates the active scale
// outputs (masked coordinates contribute zero).
inline FlowForward flow_forward(PassContext& ctx, const std::string& prefix, const FlowSpec& spec,
                                ad::Var y) {
    ad::Tape& t = ctx.tape();
    const NetworkSpec net = spec.coupling_net();
    ad::Var cur = y;
    ad::Var log_det = -1;
    for (size_t l = 0; l < spec.n_layers; ++l) {
        const std::vector<double> mask = spec.mask(l);
        std::vector<double> inv_mask(mask.size());
        for (size_t j = 0; j < mask.size(); ++j) inv_mask[j] = 1.0 - mask[j];

        ad::Var anchored = ad::mul_row(t, cur, mask);
        ad::Var s_raw =
            network_forward(ctx, detail::coupling_prefix(prefix, l, "s"), net, anchored).mean;
        ad::Var s = ad::mul_row(t, ad::scale(t, ad::tanh_(t, s_raw), 2.0), inv_mask);
        ad::Var tr =
            ad::mul_row(t,
                        network_forward(ctx, detail::coupling_prefix(prefix, l, "t"), net, anchored)
                            .mean,
                        inv_mask);
        ad::Var transformed =
            ad::mul_row(t, ad::add(t, ad::mul(t, cur, ad::exp_(t, s)), tr), inv_mask);
        cur = ad::add(t, anchored, transformed);

        ad::Var ld = ad::sum_cols(t, s);
        log_det = (log_det < 0) ? ld : ad::add(t, log_det, ld);
    }
    return FlowForward{cur, log_det};
}

// Row-wise exact log density under the flow with a standard normal base.
inline ad::Var flow_logprob_rows(PassContext& ctx, const std::string& prefix,
                                 const FlowSpec& spec, ad::Var y) {
    ad::Tape& t = ctx.tape();
    FlowForward f = flow_forward(ctx, prefix, spec, y);
    ad::Var base =
        ad::sum_cols(t, ad::add_const(t, ad::scale(t, ad::square(t, f.u), -0.5),
                                      -ad::kHalfLog2Pi));
    return ad::add(t, base, f.log_det_rows);
}

// ------------------------------------------------------- tape-free paths

inline Matrix flow_forward_plain(const ParamStore& ps, const std::string& prefix,
                                 const FlowSpec& spec, const Matrix& y,
                                 std::vector<double>* log_det_rows = nullptr) {
    const NetworkSpec net = spec.coupling_net();
    Matrix cur = y;
    if (log_det_rows) log_det_rows->assign(y.rows(), 0.0);
    for (size_t l = 0; l < spec.n_layers; ++l) {
        const std::vector<double> mask = spec.mask(l);
        Matrix anchored = cur;
        for (size_t i = 0; i < anchored.rows(); ++i)
            for (size_t j = 0; j < anchored.cols(); ++j) anchored(i, j) *= mask[j];
        const Matrix s_raw =
            network_forward_plain(ps, detail::coupling_prefix(prefix, l, "s"), net, anchored).mean;
        const Matrix tr =
            network_forward_plain(ps, detail::coupling_prefix(prefix, l, "t"), net, anchored).mean;
        for (size_t i = 0; i < cur.rows(); ++i)
            for (size_t j = 0; j < cur.cols(); ++j) {
                if (mask[j] != 0.0) continue;
                const double s = 2.0 * std::tanh(s_raw(i, j));
                cur(i, j) = cur(i, j) * std::exp(s) + tr(i, j);
                if (log_det_rows) (*log_det_rows)[i] += s;
            }
    }
    return cur;
}

inline Matrix flow_inverse_plain(const ParamStore& ps, const std::string& prefix,
                                 const FlowSpec& spec, const Matrix& u) {
    const NetworkSpec net = spec.coupling_net();
    Matrix cur = u;
    for (size_t l = spec.n_layers; l-- > 0;) {
        const std::vector<double> mask = spec.mask(l);
        Matrix anchored = cur;
        for (size_t i = 0; i < anchored.rows(); ++i)
            for (size_t j = 0; j < anchored.cols(); ++j) anchored(i, j) *= mask[j];
        const Matrix s_raw =
            network_forward_plain(ps, detail::coupling_prefix(prefix, l, "s"), net, anchored).mean;
        const Matrix tr =
            network_forward_plain(ps, detail::coupling_prefix(prefix, l, "t"), net, anchored).mean;
        for (size_t i = 0; i < cur.rows(); ++i)
            for (size_t j = 0; j < cur.cols(); ++j) {
                if (mask[j] != 0.0) continue;
                const double s = 2.0 * std::tanh(s_raw(i, j));
                cur(i, j) = (cur(i, j) - tr(i, j)) * std::exp(-s);
            }
    }
    return cur;
}

inline std::vector<double> flow_logprob_rows_plain(const ParamStore& ps, const std::string& prefix,
                                                   const FlowSpec& spec, const Matrix& y) {
    std::vector<double> log_det;
    const Matrix u = flow_forward_plain(ps, prefix, spec, y, &log_det);
    for (size_t i = 0; i < u.rows(); ++i) {
        double base = 0.0;
        for (size_t j = 0; j < u.cols(); ++j)
            base += -0.5 * u(i, j) * u(i, j) - ad::kHalfLog2Pi;
        log_det[i] += base;
    }
    return log_det;
}

inline Matrix flow_sample(const ParamStore& ps, const std::string& prefix, const FlowSpec& spec,
                          size_t count, RngStream& rng) {
    Matrix u(count, spec.dim);
    for (double& v : u.raw()) v = rng.normal();
    return flow_inverse_plain(ps, prefix, spec, u);
}

}  // namespace rf
