#pragma once

#include <random>
#include <vector>

#include "wearsyn/nn/tensor.hpp"

namespace wearsyn::nn {

inline MatrixXd glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = u(rng);
    return m;
}

struct Dense {
    Var weight, bias;

    Dense() = default;
    Dense(int in, int out, std::mt19937_64& rng)
        : weight(leaf(glorot(in, out, rng), true)),
          bias(leaf(MatrixXd::Zero(1, out), true)) {}

    Var operator()(Tape& t, const Var& x) const {
        return ops::add_rowvec(t, ops::mm(t, x, weight), bias);
    }

    void collect(std::vector<Var>& params) const {
        params.push_back(weight);
        params.push_back(bias);
    }
};

// Single LSTM layer unrolled over a sequence of (batch x in) inputs.
// Gate order: input, forget, cell, output. Forget bias starts at 1.
struct LstmLayer {
    Dense wi, wf, wg, wo;  // act on [x_t, h_{t-1}]
    int hidden = 0;

    LstmLayer() = default;
    LstmLayer(int in, int hidden_size, std::mt19937_64& rng) : hidden(hidden_size) {
        wi = Dense(in + hidden, hidden, rng);
        wf = Dense(in + hidden, hidden, rng);
        wg = Dense(in + hidden, hidden, rng);
        wo = Dense(in + hidden, hidden, rng);
        wf.bias->val.setOnes();
    }

    std::vector<Var> forward(Tape& t, const std::vector<Var>& xs) const {
        const Eigen::Index batch = xs.front()->val.rows();
        Var h = ops::constant(t, MatrixXd::Zero(batch, hidden));
        Var c = ops::constant(t, MatrixXd::Zero(batch, hidden));
        std::vector<Var> hs;
        hs.reserve(xs.size());
        for (const auto& x : xs) {
            Var xh = ops::concat_cols(t, x, h);
            Var i = ops::sigmoid(t, wi(t, xh));
            Var f = ops::sigmoid(t, wf(t, xh));
            Var g = ops::tanh_(t, wg(t, xh));
            Var o = ops::sigmoid(t, wo(t, xh));
            c = ops::add(t, ops::mul(t, f, c), ops::mul(t, i, g));
            h = ops::mul(t, o, ops::tanh_(t, c));
            hs.push_back(h);
        }
        return hs;
    }

    void collect(std::vector<Var>& params) const {
        wi.collect(params);
        wf.collect(params);
        wg.collect(params);
        wo.collect(params);
    }
};

// Multi-head self-attention over a short token sequence (one sample's tokens
// as rows). Weights are shared across samples; callers loop samples.
struct AttentionBlock {
    Dense wq, wk, wv, wout;
    Dense ff1, ff2;
    int heads = 4;
    int dim = 0;

    AttentionBlock() = default;
    AttentionBlock(int model_dim, int n_heads, std::mt19937_64& rng)
        : wq(model_dim, model_dim, rng),
          wk(model_dim, model_dim, rng),
          wv(model_dim, model_dim, rng),
          wout(model_dim, model_dim, rng),
          ff1(model_dim, 2 * model_dim, rng),
          ff2(2 * model_dim, model_dim, rng),
          heads(n_heads),
          dim(model_dim) {}

    Var operator()(Tape& t, const Var& tokens) const {
        const int head_dim = dim / heads;
        Var q = wq(t, tokens), k = wk(t, tokens), v = wv(t, tokens);
        std::vector<Var> head_outs;
        for (int h = 0; h < heads; ++h) {
            auto slice_head = [&](const Var& m) {
                // column slice via transpose + row_slice
                return ops::transpose(t, ops::row_slice(t, ops::transpose(t, m),
                                                        h * head_dim, head_dim));
            };
            Var qh = slice_head(q), kh = slice_head(k), vh = slice_head(v);
            Var scores = ops::scale(t, ops::mm(t, qh, ops::transpose(t, kh)),
                                    1.0 / std::sqrt(static_cast<double>(head_dim)));
            Var attn = ops::softmax_rows(t, scores);
            head_outs.push_back(ops::mm(t, attn, vh));
        }
        Var merged = ops::concat_cols(t, head_outs);
        Var attended = ops::add(t, tokens, wout(t, merged));  // residual
        Var ff = ff2(t, ops::relu(t, ff1(t, attended)));
        return ops::add(t, attended, ff);
    }

    void collect(std::vector<Var>& params) const {
        wq.collect(params);
        wk.collect(params);
        wv.collect(params);
        wout.collect(params);
        ff1.collect(params);
        ff2.collect(params);
    }
};

}  // namespace wearsyn::nn
