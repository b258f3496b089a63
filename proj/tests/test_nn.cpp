#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wearsyn/nn/adam.hpp"
#include "wearsyn/nn/modules.hpp"
#include "wearsyn/nn/tensor.hpp"

using namespace wearsyn;
using namespace wearsyn::nn;

namespace {

// Central finite differences of a scalar graph built by `build` with respect
// to every entry of every parameter.
void gradcheck(const std::vector<Var>& params,
               const std::function<Var(Tape&)>& build, double tol = 1e-5) {
    Tape tape;
    Var loss = build(tape);
    for (auto& p : params) {
        p->ensure_grad();
        p->grad.setZero();
    }
    tape.backward(loss);
    const double h = 1e-6;
    for (const auto& p : params) {
        for (Eigen::Index i = 0; i < p->val.size(); ++i) {
            double orig = p->val(i);
            p->val(i) = orig + h;
            Tape t1;
            double lp = build(t1)->val(0, 0);
            p->val(i) = orig - h;
            Tape t2;
            double lm = build(t2)->val(0, 0);
            p->val(i) = orig;
            double fd = (lp - lm) / (2 * h);
            CHECK(p->grad(i) == doctest::Approx(fd).epsilon(tol).scale(1.0));
        }
    }
}

MatrixXd randn(int r, int c, std::mt19937_64& rng, double s = 1.0) {
    std::normal_distribution<double> d(0.0, s);
    MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = d(rng);
    return m;
}

}  // namespace

TEST_CASE("gradcheck: dense + sigmoid + bce") {
    std::mt19937_64 rng(1);
    auto w = leaf(randn(3, 1, rng), true);
    auto b = leaf(randn(1, 1, rng), true);
    MatrixXd x = randn(5, 3, rng);
    MatrixXd y(5, 1);
    y << 1, 0, 1, 1, 0;
    gradcheck({w, b}, [&](Tape& t) {
        auto logits = ops::add_rowvec(t, ops::mm(t, ops::constant(t, x), w), b);
        return ops::bce_with_logits(t, logits, y);
    });
}

TEST_CASE("gradcheck: tanh, relu, mul, mean") {
    std::mt19937_64 rng(2);
    auto a = leaf(randn(4, 3, rng), true);
    auto b = leaf(randn(4, 3, rng), true);
    gradcheck({a, b}, [&](Tape& t) {
        auto z = ops::mul(t, ops::tanh_(t, a), ops::relu(t, b));
        return ops::mean_all(t, z);
    });
}

TEST_CASE("gradcheck: softmax cross-entropy with class weights") {
    std::mt19937_64 rng(3);
    auto w = leaf(randn(4, 2, rng), true);
    MatrixXd x = randn(6, 4, rng);
    std::vector<int> labels = {0, 1, 1, 0, 1, 0};
    std::vector<double> cw = {0.6, 1.4};
    gradcheck({w}, [&](Tape& t) {
        auto logits = ops::mm(t, ops::constant(t, x), w);
        return ops::softmax_cross_entropy(t, logits, labels, cw);
    });
}

TEST_CASE("gradcheck: softmax rows and attention-style composition") {
    std::mt19937_64 rng(4);
    auto q = leaf(randn(3, 4, rng), true);
    auto k = leaf(randn(3, 4, rng), true);
    auto v = leaf(randn(3, 4, rng), true);
    gradcheck({q, k, v}, [&](Tape& t) {
        auto scores = ops::scale(t, ops::mm(t, q, ops::transpose(t, k)), 0.5);
        auto attn = ops::softmax_rows(t, scores);
        return ops::mean_all(t, ops::mm(t, attn, v));
    });
}

TEST_CASE("gradcheck: concat, slice, rows_mean") {
    std::mt19937_64 rng(5);
    auto a = leaf(randn(4, 2, rng), true);
    auto b = leaf(randn(4, 3, rng), true);
    gradcheck({a, b}, [&](Tape& t) {
        auto c = ops::concat_cols(t, a, b);
        auto s = ops::row_slice(t, c, 1, 2);
        return ops::mean_all(t, ops::rows_mean(t, s));
    });
}

TEST_CASE("gradcheck: mean pairwise L1") {
    std::mt19937_64 rng(6);
    auto a = leaf(randn(5, 4, rng), true);
    gradcheck({a}, [&](Tape& t) { return ops::mean_pairwise_l1(t, a); });
}

TEST_CASE("gradcheck: conv1d + maxpool") {
    std::mt19937_64 rng(7);
    const int in_ch = 2, len = 10, ksize = 3, out_ch = 3;
    auto kern = leaf(randn(out_ch, in_ch * ksize, rng), true);
    auto bias = leaf(randn(1, out_ch, rng), true);
    auto x = leaf(randn(2, in_ch * len, rng), true);
    gradcheck({kern, bias, x}, [&](Tape& t) {
        auto c = ops::conv1d(t, x, kern, bias, in_ch, len, ksize);
        auto p = ops::maxpool1d(t, c, out_ch, len - ksize + 1, 2);
        return ops::mean_all(t, p);
    });
}

TEST_CASE("gradcheck: one LSTM step chain") {
    std::mt19937_64 rng(8);
    LstmLayer lstm(3, 4, rng);
    std::vector<Var> params;
    lstm.collect(params);
    std::vector<MatrixXd> xs_val = {randn(2, 3, rng), randn(2, 3, rng), randn(2, 3, rng)};
    gradcheck(params, [&](Tape& t) {
        std::vector<Var> xs;
        for (const auto& x : xs_val) xs.push_back(ops::constant(t, x));
        auto hs = lstm.forward(t, xs);
        return ops::mean_all(t, hs.back());
    }, 1e-4);
}

TEST_CASE("gradcheck: attention block") {
    std::mt19937_64 rng(9);
    AttentionBlock blk(8, 2, rng);
    std::vector<Var> params;
    blk.collect(params);
    MatrixXd tokens = randn(3, 8, rng);
    gradcheck(params, [&](Tape& t) {
        return ops::mean_all(t, blk(t, ops::constant(t, tokens)));
    }, 1e-4);
}

TEST_CASE("Adam drives a quadratic to its minimum") {
    auto p = leaf(MatrixXd::Constant(1, 1, 5.0), true);
    Adam opt({p}, 0.1);
    for (int i = 0; i < 500; ++i) {
        opt.zero_grad();
        Tape t;
        auto diff = ops::sub(t, p, ops::constant(t, MatrixXd::Constant(1, 1, 2.0)));
        auto loss = ops::mean_all(t, ops::mul(t, diff, diff));
        t.backward(loss);
        opt.step();
    }
    CHECK(p->val(0, 0) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("flat grad round-trips through set_flat_grad") {
    std::mt19937_64 rng(10);
    auto a = leaf(randn(2, 3, rng), true);
    auto b = leaf(randn(1, 4, rng), true);
    Adam opt({a, b}, 0.01);
    opt.zero_grad();
    a->grad.setConstant(1.5);
    b->grad.setConstant(-2.0);
    auto g = opt.flat_grad();
    CHECK(g.size() == 10);
    opt.zero_grad();
    opt.set_flat_grad(g);
    CHECK(a->grad(0, 0) == 1.5);
    CHECK(b->grad(0, 3) == -2.0);
}
