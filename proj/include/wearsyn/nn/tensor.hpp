#pragma once

// Small reverse-mode autodiff over Eigen matrices. Nodes are recorded on a
// Tape in creation order; backward() replays closures in reverse. Parameters
// live outside the tape and accumulate gradients across a single backward
// pass; optimizers zero them between steps.

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "wearsyn/core/errors.hpp"

namespace wearsyn::nn {

using Eigen::MatrixXd;

struct Node {
    MatrixXd val;
    MatrixXd grad;
    bool requires_grad = false;
    std::function<void()> backprop;  // accumulates into parents' grads

    void ensure_grad() {
        if (grad.rows() != val.rows() || grad.cols() != val.cols())
            grad = MatrixXd::Zero(val.rows(), val.cols());
    }
};

using Var = std::shared_ptr<Node>;

inline Var leaf(MatrixXd val, bool requires_grad = false) {
    auto n = std::make_shared<Node>();
    n->val = std::move(val);
    n->requires_grad = requires_grad;
    if (requires_grad) n->ensure_grad();
    return n;
}

class Tape {
public:
    Var record(MatrixXd val, bool requires_grad, std::function<void()> backprop = {}) {
        auto n = std::make_shared<Node>();
        n->val = std::move(val);
        n->requires_grad = requires_grad;
        n->backprop = std::move(backprop);
        nodes_.push_back(n);
        return n;
    }

    void backward(const Var& loss) {
        if (loss->val.size() != 1) throw ConfigError("backward: loss must be scalar");
        for (auto& n : nodes_) {
            if (n->requires_grad) n->ensure_grad();
            if (n->requires_grad) n->grad.setZero();
        }
        loss->ensure_grad();
        loss->grad.setConstant(1.0);
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
            if ((*it)->backprop && (*it)->requires_grad) (*it)->backprop();
    }

    void clear() { nodes_.clear(); }
    std::size_t size() const { return nodes_.size(); }

private:
    std::vector<Var> nodes_;
};

namespace ops {

inline Var constant(Tape& t, MatrixXd v) { return t.record(std::move(v), false); }

inline Var mm(Tape& t, const Var& a, const Var& b) {
    bool rg = a->requires_grad || b->requires_grad;
    auto out = t.record(a->val * b->val, rg);
    if (rg)
        out->backprop = [a, b, out] {
            if (a->requires_grad) {
                a->ensure_grad();
                a->grad.noalias() += out->grad * b->val.transpose();
            }
            if (b->requires_grad) {
                b->ensure_grad();
                b->grad.noalias() += a->val.transpose() * out->grad;
            }
        };
    return out;
}

inline Var add(Tape& t, const Var& a, const Var& b) {
    bool rg = a->requires_grad || b->requires_grad;
    auto out = t.record(a->val + b->val, rg);
    if (rg)
        out->backprop = [a, b, out] {
            if (a->requires_grad) {
                a->ensure_grad();
                a->grad += out->grad;
            }
            if (b->requires_grad) {
                b->ensure_grad();
                b->grad += out->grad;
            }
        };
    return out;
}

inline Var sub(Tape& t, const Var& a, const Var& b) {
    bool rg = a->requires_grad || b->requires_grad;
    auto out = t.record(a->val - b->val, rg);
    if (rg)
        out->backprop = [a, b, out] {
            if (a->requires_grad) {
                a->ensure_grad();
                a->grad += out->grad;
            }
            if (b->requires_grad) {
                b->ensure_grad();
                b->grad -= out->grad;
            }
        };
    return out;
}

// Broadcast a 1 x m bias over every row.
inline Var add_rowvec(Tape& t, const Var& a, const Var& bias) {
    bool rg = a->requires_grad || bias->requires_grad;
    MatrixXd v = a->val;
    v.rowwise() += Eigen::RowVectorXd(bias->val.row(0));
    auto out = t.record(std::move(v), rg);
    if (rg)
        out->backprop = [a, bias, out] {
            if (a->requires_grad) {
                a->ensure_grad();
                a->grad += out->grad;
            }
            if (bias->requires_grad) {
                bias->ensure_grad();
                bias->grad.row(0) += out->grad.colwise().sum();
            }
        };
    return out;
}

inline Var mul(Tape& t, const Var& a, const Var& b) {
    bool rg = a->requires_grad || b->requires_grad;
    auto out = t.record(a->val.cwiseProduct(b->val), rg);
    if (rg)
        out->backprop = [a, b, out] {
            if (a->requires_grad) {
                a->ensure_grad();
                a->grad += out->grad.cwiseProduct(b->val);
            }
            if (b->requires_grad) {
                b->ensure_grad();
                b->grad += out->grad.cwiseProduct(a->val);
            }
        };
    return out;
}

inline Var scale(Tape& t, const Var& a, double c) {
    auto out = t.record(a->val * c, a->requires_grad);
    if (a->requires_grad)
        out->backprop = [a, out, c] {
            a->ensure_grad();
            a->grad += out->grad * c;
        };
    return out;
}

inline Var sigmoid(Tape& t, const Var& a) {
    MatrixXd s = a->val.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    auto out = t.record(s, a->requires_grad);
    if (a->requires_grad)
        out->backprop = [a, out] {
            a->ensure_grad();
            a->grad += out->grad.cwiseProduct(
                out->val.cwiseProduct((1.0 - out->val.array()).matrix()));
        };
    return out;
}

inline Var tanh_(Tape& t, const Var& a) {
    MatrixXd s = a->val.array().tanh();
    auto out = t.record(s, a->requires_grad);
    if (a->requires_grad)
        out->backprop = [a, out] {
            a->ensure_grad();
            a->grad += out->grad.cwiseProduct((1.0 - out->val.array().square()).matrix());
        };
    return out;
}

inline Var relu(Tape& t, const Var& a) {
    auto out = t.record(a->val.cwiseMax(0.0), a->requires_grad);
    if (a->requires_grad)
        out->backprop = [a, out] {
            a->ensure_grad();
            a->grad += out->grad.cwiseProduct(
                (a->val.array() > 0.0).cast<double>().matrix());
        };
    return out;
}

inline Var concat_cols(Tape& t, const std::vector<Var>& parts) {
    if (parts.empty()) throw ConfigError("concat_cols: empty");
    Eigen::Index rows = parts[0]->val.rows(), cols = 0;
    bool rg = false;
    for (const auto& p : parts) {
        cols += p->val.cols();
        rg = rg || p->requires_grad;
    }
    MatrixXd v(rows, cols);
    Eigen::Index off = 0;
    for (const auto& p : parts) {
        v.middleCols(off, p->val.cols()) = p->val;
        off += p->val.cols();
    }
    auto out = t.record(std::move(v), rg);
    if (rg)
        out->backprop = [parts, out] {
            Eigen::Index off = 0;
            for (const auto& p : parts) {
                if (p->requires_grad) {
                    p->ensure_grad();
                    p->grad += out->grad.middleCols(off, p->val.cols());
                }
                off += p->val.cols();
            }
        };
    return out;
}

inline Var concat_cols(Tape& t, const Var& a, const Var& b) {
    return concat_cols(t, std::vector<Var>{a, b});
}

inline Var concat_rows(Tape& t, const std::vector<Var>& parts) {
    if (parts.empty()) throw ConfigError("concat_rows: empty");
    Eigen::Index cols = parts[0]->val.cols(), rows = 0;
    bool rg = false;
    for (const auto& p : parts) {
        rows += p->val.rows();
        rg = rg || p->requires_grad;
    }
    MatrixXd v(rows, cols);
    Eigen::Index off = 0;
    for (const auto& p : parts) {
        v.middleRows(off, p->val.rows()) = p->val;
        off += p->val.rows();
    }
    auto out = t.record(std::move(v), rg);
    if (rg)
        out->backprop = [parts, out] {
            Eigen::Index off = 0;
            for (const auto& p : parts) {
                if (p->requires_grad) {
                    p->ensure_grad();
                    p->grad += out->grad.middleRows(off, p->val.rows());
                }
                off += p->val.rows();
            }
        };
    return out;
}

inline Var row_slice(Tape& t, const Var& a, Eigen::Index start, Eigen::Index count) {
    auto out = t.record(a->val.middleRows(start, count), a->requires_grad);
    if (a->requires_grad)
        out->backprop = [a, out, start, count] {
            a->ensure_grad();
            a->grad.middleRows(start, count) += out->grad;
        };
    return out;
}

inline Var transpose(Tape& t, const Var& a) {
    auto out = t.record(a->val.transpose(), a->requires_grad);
    if (a->requires_grad)
        out->backprop = [a, out] {
            a->ensure_grad();
            a->grad += out->grad.transpose();
        };
    return out;
}

inline Var rows_mean(Tape& t, const Var& a) {
    MatrixXd m = a->val.colwise().mean();
    auto out = t.record(m, a->requires_grad);
    if (a->requires_grad)
        out->backprop = [a, out] {
            a->ensure_grad();
            double inv = 1.0 / static_cast<double>(a->val.rows());
            a->grad += (out->grad * inv).replicate(a->val.rows(), 1);
        };
    return out;
}

inline Var mean_all(Tape& t, const Var& a) {
    MatrixXd m(1, 1);
    m(0, 0) = a->val.mean();
    auto out = t.record(m, a->requires_grad);
    if (a->requires_grad)
        out->backprop = [a, out] {
            a->ensure_grad();
            a->grad.array() += out->grad(0, 0) / static_cast<double>(a->val.size());
        };
    return out;
}

// Row-wise softmax, numerically stabilized.
inline Var softmax_rows(Tape& t, const Var& a) {
    MatrixXd s = a->val;
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
        double mx = s.row(r).maxCoeff();
        s.row(r) = (s.row(r).array() - mx).exp();
        s.row(r) /= s.row(r).sum();
    }
    auto out = t.record(s, a->requires_grad);
    if (a->requires_grad)
        out->backprop = [a, out] {
            a->ensure_grad();
            for (Eigen::Index r = 0; r < a->val.rows(); ++r) {
                double dot = out->grad.row(r).dot(out->val.row(r));
                a->grad.row(r) += out->val.row(r).cwiseProduct(
                    (out->grad.row(r).array() - dot).matrix());
            }
        };
    return out;
}

// Mean binary cross-entropy on logits against a constant 0/1 target matrix.
inline Var bce_with_logits(Tape& t, const Var& logits, const MatrixXd& targets) {
    const MatrixXd& z = logits->val;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        double zi = z(i), yi = targets(i);
        loss += std::max(zi, 0.0) - zi * yi + std::log1p(std::exp(-std::fabs(zi)));
    }
    MatrixXd m(1, 1);
    m(0, 0) = loss / static_cast<double>(z.size());
    auto out = t.record(m, logits->requires_grad);
    if (logits->requires_grad)
        out->backprop = [logits, targets, out] {
            logits->ensure_grad();
            double inv = out->grad(0, 0) / static_cast<double>(logits->val.size());
            for (Eigen::Index i = 0; i < logits->val.size(); ++i) {
                double s = 1.0 / (1.0 + std::exp(-logits->val(i)));
                logits->grad(i) += inv * (s - targets(i));
            }
        };
    return out;
}

// Weighted softmax cross-entropy over rows of (n x k) logits; labels constant.
inline Var softmax_cross_entropy(Tape& t, const Var& logits, const std::vector<int>& labels,
                                 const std::vector<double>& class_weights = {}) {
    const MatrixXd& z = logits->val;
    const Eigen::Index n = z.rows(), k = z.cols();
    if (static_cast<Eigen::Index>(labels.size()) != n)
        throw ConfigError("softmax_cross_entropy: label count mismatch");
    MatrixXd probs(n, k);
    double total_w = 0.0, loss = 0.0;
    std::vector<double> w(n, 1.0);
    for (Eigen::Index r = 0; r < n; ++r) {
        if (!class_weights.empty()) w[r] = class_weights[labels[r]];
        total_w += w[r];
        double mx = z.row(r).maxCoeff();
        Eigen::RowVectorXd e = (z.row(r).array() - mx).exp();
        double s = e.sum();
        probs.row(r) = e / s;
        loss -= w[r] * (z(r, labels[r]) - mx - std::log(s));
    }
    MatrixXd m(1, 1);
    m(0, 0) = loss / total_w;
    auto out = t.record(m, logits->requires_grad);
    if (logits->requires_grad)
        out->backprop = [logits, labels, probs, w, total_w, out] {
            logits->ensure_grad();
            double g = out->grad(0, 0) / total_w;
            for (Eigen::Index r = 0; r < logits->val.rows(); ++r) {
                Eigen::RowVectorXd d = probs.row(r);
                d(labels[r]) -= 1.0;
                logits->grad.row(r) += g * w[r] * d;
            }
        };
    return out;
}

// Mean pairwise L1 distance between the rows of a (diversity statistic).
inline Var mean_pairwise_l1(Tape& t, const Var& a) {
    const MatrixXd& x = a->val;
    const Eigen::Index n = x.rows();
    if (n < 2) throw ConfigError("mean_pairwise_l1: need at least two rows");
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            total += (x.row(i) - x.row(j)).cwiseAbs().sum();
    const double pairs = static_cast<double>(n * (n - 1) / 2);
    MatrixXd m(1, 1);
    m(0, 0) = total / pairs;
    auto out = t.record(m, a->requires_grad);
    if (a->requires_grad)
        out->backprop = [a, out, pairs] {
            a->ensure_grad();
            const MatrixXd& x = a->val;
            double g = out->grad(0, 0) / pairs;
            for (Eigen::Index i = 0; i < x.rows(); ++i)
                for (Eigen::Index j = i + 1; j < x.rows(); ++j)
                    for (Eigen::Index c = 0; c < x.cols(); ++c) {
                        double d = x(i, c) - x(j, c);
                        double s = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
                        a->grad(i, c) += g * s;
                        a->grad(j, c) -= g * s;
                    }
        };
    return out;
}

// Valid 1-D convolution, stride 1. Rows are samples; columns hold channels
// contiguously, channel-major: index c * len + t. Kernel is
// (out_ch) x (in_ch * ksize), bias 1 x out_ch.
inline Var conv1d(Tape& t, const Var& input, const Var& kernel, const Var& bias, int in_ch,
                  int len, int ksize) {
    const int out_len = len - ksize + 1;
    const int out_ch = static_cast<int>(kernel->val.rows());
    if (input->val.cols() != static_cast<Eigen::Index>(in_ch) * len)
        throw ConfigError("conv1d: input width mismatch");
    const Eigen::Index n = input->val.rows();
    MatrixXd outv(n, static_cast<Eigen::Index>(out_ch) * out_len);
    for (Eigen::Index s = 0; s < n; ++s)
        for (int oc = 0; oc < out_ch; ++oc)
            for (int ot = 0; ot < out_len; ++ot) {
                double acc = bias->val(0, oc);
                for (int ic = 0; ic < in_ch; ++ic)
                    for (int k = 0; k < ksize; ++k)
                        acc += kernel->val(oc, ic * ksize + k) *
                               input->val(s, ic * len + ot + k);
                outv(s, oc * out_len + ot) = acc;
            }
    bool rg = input->requires_grad || kernel->requires_grad || bias->requires_grad;
    auto out = t.record(std::move(outv), rg);
    if (rg)
        out->backprop = [input, kernel, bias, out, in_ch, len, ksize, out_len, out_ch] {
            if (input->requires_grad) input->ensure_grad();
            if (kernel->requires_grad) kernel->ensure_grad();
            if (bias->requires_grad) bias->ensure_grad();
            const Eigen::Index n = input->val.rows();
            for (Eigen::Index s = 0; s < n; ++s)
                for (int oc = 0; oc < out_ch; ++oc)
                    for (int ot = 0; ot < out_len; ++ot) {
                        double g = out->grad(s, oc * out_len + ot);
                        if (g == 0.0) continue;
                        if (bias->requires_grad) bias->grad(0, oc) += g;
                        for (int ic = 0; ic < in_ch; ++ic)
                            for (int k = 0; k < ksize; ++k) {
                                if (kernel->requires_grad)
                                    kernel->grad(oc, ic * ksize + k) +=
                                        g * input->val(s, ic * len + ot + k);
                                if (input->requires_grad)
                                    input->grad(s, ic * len + ot + k) +=
                                        g * kernel->val(oc, ic * ksize + k);
                            }
                    }
        };
    return out;
}

// Non-overlapping max pool of width `pool` along each channel.
inline Var maxpool1d(Tape& t, const Var& input, int channels, int len, int pool) {
    const int out_len = len / pool;
    const Eigen::Index n = input->val.rows();
    MatrixXd outv(n, static_cast<Eigen::Index>(channels) * out_len);
    auto argmax = std::make_shared<Eigen::MatrixXi>(n, static_cast<Eigen::Index>(channels) * out_len);
    for (Eigen::Index s = 0; s < n; ++s)
        for (int c = 0; c < channels; ++c)
            for (int ot = 0; ot < out_len; ++ot) {
                int base = c * len + ot * pool;
                double best = input->val(s, base);
                int best_i = base;
                for (int k = 1; k < pool; ++k)
                    if (input->val(s, base + k) > best) {
                        best = input->val(s, base + k);
                        best_i = base + k;
                    }
                outv(s, c * out_len + ot) = best;
                (*argmax)(s, c * out_len + ot) = best_i;
            }
    auto out = t.record(std::move(outv), input->requires_grad);
    if (input->requires_grad)
        out->backprop = [input, out, argmax] {
            input->ensure_grad();
            for (Eigen::Index s = 0; s < out->grad.rows(); ++s)
                for (Eigen::Index c = 0; c < out->grad.cols(); ++c)
                    input->grad(s, (*argmax)(s, c)) += out->grad(s, c);
        };
    return out;
}

}  // namespace ops
}  // namespace wearsyn::nn
