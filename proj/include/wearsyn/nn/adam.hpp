#pragma once

#include <random>
#include <vector>

#include "wearsyn/dp/clip_noise.hpp"
#include "wearsyn/nn/tensor.hpp"

namespace wearsyn::nn {

class Adam {
public:
    Adam(std::vector<Var> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
        for (const auto& p : params_) {
            m_.push_back(MatrixXd::Zero(p->val.rows(), p->val.cols()));
            v_.push_back(MatrixXd::Zero(p->val.rows(), p->val.cols()));
        }
    }

    void zero_grad() {
        for (auto& p : params_) {
            p->ensure_grad();
            p->grad.setZero();
        }
    }

    // Applies whatever is currently in each parameter's grad.
    void step() {
        ++t_;
        double bc1 = 1.0 - std::pow(b1_, t_), bc2 = 1.0 - std::pow(b2_, t_);
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& p = *params_[i];
            p.ensure_grad();
            m_[i] = b1_ * m_[i] + (1.0 - b1_) * p.grad;
            v_[i] = b2_ * v_[i] + (1.0 - b2_) * p.grad.cwiseProduct(p.grad);
            MatrixXd mhat = m_[i] / bc1, vhat = v_[i] / bc2;
            p.val.array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
        }
    }

    // Flattened gradient of all parameters in registration order.
    Eigen::VectorXd flat_grad() const {
        Eigen::Index total = 0;
        for (const auto& p : params_) total += p->val.size();
        Eigen::VectorXd g(total);
        Eigen::Index off = 0;
        for (const auto& p : params_) {
            if (p->grad.size() == p->val.size())
                g.segment(off, p->val.size()) =
                    Eigen::Map<const Eigen::VectorXd>(p->grad.data(), p->grad.size());
            else
                g.segment(off, p->val.size()).setZero();
            off += p->val.size();
        }
        return g;
    }

    void set_flat_grad(const Eigen::VectorXd& g) {
        Eigen::Index off = 0;
        for (auto& p : params_) {
            p->ensure_grad();
            Eigen::Map<Eigen::VectorXd>(p->grad.data(), p->grad.size()) =
                g.segment(off, p->val.size());
            off += p->val.size();
        }
    }

    const std::vector<Var>& params() const { return params_; }

private:
    std::vector<Var> params_;
    double lr_, b1_, b2_, eps_;
    long t_ = 0;
    std::vector<MatrixXd> m_, v_;
};

// DP-Adam: caller accumulates per-example flat gradients, then applies one
// clipped-and-noised step through the shared mechanism.
class DpAdam {
public:
    DpAdam(std::vector<Var> params, double lr, double clip_norm, double sigma,
           std::uint64_t noise_seed)
        : inner_(std::move(params), lr), clip_(clip_norm), sigma_(sigma), rng_(noise_seed) {}

    void zero_grad() { inner_.zero_grad(); }
    Eigen::VectorXd flat_grad() const { return inner_.flat_grad(); }

    void step(const std::vector<Eigen::VectorXd>& per_example_grads) {
        Eigen::VectorXd g = dp::clip_and_noise(per_example_grads, clip_, sigma_, rng_);
        inner_.set_flat_grad(g);
        inner_.step();
    }

    const std::vector<Var>& params() const { return inner_.params(); }

private:
    Adam inner_;
    double clip_, sigma_;
    std::mt19937_64 rng_;
};

}  // namespace wearsyn::nn
