#pragma once

#include "ggs/concrete.hpp"
#include "ggs/linalg.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ggs {

/// Trainable parameters of the selector network
///   P = softmax(Â ReLU(Â X W W1) W2),  W ~ Concrete(selector, tau).
struct Stage1Params {
    SelectorLogits selector;  // f x k
    DenseMatrix w1;           // k x h
    DenseMatrix w2;           // h x c
};

/// Classifier on top of a frozen selector:
///   P = softmax(Â ReLU(Â X W_G') W2)
/// With `w1` present (wide variant) the hidden layer becomes ReLU(Â X W_G' W1).
struct Stage2Params {
    DenseMatrix w_g_frozen;         // f x k, never updated
    std::optional<DenseMatrix> w1;  // k x h, wide variant only
    DenseMatrix w2;                 // k x c, or h x c in the wide variant
};

/// Standard two-layer GCN on all features: P = softmax(Â ReLU(Â X W1) W2).
struct BaselineParams {
    DenseMatrix w1;  // f x h
    DenseMatrix w2;  // h x c
};

/// Intermediates of one forward pass.
struct ForwardCache {
    DenseMatrix s;    // X W (selected/extracted features), n x k; X W1 for the baseline
    DenseMatrix a_s;  // Â S
    DenseMatrix m;    // hidden pre-activation
    DenseMatrix h;    // ReLU(m)
    DenseMatrix a_h;  // Â H
    DenseMatrix z;    // output logits, n x c
    DenseMatrix p;    // row softmax of z
};

struct Stage1Grads {
    DenseMatrix d_logits;
    DenseMatrix d_w1;
    DenseMatrix d_w2;
};

struct Stage2Grads {
    std::optional<DenseMatrix> d_w1;
    DenseMatrix d_w2;
};

struct BaselineGrads {
    DenseMatrix d_w1;
    DenseMatrix d_w2;
};

DenseMatrix row_softmax(const DenseMatrix& z);

/// Mean negative log-likelihood over `mask`, with log clamped at log(1e-12).
double masked_nll(const DenseMatrix& p, std::span<const std::size_t> labels, std::span<const std::size_t> mask);

/// Fraction of `mask` rows whose argmax (ties to the smaller class) equals the label.
double evaluate_accuracy(const DenseMatrix& p, std::span<const std::size_t> labels,
                         std::span<const std::size_t> mask);

/// Glorot/Xavier uniform on [-sqrt(6/(rows+cols)), sqrt(6/(rows+cols))].
DenseMatrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

struct Stage1Forward {
    ForwardCache cache;
    ConcreteSample sample;
};

Stage1Forward forward_stage1(const Stage1Params& params, const SparseMatrixCSR& a_hat, const SparseMatrixCSR& x,
                             double tau, Rng& rng);

/// Forward pass with caller-supplied Gumbel noise (used for frozen-noise checks).
Stage1Forward forward_stage1(const Stage1Params& params, const SparseMatrixCSR& a_hat, const SparseMatrixCSR& x,
                             double tau, const DenseMatrix& noise);

/// Gradients of masked_nll(P, labels, train_mask) + (weight_decay / 2)(|W1|^2 + |W2|^2).
/// Â must be symmetric.
Stage1Grads backward_stage1(const ForwardCache& cache, const ConcreteSample& sample, const Stage1Params& params,
                            const SparseMatrixCSR& a_hat, const SparseMatrixCSR& x,
                            std::span<const std::size_t> labels, std::span<const std::size_t> train_mask, double tau,
                            double weight_decay = 0.0);

ForwardCache forward_stage2(const Stage2Params& params, const SparseMatrixCSR& a_hat, const SparseMatrixCSR& x);

/// No gradient is produced for w_g_frozen.
Stage2Grads backward_stage2(const ForwardCache& cache, const Stage2Params& params, const SparseMatrixCSR& a_hat,
                            const SparseMatrixCSR& x, std::span<const std::size_t> labels,
                            std::span<const std::size_t> train_mask, double weight_decay = 0.0);

ForwardCache forward_baseline(const BaselineParams& params, const SparseMatrixCSR& a_hat, const SparseMatrixCSR& x);

BaselineGrads backward_baseline(const ForwardCache& cache, const BaselineParams& params, const SparseMatrixCSR& a_hat,
                                const SparseMatrixCSR& x, std::span<const std::size_t> labels,
                                std::span<const std::size_t> train_mask, double weight_decay = 0.0);

/// 0.5 * weight_decay * sum of squared entries.
double l2_penalty(const DenseMatrix& w, double weight_decay);

}  // namespace ggs
