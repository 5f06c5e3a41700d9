#include "ggs/gcn.hpp"

#include "ggs/error.hpp"

#include <algorithm>
#include <cmath>

namespace ggs {

namespace {

constexpr double kProbabilityFloor = 1e-12;

void require_mask(std::span<const std::size_t> mask, const char* what) {
    if (mask.empty()) throw ConfigError(std::string(what) + ": mask is empty");
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ShapeError(message);
}

// Â · m · w with the convolution applied first, plus the shared ReLU/output head.
void forward_tail(ForwardCache& c, const std::optional<DenseMatrix>& w1, const DenseMatrix& w2,
                  const SparseMatrixCSR& a_hat) {
    c.m = w1 ? matmul(c.a_s, *w1) : c.a_s;
    c.h = relu(c.m);
    c.a_h = spmm(a_hat, c.h);
    c.z = matmul(c.a_h, w2);
    c.p = row_softmax(c.z);
}

struct TailGrads {
    std::optional<DenseMatrix> d_w1;
    DenseMatrix d_w2;
    DenseMatrix d_a_s;
};

DenseMatrix output_grad(const DenseMatrix& p, std::span<const std::size_t> labels,
                        std::span<const std::size_t> mask) {
    require_mask(mask, "backward");
    DenseMatrix dz(p.rows(), p.cols());
    const double scale = 1.0 / static_cast<double>(mask.size());
    for (std::size_t i : mask) {
        require(i < p.rows() && i < labels.size(), "backward: mask index out of range");
        for (std::size_t j = 0; j < p.cols(); ++j) dz(i, j) = p(i, j) * scale;
        dz(i, labels[i]) -= scale;
    }
    return dz;
}

void add_decay(DenseMatrix& grad, const DenseMatrix& w, double weight_decay) {
    if (weight_decay == 0.0) return;
    for (std::size_t i = 0; i < grad.size(); ++i) grad.data()[i] += weight_decay * w.data()[i];
}

// Â is symmetric, so Âᵀ products are computed with Â itself.
TailGrads backward_tail(const ForwardCache& c, const std::optional<DenseMatrix>& w1, const DenseMatrix& w2,
                        const SparseMatrixCSR& a_hat, std::span<const std::size_t> labels,
                        std::span<const std::size_t> mask, double weight_decay) {
    require(c.p.same_shape(c.z) && c.z.rows() == a_hat.rows() && c.z.cols() == w2.cols() &&
                c.a_h.cols() == w2.rows() && c.h.same_shape(c.m) && c.a_h.same_shape(c.h),
            "backward: stale cache (shapes do not match parameters)");
    require(!w1 || (c.a_s.cols() == w1->rows() && c.m.cols() == w1->cols()),
            "backward: stale cache (hidden layer shape mismatch)");

    TailGrads g;
    const DenseMatrix dz = output_grad(c.p, labels, mask);
    g.d_w2 = matmul(transpose(c.a_h), dz);
    add_decay(g.d_w2, w2, weight_decay);

    DenseMatrix dm = spmm(a_hat, matmul(dz, transpose(w2)));
    for (std::size_t i = 0; i < dm.size(); ++i) {
        if (!(c.m.data()[i] > 0.0)) dm.data()[i] = 0.0;
    }
    if (w1) {
        g.d_w1 = matmul(transpose(c.a_s), dm);
        add_decay(*g.d_w1, *w1, weight_decay);
        g.d_a_s = matmul(dm, transpose(*w1));
    } else {
        g.d_a_s = std::move(dm);
    }
    return g;
}

}  // namespace

DenseMatrix row_softmax(const DenseMatrix& z) {
    DenseMatrix p(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const auto in = z.row(i);
        auto out = p.row(i);
        const double peak = *std::max_element(in.begin(), in.end());
        double total = 0.0;
        for (std::size_t j = 0; j < in.size(); ++j) {
            out[j] = std::exp(in[j] - peak);
            total += out[j];
        }
        for (double& v : out) v /= total;
    }
    return p;
}

double masked_nll(const DenseMatrix& p, std::span<const std::size_t> labels, std::span<const std::size_t> mask) {
    require_mask(mask, "masked_nll");
    double total = 0.0;
    for (std::size_t i : mask) {
        require(i < p.rows() && i < labels.size() && labels[i] < p.cols(), "masked_nll: index out of range");
        total -= std::log(std::max(p(i, labels[i]), kProbabilityFloor));
    }
    return total / static_cast<double>(mask.size());
}

double evaluate_accuracy(const DenseMatrix& p, std::span<const std::size_t> labels,
                         std::span<const std::size_t> mask) {
    require_mask(mask, "evaluate_accuracy");
    std::size_t correct = 0;
    for (std::size_t i : mask) {
        require(i < p.rows() && i < labels.size(), "evaluate_accuracy: index out of range");
        const auto row = p.row(i);
        const auto predicted = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        if (predicted == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(mask.size());
}

DenseMatrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    DenseMatrix w(rows, cols);
    for (double& v : w.data()) v = rng.uniform_range(-limit, limit);
    return w;
}

double l2_penalty(const DenseMatrix& w, double weight_decay) {
    double sum = 0.0;
    for (double v : w.data()) sum += v * v;
    return 0.5 * weight_decay * sum;
}

Stage1Forward forward_stage1(const Stage1Params& params, const SparseMatrixCSR& a_hat, const SparseMatrixCSR& x,
                             double tau, Rng& rng) {
    auto sample = sample_concrete(params.selector, tau, rng);
    return forward_stage1(params, a_hat, x, tau, sample.noise);
}

Stage1Forward forward_stage1(const Stage1Params& params, const SparseMatrixCSR& a_hat, const SparseMatrixCSR& x,
                             double tau, const DenseMatrix& noise) {
    require(x.cols() == params.selector.num_features(),
            "forward_stage1: features " + x.shape_string() + " vs selector " + params.selector.logits.shape_string());
    require(a_hat.rows() == x.rows() && a_hat.cols() == x.rows(), "forward_stage1: adjacency " +
                                                                      a_hat.shape_string() + " vs features " +
                                                                      x.shape_string());
    Stage1Forward out{{}, sample_concrete(params.selector, tau, noise)};
    auto& c = out.cache;
    c.s = spmm(x, out.sample.w);
    c.a_s = spmm(a_hat, c.s);
    forward_tail(c, params.w1, params.w2, a_hat);
    return out;
}

Stage1Grads backward_stage1(const ForwardCache& cache, const ConcreteSample& sample, const Stage1Params& params,
                            const SparseMatrixCSR& a_hat, const SparseMatrixCSR& x,
                            std::span<const std::size_t> labels, std::span<const std::size_t> train_mask, double tau,
                            double weight_decay) {
    require(sample.w.same_shape(params.selector.logits) && cache.s.rows() == x.rows() &&
                cache.s.cols() == params.selector.num_columns() && cache.a_s.same_shape(cache.s),
            "backward_stage1: stale cache (sample or selected features do not match selector)");
    auto tail = backward_tail(cache, params.w1, params.w2, a_hat, labels, train_mask, weight_decay);
    const DenseMatrix d_w = spmm_transposed(x, spmm(a_hat, tail.d_a_s));
    return {backward_concrete(sample, d_w, tau), std::move(*tail.d_w1), std::move(tail.d_w2)};
}

ForwardCache forward_stage2(const Stage2Params& params, const SparseMatrixCSR& a_hat, const SparseMatrixCSR& x) {
    require(x.cols() == params.w_g_frozen.rows(), "forward_stage2: features " + x.shape_string() +
                                                      " vs selector " + params.w_g_frozen.shape_string());
    require(a_hat.rows() == x.rows() && a_hat.cols() == x.rows(), "forward_stage2: adjacency " +
                                                                      a_hat.shape_string() + " vs features " +
                                                                      x.shape_string());
    ForwardCache c;
    c.s = spmm(x, params.w_g_frozen);
    c.a_s = spmm(a_hat, c.s);
    forward_tail(c, params.w1, params.w2, a_hat);
    return c;
}

Stage2Grads backward_stage2(const ForwardCache& cache, const Stage2Params& params, const SparseMatrixCSR& a_hat,
                            const SparseMatrixCSR& /*x*/, std::span<const std::size_t> labels,
                            std::span<const std::size_t> train_mask, double weight_decay) {
    require(cache.s.cols() == params.w_g_frozen.cols(), "backward_stage2: stale cache (selector width mismatch)");
    auto tail = backward_tail(cache, params.w1, params.w2, a_hat, labels, train_mask, weight_decay);
    return {std::move(tail.d_w1), std::move(tail.d_w2)};
}

ForwardCache forward_baseline(const BaselineParams& params, const SparseMatrixCSR& a_hat, const SparseMatrixCSR& x) {
    require(x.cols() == params.w1.rows(), "forward_baseline: features " + x.shape_string() + " vs W1 " +
                                              params.w1.shape_string());
    ForwardCache c;
    c.s = spmm(x, params.w1);
    c.a_s = spmm(a_hat, c.s);
    forward_tail(c, std::nullopt, params.w2, a_hat);
    return c;
}

BaselineGrads backward_baseline(const ForwardCache& cache, const BaselineParams& params, const SparseMatrixCSR& a_hat,
                                const SparseMatrixCSR& x, std::span<const std::size_t> labels,
                                std::span<const std::size_t> train_mask, double weight_decay) {
    require(cache.s.rows() == x.rows() && cache.s.cols() == params.w1.cols(),
            "backward_baseline: stale cache (hidden width mismatch)");
    auto tail = backward_tail(cache, std::nullopt, params.w2, a_hat, labels, train_mask, weight_decay);
    DenseMatrix d_w1 = spmm_transposed(x, spmm(a_hat, tail.d_a_s));
    add_decay(d_w1, params.w1, weight_decay);
    return {std::move(d_w1), std::move(tail.d_w2)};
}

}  // namespace ggs
