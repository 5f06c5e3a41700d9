#include "ggs/concrete.hpp"

#include "ggs/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace ggs {

SelectorLogits SelectorLogits::init_uniform(std::size_t num_features, std::size_t num_columns, Rng& rng) {
    DenseMatrix m(num_features, num_columns);
    for (double& v : m.data()) v = rng.uniform_range(-0.01, 0.01);
    return {std::move(m)};
}

TemperatureSchedule::TemperatureSchedule(double tau_start, double tau_end, std::size_t total_epochs)
    : tau_start_(tau_start), tau_end_(tau_end), total_epochs_(total_epochs) {
    if (!(tau_start > 0.0) || !(tau_end > 0.0)) throw ConfigError("temperature schedule: temperatures must be > 0");
    if (tau_end > tau_start) throw ConfigError("temperature schedule: tau_end must not exceed tau_start");
    if (total_epochs == 0) throw ConfigError("temperature schedule: total_epochs must be >= 1");
}

double TemperatureSchedule::at(std::size_t epoch) const {
    if (epoch > total_epochs_) {
        throw ConfigError("temperature schedule: epoch " + std::to_string(epoch) + " outside [0, " +
                          std::to_string(total_epochs_) + "]");
    }
    if (epoch == 0) return tau_start_;
    if (epoch == total_epochs_) return tau_end_;
    const double t = static_cast<double>(epoch) / static_cast<double>(total_epochs_);
    return tau_start_ * std::pow(tau_end_ / tau_start_, t);
}

namespace {

// Stabilized softmax of (logits(:, j) + noise(:, j)) / tau, written into out(:, j).
void softmax_column(const DenseMatrix& logits, const DenseMatrix* noise, double tau, std::size_t j,
                    DenseMatrix& out) {
    const std::size_t f = logits.rows();
    double peak = -INFINITY;
    for (std::size_t i = 0; i < f; ++i) {
        const double s = (logits(i, j) + (noise ? (*noise)(i, j) : 0.0)) / tau;
        out(i, j) = s;
        peak = std::max(peak, s);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < f; ++i) {
        const double e = std::exp(out(i, j) - peak);
        out(i, j) = e;
        total += e;
    }
    for (std::size_t i = 0; i < f; ++i) out(i, j) /= total;
}

void require_positive_tau(double tau) {
    if (!(tau > 0.0)) throw ConfigError("temperature must be > 0, got " + std::to_string(tau));
}

}  // namespace

DenseMatrix column_softmax(const DenseMatrix& logits, double tau) {
    require_positive_tau(tau);
    DenseMatrix out(logits.rows(), logits.cols());
    for (std::size_t j = 0; j < logits.cols(); ++j) softmax_column(logits, nullptr, tau, j, out);
    return out;
}

ConcreteSample sample_concrete(const SelectorLogits& l, double tau, Rng& rng) {
    require_positive_tau(tau);
    DenseMatrix noise(l.num_features(), l.num_columns());
    // Column-major draw order: column j consumes f consecutive draws.
    for (std::size_t j = 0; j < noise.cols(); ++j) {
        for (std::size_t i = 0; i < noise.rows(); ++i) noise(i, j) = rng.gumbel();
    }
    return sample_concrete(l, tau, noise);
}

ConcreteSample sample_concrete(const SelectorLogits& l, double tau, const DenseMatrix& noise) {
    require_positive_tau(tau);
    if (!noise.same_shape(l.logits)) {
        throw ShapeError("sample_concrete: noise " + noise.shape_string() + " does not match logits " +
                         l.logits.shape_string());
    }
    ConcreteSample sample{DenseMatrix(l.num_features(), l.num_columns()), noise};
    for (std::size_t j = 0; j < l.num_columns(); ++j) softmax_column(l.logits, &noise, tau, j, sample.w);
    return sample;
}

DenseMatrix backward_concrete(const ConcreteSample& sample, const DenseMatrix& grad_w, double tau) {
    require_positive_tau(tau);
    if (!grad_w.same_shape(sample.w)) {
        throw ShapeError("backward_concrete: gradient " + grad_w.shape_string() + " does not match sample " +
                         sample.w.shape_string());
    }
    const auto& y = sample.w;
    DenseMatrix out(y.rows(), y.cols());
    for (std::size_t j = 0; j < y.cols(); ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < y.rows(); ++i) dot += y(i, j) * grad_w(i, j);
        for (std::size_t i = 0; i < y.rows(); ++i) out(i, j) = y(i, j) / tau * (grad_w(i, j) - dot);
    }
    return out;
}

std::size_t HardSelection::distinct_count() const {
    return std::set<std::size_t>(indices.begin(), indices.end()).size();
}

HardSelection hard_selection(const SelectorLogits& l) {
    const auto& m = l.logits;
    HardSelection out{DenseMatrix(m.rows(), m.cols()), std::vector<std::size_t>(m.cols(), 0)};
    for (std::size_t j = 0; j < m.cols(); ++j) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < m.rows(); ++i) {
            if (m(i, j) > m(best, j)) best = i;
        }
        out.indices[j] = best;
        if (m.rows() > 0) out.w_hard(best, j) = 1.0;
    }
    return out;
}

DenseMatrix extraction_matrix(const SelectorLogits& l, double tau) { return column_softmax(l.logits, tau); }

ColumnRanking rank_columns(const SelectorLogits& l, double tau) {
    const DenseMatrix p = column_softmax(l.logits, tau);
    ColumnRanking out;
    out.scores.assign(p.cols(), 0.0);
    for (std::size_t j = 0; j < p.cols(); ++j) {
        for (std::size_t i = 0; i < p.rows(); ++i) out.scores[j] = std::max(out.scores[j], p(i, j));
    }
    out.order.resize(p.cols());
    std::iota(out.order.begin(), out.order.end(), std::size_t{0});
    std::stable_sort(out.order.begin(), out.order.end(),
                     [&](std::size_t a, std::size_t b) { return out.scores[a] > out.scores[b]; });
    return out;
}

double mean_peak_probability(const SelectorLogits& l) {
    const auto ranking = rank_columns(l);
    if (ranking.scores.empty()) return 0.0;
    return std::accumulate(ranking.scores.begin(), ranking.scores.end(), 0.0) /
           static_cast<double>(ranking.scores.size());
}

}  // namespace ggs
