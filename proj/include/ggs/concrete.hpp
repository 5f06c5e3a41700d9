#pragma once

#include "ggs/linalg.hpp"

#include <cstddef>
#include <vector>

namespace ggs {

/// f x k matrix of unnormalized logits. Column j parameterizes a categorical
/// distribution over the f input features via a column softmax.
struct SelectorLogits {
    DenseMatrix logits;

    std::size_t num_features() const noexcept { return logits.rows(); }
    std::size_t num_columns() const noexcept { return logits.cols(); }

    /// i.i.d. uniform on [-0.01, 0.01].
    static SelectorLogits init_uniform(std::size_t num_features, std::size_t num_columns, Rng& rng);
};

/// Geometric annealing from tau_start to tau_end over total_epochs.
/// tau_start == tau_end gives a constant temperature.
class TemperatureSchedule {
public:
    TemperatureSchedule(double tau_start, double tau_end, std::size_t total_epochs);

    /// tau_start * (tau_end / tau_start)^(epoch / total_epochs), epoch in [0, total_epochs].
    double at(std::size_t epoch) const;

    double tau_start() const noexcept { return tau_start_; }
    double tau_end() const noexcept { return tau_end_; }
    std::size_t total_epochs() const noexcept { return total_epochs_; }

private:
    double tau_start_;
    double tau_end_;
    std::size_t total_epochs_;
};

inline double temperature_at(const TemperatureSchedule& s, std::size_t epoch) { return s.at(epoch); }

/// A relaxed selection matrix drawn from the concrete distribution together
/// with the Gumbel noise that produced it.
struct ConcreteSample {
    /// f x k; each column lies on the probability simplex.
    DenseMatrix w;
    /// f x k Gumbel noise used for the draw; held fixed through backward.
    DenseMatrix noise;
};

/// Draws fresh Gumbel noise for every entry and applies the temperature softmax
/// column by column.
ConcreteSample sample_concrete(const SelectorLogits& l, double tau, Rng& rng);

/// Same as sample_concrete with caller-supplied noise (all zeros gives the
/// deterministic temperature softmax).
ConcreteSample sample_concrete(const SelectorLogits& l, double tau, const DenseMatrix& noise);

/// Gradient of the loss with respect to the logits, given its gradient with
/// respect to the sampled matrix. Noise is treated as a constant:
///   dl_ij = (y_ij / tau) * (g_ij - sum_m y_mj g_mj)
DenseMatrix backward_concrete(const ConcreteSample& sample, const DenseMatrix& grad_w, double tau);

/// Column-wise softmax of `logits / tau` with max subtraction.
DenseMatrix column_softmax(const DenseMatrix& logits, double tau = 1.0);

struct HardSelection {
    /// f x k, each column one-hot.
    DenseMatrix w_hard;
    /// indices[j] is the feature picked by column j. Duplicates are allowed.
    std::vector<std::size_t> indices;

    std::size_t distinct_count() const;
};

/// One-hot at the per-column argmax of the logits; ties go to the smaller feature index.
HardSelection hard_selection(const SelectorLogits& l);

/// Noise-free column softmax at `tau`. Columns are convex combination weights.
DenseMatrix extraction_matrix(const SelectorLogits& l, double tau = 1.0);

struct ColumnRanking {
    /// Column indices sorted by descending score; ties keep the smaller index first.
    std::vector<std::size_t> order;
    /// scores[j] = peak probability of column j's softmax at the ranking temperature.
    std::vector<double> scores;
};

ColumnRanking rank_columns(const SelectorLogits& l, double tau = 1.0);

/// Mean over columns of the peak softmax probability. Tracks how concentrated
/// the selector has become.
double mean_peak_probability(const SelectorLogits& l);

}  // namespace ggs
