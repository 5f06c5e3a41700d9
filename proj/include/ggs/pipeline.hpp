#pragma once

#include "ggs/concrete.hpp"
#include "ggs/gcn.hpp"
#include "ggs/graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ggs {

enum class Mode { select, extract, baseline };

const char* to_string(Mode mode) noexcept;
Mode parse_mode(const std::string& text);

/// Half-open interval [lo, hi) of 1-based ranks.
struct Band {
    std::size_t lo = 1;
    std::size_t hi = 2;

    std::size_t width() const noexcept { return hi - lo; }
    friend bool operator==(const Band&, const Band&) = default;
};

struct ExperimentConfig {
    std::filesystem::path dataset;
    Mode mode = Mode::extract;
    /// 0 selects the per-dataset default (cora 225, citeseer 450, pubmed 105).
    std::size_t k = 0;
    std::size_t hidden = 16;
    std::size_t epochs_stage1 = 300;
    /// 0 selects the per-dataset default (pubmed 100, otherwise 50).
    std::size_t epochs_stage2 = 0;
    double lr = 0.01;
    double weight_decay = 5e-4;
    double tau_start = 10.0;
    double tau_end = 0.01;
    std::uint64_t seed = 1;
    std::optional<Band> band;
    AdjacencyMode adjacency = AdjacencyMode::renormalized;
    bool row_normalize = false;
    /// Temperature of the deterministic extraction matrix and ranking; 0 selects tau_end.
    double extract_tau = 0.0;
    /// Adds a trainable k x h hidden layer to the stage-2 classifier.
    bool wide_stage2 = false;
};

/// Fills dataset-dependent defaults and checks every config invariant against `ds`.
ExperimentConfig resolve_config(ExperimentConfig cfg, const GraphDataset& ds);

/// Checks invariants that do not depend on the dataset.
void validate_config(const ExperimentConfig& cfg);

struct Stage1Result {
    Stage1Params params;
    std::vector<double> loss;
    /// Mean column peak probability of softmax(logits) after each epoch.
    std::vector<double> mean_peak;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::string dataset_name;
    std::vector<double> stage1_loss;
    std::vector<double> stage1_mean_peak;
    std::vector<double> stage2_loss;
    std::vector<double> val_accuracy;
    std::vector<double> test_accuracy;
    double final_test_accuracy = 0.0;
    double best_val_accuracy = 0.0;
    std::size_t best_val_epoch = 0;
    /// Test accuracy at the best-validation epoch; the headline number.
    double best_val_test_accuracy = 0.0;
    std::vector<std::size_t> selected_indices;
    std::size_t distinct_selected = 0;
    std::optional<ColumnRanking> ranking;
    /// Argmax feature of every selector column (extract mode).
    std::vector<std::size_t> column_argmax;
    /// Selector columns kept by a band run, in rank order.
    std::vector<std::size_t> band_columns;
    double wall_clock_seconds = 0.0;

    double headline_accuracy() const noexcept { return best_val_test_accuracy; }
};

/// Prepared inputs shared by every run on one dataset.
struct PreparedDataset {
    GraphDataset ds;
    NormalizedAdjacency adjacency;
};

PreparedDataset prepare_dataset(const std::filesystem::path& dir, AdjacencyMode mode = AdjacencyMode::renormalized,
                                bool row_normalize = false);

Stage1Result run_stage1(const ExperimentConfig& cfg, const GraphDataset& ds, const NormalizedAdjacency& a_hat,
                        Rng& rng);

/// Hard one-hot selection (select) or noise-free column softmax at extract_tau
/// (extract) of the trained logits, plus a freshly Glorot-initialized W2.
Stage2Params freeze_selector(const Stage1Params& params, Mode mode, std::size_t num_classes, Rng& rng,
                             std::optional<std::size_t> wide_hidden = std::nullopt, double extract_tau = 1.0);

/// Trains W2 (and W1 in the wide variant) on the frozen selector. Fills the
/// stage-2 fields of the report.
ExperimentReport run_stage2(const ExperimentConfig& cfg, Stage2Params stage2, const GraphDataset& ds,
                            const NormalizedAdjacency& a_hat);

/// f x (hi - lo) extraction matrix at temperature tau holding the columns
/// ranked in [lo, hi) by peak probability at the same temperature.
DenseMatrix band_selector(const SelectorLogits& logits, const Band& band, double tau = 1.0,
                          std::vector<std::size_t>* columns = nullptr);

ExperimentReport run_band(const ExperimentConfig& cfg, const SelectorLogits& logits, const GraphDataset& ds,
                          const NormalizedAdjacency& a_hat, Rng& rng);

ExperimentReport run_baseline(const ExperimentConfig& cfg, const GraphDataset& ds, const NormalizedAdjacency& a_hat,
                              Rng& rng);

/// Full run for one resolved config (select, extract with optional band, or baseline).
ExperimentReport run_experiment(const ExperimentConfig& cfg, const PreparedDataset& data);

/// Loads the dataset named in cfg and runs it.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// One stage-1 training shared by several extraction runs: each band (or the
/// full range when nullopt) gets its own stage-2 classifier.
std::vector<ExperimentReport> run_extraction_family(const ExperimentConfig& cfg, const PreparedDataset& data,
                                                    const std::vector<std::optional<Band>>& bands);

nlohmann::json report_to_json(const ExperimentReport& report);

/// "rank,column,score,argmax_feature" with 1-based ranks and 0-based indices.
std::string ranking_csv(const ExperimentReport& report);

/// "column,feature_id" for select-mode reports.
std::string selected_csv(const ExperimentReport& report);

}  // namespace ggs
