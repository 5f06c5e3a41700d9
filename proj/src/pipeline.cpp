#include "ggs/pipeline.hpp"

#include "ggs/config.hpp"
#include "ggs/error.hpp"
#include "ggs/optim.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace ggs {

namespace {

// Independent random streams per purpose, so that e.g. stage-2 initialization
// does not depend on how many draws stage 1 consumed.
constexpr std::uint64_t kStage1Stream = 1;
constexpr std::uint64_t kStage2Stream = 2;
constexpr std::uint64_t kBaselineStream = 3;

struct Defaults {
    const char* name;
    std::size_t k;
    std::size_t epochs_stage2;
};

constexpr Defaults kDatasetDefaults[] = {
    {"cora", 225, 50},
    {"citeseer", 450, 50},
    {"pubmed", 105, 100},
};

const Defaults* defaults_for(const std::string& name) {
    for (const auto& d : kDatasetDefaults) {
        if (name == d.name) return &d;
    }
    return nullptr;
}

// Runs epochs of forward / loss / backward / update on a deterministic model and
// records per-epoch loss and accuracy, evaluating after each update.
template <typename Forward, typename Backward>
void train_classifier(ExperimentReport& report, std::size_t epochs, const GraphDataset& ds, const char* stage,
                      Forward&& forward, Backward&& backward_and_update) {
    const auto& labels = ds.labels;
    ForwardCache cache = forward();
    report.stage2_loss.clear();
    report.val_accuracy.clear();
    report.test_accuracy.clear();
    report.best_val_accuracy = -1.0;
    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        const double loss = masked_nll(cache.p, labels, ds.split.train);
        if (!std::isfinite(loss)) throw DivergenceError(stage, epoch);
        backward_and_update(cache);
        cache = forward();
        const double val = evaluate_accuracy(cache.p, labels, ds.split.val);
        const double test = evaluate_accuracy(cache.p, labels, ds.split.test);
        report.stage2_loss.push_back(loss);
        report.val_accuracy.push_back(val);
        report.test_accuracy.push_back(test);
        if (val > report.best_val_accuracy) {
            report.best_val_accuracy = val;
            report.best_val_epoch = epoch;
            report.best_val_test_accuracy = test;
        }
    }
    report.final_test_accuracy = report.test_accuracy.back();
}

}  // namespace

const char* to_string(Mode mode) noexcept {
    switch (mode) {
        case Mode::select: return "select";
        case Mode::extract: return "extract";
        case Mode::baseline: return "baseline";
    }
    return "unknown";
}

Mode parse_mode(const std::string& text) {
    if (text == "select") return Mode::select;
    if (text == "extract") return Mode::extract;
    if (text == "baseline") return Mode::baseline;
    throw ConfigError("mode must be select, extract or baseline, got \"" + text + "\"");
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.epochs_stage1 == 0) throw ConfigError("epochs_stage1 must be >= 1");
    if (cfg.hidden == 0) throw ConfigError("hidden must be >= 1");
    if (!(cfg.lr > 0.0)) throw ConfigError("lr must be > 0");
    if (!(cfg.weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
    if (!(cfg.tau_start > 0.0) || !(cfg.tau_end > 0.0) || cfg.tau_end > cfg.tau_start) {
        throw ConfigError("temperatures must satisfy 0 < tau_end <= tau_start");
    }
    if (!(cfg.extract_tau >= 0.0)) throw ConfigError("extract_tau must be >= 0 (0 means tau_end)");
    if (cfg.band) {
        if (cfg.mode != Mode::extract) throw ConfigError("band requires extract mode");
        if (cfg.band->lo < 1 || cfg.band->lo >= cfg.band->hi) throw ConfigError("band requires 1 <= lo < hi");
    }
}

ExperimentConfig resolve_config(ExperimentConfig cfg, const GraphDataset& ds) {
    validate_config(cfg);
    const Defaults* d = defaults_for(ds.name);
    if (cfg.k == 0) {
        if (!d) throw ConfigError("k must be given for dataset \"" + ds.name + "\"");
        cfg.k = d->k;
    }
    if (cfg.epochs_stage2 == 0) cfg.epochs_stage2 = d ? d->epochs_stage2 : 50;
    if (cfg.extract_tau == 0.0) cfg.extract_tau = cfg.tau_end;
    if (cfg.k > ds.num_features) {
        throw ConfigError("k = " + std::to_string(cfg.k) + " exceeds the feature count " +
                          std::to_string(ds.num_features));
    }
    if (cfg.band && cfg.band->hi > cfg.k + 1) {
        throw ConfigError("band [" + std::to_string(cfg.band->lo) + ", " + std::to_string(cfg.band->hi) +
                          ") exceeds the " + std::to_string(cfg.k) + " ranked columns");
    }
    return cfg;
}

PreparedDataset prepare_dataset(const std::filesystem::path& dir, AdjacencyMode mode, bool row_normalize) {
    PreparedDataset out;
    out.ds = load_dataset(dir, LoadOptions{row_normalize});
    out.adjacency = normalize_adjacency(out.ds, mode);
    return out;
}

Stage1Result run_stage1(const ExperimentConfig& cfg, const GraphDataset& ds, const NormalizedAdjacency& a_hat,
                        Rng& rng) {
    const std::size_t f = ds.num_features;
    const std::size_t c = ds.num_classes;
    Stage1Result result;
    auto& params = result.params;
    params.selector = SelectorLogits::init_uniform(f, cfg.k, rng);
    params.w1 = glorot_uniform(cfg.k, cfg.hidden, rng);
    params.w2 = glorot_uniform(cfg.hidden, c, rng);

    const AdamOptions adam{cfg.lr};
    AdamState logits_state(f, cfg.k, adam);
    AdamState w1_state(cfg.k, cfg.hidden, adam);
    AdamState w2_state(cfg.hidden, c, adam);

    // Annealed so that the first epoch runs at tau_start and the last at tau_end.
    const TemperatureSchedule schedule(cfg.tau_start, cfg.tau_end, std::max<std::size_t>(cfg.epochs_stage1 - 1, 1));
    const auto& a = a_hat.a_hat;
    const auto& x = ds.features;
    for (std::size_t epoch = 0; epoch < cfg.epochs_stage1; ++epoch) {
        const double tau = schedule.at(std::min(epoch, schedule.total_epochs()));
        auto fwd = forward_stage1(params, a, x, tau, rng);
        const double loss = masked_nll(fwd.cache.p, ds.labels, ds.split.train);
        if (!std::isfinite(loss)) throw DivergenceError("stage 1", epoch + 1);
        auto grads = backward_stage1(fwd.cache, fwd.sample, params, a, x, ds.labels, ds.split.train, tau,
                                     cfg.weight_decay);
        logits_state.step(params.selector.logits, grads.d_logits);
        w1_state.step(params.w1, grads.d_w1);
        w2_state.step(params.w2, grads.d_w2);
        result.loss.push_back(loss);
        result.mean_peak.push_back(mean_peak_probability(params.selector));
    }
    return result;
}

Stage2Params freeze_selector(const Stage1Params& params, Mode mode, std::size_t num_classes, Rng& rng,
                             std::optional<std::size_t> wide_hidden, double extract_tau) {
    Stage2Params out;
    switch (mode) {
        case Mode::select: out.w_g_frozen = hard_selection(params.selector).w_hard; break;
        case Mode::extract: out.w_g_frozen = extraction_matrix(params.selector, extract_tau); break;
        case Mode::baseline: throw ConfigError("freeze_selector: baseline mode has no selector");
    }
    const std::size_t k = out.w_g_frozen.cols();
    if (wide_hidden) {
        out.w1 = glorot_uniform(k, *wide_hidden, rng);
        out.w2 = glorot_uniform(*wide_hidden, num_classes, rng);
    } else {
        out.w2 = glorot_uniform(k, num_classes, rng);
    }
    return out;
}

ExperimentReport run_stage2(const ExperimentConfig& cfg, Stage2Params stage2, const GraphDataset& ds,
                            const NormalizedAdjacency& a_hat) {
    ExperimentReport report;
    report.config = cfg;
    report.dataset_name = ds.name;
    const auto& a = a_hat.a_hat;
    const auto& x = ds.features;
    const AdamOptions adam{cfg.lr};
    AdamState w2_state(stage2.w2.rows(), stage2.w2.cols(), adam);
    std::optional<AdamState> w1_state;
    if (stage2.w1) w1_state.emplace(stage2.w1->rows(), stage2.w1->cols(), adam);

    train_classifier(
        report, cfg.epochs_stage2, ds, "stage 2", [&] { return forward_stage2(stage2, a, x); },
        [&](const ForwardCache& cache) {
            auto grads = backward_stage2(cache, stage2, a, x, ds.labels, ds.split.train, cfg.weight_decay);
            w2_state.step(stage2.w2, grads.d_w2);
            if (w1_state) w1_state->step(*stage2.w1, *grads.d_w1);
        });
    return report;
}

DenseMatrix band_selector(const SelectorLogits& logits, const Band& band, double tau,
                          std::vector<std::size_t>* columns) {
    const std::size_t k = logits.num_columns();
    if (band.lo < 1 || band.lo >= band.hi || band.hi > k + 1) {
        throw ConfigError("band [" + std::to_string(band.lo) + ", " + std::to_string(band.hi) +
                          ") is outside the ranks 1.." + std::to_string(k));
    }
    const auto ranking = rank_columns(logits, tau);
    const DenseMatrix full = extraction_matrix(logits, tau);
    DenseMatrix out(full.rows(), band.width());
    if (columns) columns->clear();
    for (std::size_t r = band.lo; r < band.hi; ++r) {
        const std::size_t column = ranking.order[r - 1];
        for (std::size_t i = 0; i < full.rows(); ++i) out(i, r - band.lo) = full(i, column);
        if (columns) columns->push_back(column);
    }
    return out;
}

ExperimentReport run_band(const ExperimentConfig& cfg, const SelectorLogits& logits, const GraphDataset& ds,
                          const NormalizedAdjacency& a_hat, Rng& rng) {
    if (!cfg.band) throw ConfigError("run_band: config has no band");
    Stage2Params stage2;
    std::vector<std::size_t> columns;
    stage2.w_g_frozen = band_selector(logits, *cfg.band, cfg.extract_tau, &columns);
    const std::size_t width = stage2.w_g_frozen.cols();
    if (cfg.wide_stage2) {
        stage2.w1 = glorot_uniform(width, cfg.hidden, rng);
        stage2.w2 = glorot_uniform(cfg.hidden, ds.num_classes, rng);
    } else {
        stage2.w2 = glorot_uniform(width, ds.num_classes, rng);
    }
    auto report = run_stage2(cfg, std::move(stage2), ds, a_hat);
    report.band_columns = std::move(columns);
    return report;
}

ExperimentReport run_baseline(const ExperimentConfig& cfg, const GraphDataset& ds, const NormalizedAdjacency& a_hat,
                              Rng& rng) {
    ExperimentReport report;
    report.config = cfg;
    report.dataset_name = ds.name;
    BaselineParams params{glorot_uniform(ds.num_features, cfg.hidden, rng),
                          glorot_uniform(cfg.hidden, ds.num_classes, rng)};
    const AdamOptions adam{cfg.lr};
    AdamState w1_state(params.w1.rows(), params.w1.cols(), adam);
    AdamState w2_state(params.w2.rows(), params.w2.cols(), adam);
    const auto& a = a_hat.a_hat;
    const auto& x = ds.features;
    train_classifier(
        report, cfg.epochs_stage1, ds, "baseline", [&] { return forward_baseline(params, a, x); },
        [&](const ForwardCache& cache) {
            auto grads = backward_baseline(cache, params, a, x, ds.labels, ds.split.train, cfg.weight_decay);
            w1_state.step(params.w1, grads.d_w1);
            w2_state.step(params.w2, grads.d_w2);
        });
    return report;
}

namespace {

void attach_stage1(ExperimentReport& report, const Stage1Result& stage1, const ExperimentConfig& cfg) {
    report.stage1_loss = stage1.loss;
    report.stage1_mean_peak = stage1.mean_peak;
    const auto selection = hard_selection(stage1.params.selector);
    if (cfg.mode == Mode::select) {
        report.selected_indices = selection.indices;
        report.distinct_selected = selection.distinct_count();
    } else {
        report.ranking = rank_columns(stage1.params.selector, cfg.extract_tau);
        report.column_argmax = selection.indices;
        report.distinct_selected = selection.distinct_count();
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<ExperimentReport> run_extraction_family(const ExperimentConfig& cfg_in, const PreparedDataset& data,
                                                    const std::vector<std::optional<Band>>& bands) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig cfg = resolve_config(cfg_in, data.ds);
    cfg.mode = Mode::extract;
    cfg.band.reset();
    Rng stage1_rng = Rng::derive(cfg.seed, kStage1Stream);
    const Stage1Result stage1 = run_stage1(cfg, data.ds, data.adjacency, stage1_rng);
    const double stage1_seconds = seconds_since(start);

    std::vector<ExperimentReport> reports;
    for (const auto& band : bands) {
        const auto run_start = std::chrono::steady_clock::now();
        ExperimentConfig run_cfg = cfg;
        run_cfg.band = band;
        run_cfg = resolve_config(run_cfg, data.ds);
        Rng stage2_rng = Rng::derive(cfg.seed, kStage2Stream);
        ExperimentReport report;
        if (band) {
            report = run_band(run_cfg, stage1.params.selector, data.ds, data.adjacency, stage2_rng);
        } else {
            const std::optional<std::size_t> wide =
                run_cfg.wide_stage2 ? std::optional<std::size_t>(run_cfg.hidden) : std::nullopt;
            report = run_stage2(run_cfg,
                                freeze_selector(stage1.params, Mode::extract, data.ds.num_classes, stage2_rng, wide,
                                                run_cfg.extract_tau),
                                data.ds, data.adjacency);
        }
        report.config = run_cfg;
        attach_stage1(report, stage1, run_cfg);
        report.wall_clock_seconds = stage1_seconds + seconds_since(run_start);
        reports.push_back(std::move(report));
    }
    return reports;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg_in, const PreparedDataset& data) {
    const auto start = std::chrono::steady_clock::now();
    const ExperimentConfig cfg = resolve_config(cfg_in, data.ds);
    ExperimentReport report;
    switch (cfg.mode) {
        case Mode::baseline: {
            Rng rng = Rng::derive(cfg.seed, kBaselineStream);
            report = run_baseline(cfg, data.ds, data.adjacency, rng);
            break;
        }
        case Mode::extract: {
            report = run_extraction_family(cfg, data, {cfg.band}).front();
            break;
        }
        case Mode::select: {
            Rng stage1_rng = Rng::derive(cfg.seed, kStage1Stream);
            const Stage1Result stage1 = run_stage1(cfg, data.ds, data.adjacency, stage1_rng);
            Rng stage2_rng = Rng::derive(cfg.seed, kStage2Stream);
            const std::optional<std::size_t> wide =
                cfg.wide_stage2 ? std::optional<std::size_t>(cfg.hidden) : std::nullopt;
            report = run_stage2(cfg, freeze_selector(stage1.params, Mode::select, data.ds.num_classes, stage2_rng, wide),
                                data.ds, data.adjacency);
            attach_stage1(report, stage1, cfg);
            break;
        }
    }
    report.config = cfg;
    report.wall_clock_seconds = seconds_since(start);
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const auto data = prepare_dataset(cfg.dataset, cfg.adjacency, cfg.row_normalize);
    return run_experiment(cfg, data);
}

nlohmann::json report_to_json(const ExperimentReport& r) {
    using nlohmann::json;
    json config = json::object();
    for (const auto& [key, value] : config_pairs(r.config)) config[key] = value;

    json out;
    out["config"] = config;
    out["dataset"] = r.dataset_name;
    out["mode"] = to_string(r.config.mode);
    out["test_accuracy"] = r.headline_accuracy();
    out["final_test_accuracy"] = r.final_test_accuracy;
    out["best_val_accuracy"] = r.best_val_accuracy;
    out["best_val_epoch"] = r.best_val_epoch;
    out["best_val_test_accuracy"] = r.best_val_test_accuracy;
    out["stage1"] = {{"loss", r.stage1_loss}, {"mean_peak_probability", r.stage1_mean_peak}};
    out["stage2"] = {{"loss", r.stage2_loss}, {"val_accuracy", r.val_accuracy}, {"test_accuracy", r.test_accuracy}};
    if (r.config.mode == Mode::select) {
        out["selected"] = {{"indices", r.selected_indices}, {"distinct_count", r.distinct_selected}};
    }
    if (r.ranking) {
        out["ranking"] = {{"order", r.ranking->order},
                          {"scores", r.ranking->scores},
                          {"argmax_feature", r.column_argmax},
                          {"distinct_argmax_count", r.distinct_selected}};
    }
    if (r.config.band) {
        out["band"] = {{"lo", r.config.band->lo}, {"hi", r.config.band->hi}, {"columns", r.band_columns}};
    }
    out["wall_clock_seconds"] = r.wall_clock_seconds;
    return out;
}

std::string ranking_csv(const ExperimentReport& report) {
    if (!report.ranking) throw ConfigError("ranking_csv: report has no ranking");
    const auto& ranking = *report.ranking;
    std::ostringstream out;
    out << "rank,column,score,argmax_feature\n";
    for (std::size_t r = 0; r < ranking.order.size(); ++r) {
        const std::size_t column = ranking.order[r];
        out << (r + 1) << ',' << column << ',' << detail::format_double(ranking.scores[column]) << ','
            << report.column_argmax.at(column) << '\n';
    }
    return out.str();
}

std::string selected_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "column,feature_id\n";
    for (std::size_t j = 0; j < report.selected_indices.size(); ++j) {
        out << j << ',' << report.selected_indices[j] << '\n';
    }
    return out.str();
}

}  // namespace ggs
