// Acceptance driver: one PASS/FAIL line per criterion.
//
//   acceptance properties      criteria 1-7, no datasets needed
//   acceptance quantitative    criteria 8-12 on tests/data/{cora,pubmed}
//   acceptance all             both
//
// --known-red N (repeatable) names a criterion whose FAIL is documented and
// should not turn the exit code red; its line still prints FAIL.

#include "gcn_oracle.hpp"
#include "support.hpp"

#include "ggs/cli.hpp"
#include "ggs/concrete.hpp"
#include "ggs/gcn.hpp"
#include "ggs/graph.hpp"
#include "ggs/pipeline.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace ggs;

namespace {

struct Outcome {
    int id;
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<Outcome> g_outcomes;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    g_outcomes.push_back({id, name, pass, detail});
    std::cout << (pass ? "PASS" : "FAIL") << ' ' << id << ' ' << name << ": " << detail << std::endl;
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double column_peak(const DenseMatrix& w, std::size_t j) {
    double peak = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) peak = std::max(peak, w(i, j));
    return peak;
}

std::size_t column_argmax(const DenseMatrix& w, std::size_t j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < w.rows(); ++i) {
        if (w(i, j) > w(best, j)) best = i;
    }
    return best;
}

// ---------------------------------------------------------------- properties

void criterion_simplex() {
    Rng rng(101);
    std::mt19937_64 gen(101);
    const SelectorLogits l{test::random_dense(50, 8, gen, -3.0, 3.0)};
    double worst_sum = 0.0;
    double min_entry = 1.0;
    std::size_t columns = 0;
    for (double tau : {10.0, 1.0, 0.1}) {
        for (int draw = 0; draw < 1250; ++draw) {
            const auto w = sample_concrete(l, tau, rng).w;
            for (std::size_t j = 0; j < w.cols(); ++j, ++columns) {
                double sum = 0.0;
                for (std::size_t i = 0; i < w.rows(); ++i) {
                    sum += w(i, j);
                    min_entry = std::min(min_entry, w(i, j));
                }
                worst_sum = std::max(worst_sum, std::fabs(sum - 1.0));
            }
        }
    }
    const bool pass = worst_sum <= 1e-9 && min_entry >= 0.0;
    report(1, "simplex", pass,
           std::to_string(columns) + " columns, max |sum-1| " + fmt("%.3g", worst_sum) + ", min entry " +
               fmt("%.3g", min_entry));
}

void criterion_annealing() {
    // Each sample is one column of 10 uniform logits.
    Rng rng(202);
    const SelectorLogits l{DenseMatrix(10, 1)};
    constexpr int samples = 10000;
    int concentrated = 0;
    for (int s = 0; s < samples; ++s) {
        if (column_peak(sample_concrete(l, 0.01, rng).w, 0) > 0.99) ++concentrated;
    }
    // Reference rate for a correct sampler, estimated from an independent generator.
    std::mt19937_64 gen(202);
    std::extreme_value_distribution<double> gumbel(0.0, 1.0);
    constexpr int reference_samples = 400000;
    int reference_hits = 0;
    for (int s = 0; s < reference_samples; ++s) {
        double g[10];
        double top = -1e300;
        for (double& v : g) top = std::max(top, v = gumbel(gen));
        long double denom = 0.0L;
        for (double v : g) denom += std::exp(static_cast<long double>((v - top) / 0.01));
        if (1.0L / denom > 0.99L) ++reference_hits;
    }
    const double rate = static_cast<double>(concentrated) / samples;
    const double reference = static_cast<double>(reference_hits) / reference_samples;
    report(2, "annealing", rate >= 0.99,
           "peak > 0.99 in " + fmt("%.4f", rate) + " of samples (need >= 0.99; exact sampler reference " +
               fmt("%.4f", reference) + ")");
}

void criterion_gumbel_max() {
    Rng rng(303);
    const std::vector<double> logits{0.5, -0.3, 1.2};
    constexpr std::size_t samples = 100000;
    DenseMatrix l(3, samples);
    for (std::size_t j = 0; j < samples; ++j) {
        for (std::size_t i = 0; i < 3; ++i) l(i, j) = logits[i];
    }
    const auto w = sample_concrete(SelectorLogits{l}, 1.0, rng).w;
    std::vector<double> freq(3, 0.0);
    for (std::size_t j = 0; j < samples; ++j) freq[column_argmax(w, j)] += 1.0 / samples;
    double z = 0.0;
    for (double v : logits) z += std::exp(v);
    double tv = 0.0;
    for (std::size_t i = 0; i < 3; ++i) tv += 0.5 * std::fabs(freq[i] - std::exp(logits[i]) / z);
    report(3, "gumbel-max", tv <= 0.02, "total variation " + fmt("%.5f", tv) + " at 1e5 samples");
}

void criterion_gradients() {
    std::mt19937_64 gen(404);
    double worst = 0.0;
    int instances = 0;
    for (int trial = 0; trial < 5; ++trial, ++instances) {
        const auto in = test::make_instance(10, 7, 3, gen);
        Stage1Params params{SelectorLogits{test::random_dense(7, 4, gen)}, test::random_dense(4, 5, gen),
                            test::random_dense(5, 3, gen)};
        const auto noise = test::random_dense(7, 4, gen);
        const double tau = 0.6;
        const double wd = 5e-4;
        const auto fwd = forward_stage1(params, in.a_hat, in.x, tau, noise);
        const auto grads = backward_stage1(fwd.cache, fwd.sample, params, in.a_hat, in.x, in.labels, in.train, tau, wd);
        auto loss = [&] {
            return test::oracle_loss(test::oracle_stage1(params, noise, tau, in), in) +
                   test::oracle_penalty(params.w1, wd) + test::oracle_penalty(params.w2, wd);
        };
        worst = std::max(worst, test::max_gradient_error(params.selector.logits, grads.d_logits, loss));
        worst = std::max(worst, test::max_gradient_error(params.w1, grads.d_w1, loss));
        worst = std::max(worst, test::max_gradient_error(params.w2, grads.d_w2, loss));
    }
    for (int trial = 0; trial < 5; ++trial, ++instances) {
        const auto in = test::make_instance(9, 6, 3, gen);
        DenseMatrix w_g = test::random_dense(6, 4, gen, 0.05, 1.0);
        Stage2Params params{w_g, std::nullopt, test::random_dense(4, 3, gen)};
        const double wd = 5e-4;
        const auto cache = forward_stage2(params, in.a_hat, in.x);
        const auto grads = backward_stage2(cache, params, in.a_hat, in.x, in.labels, in.train, wd);
        auto loss = [&] {
            return test::oracle_loss(test::oracle_stage2(params, in), in) + test::oracle_penalty(params.w2, wd);
        };
        worst = std::max(worst, test::max_gradient_error(params.w2, grads.d_w2, loss));
    }
    report(4, "gradient check", worst <= 1e-5,
           std::to_string(instances) + " instances, worst relative error " + fmt("%.3g", worst));
}

void criterion_adjacency() {
    std::mt19937_64 gen(505);
    long double worst = 0.0L;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + gen() % 16;
        const auto edges = test::random_edges(n, 0.3, gen);
        const auto a_hat = normalize_adjacency(make_graph(n, edges)).a_hat;
        const auto oracle = test::dense_normalized_adjacency(n, edges);
        worst = std::max(worst, test::max_abs_diff(oracle, densify(a_hat)));
    }
    report(5, "adjacency oracle", worst <= 1e-12L,
           "100 graphs, max |diff| " + fmt("%.3g", static_cast<double>(worst)));
}

void criterion_gather() {
    std::mt19937_64 gen(606);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + gen() % 20;
        const std::size_t f = 2 + gen() % 30;
        const std::size_t k = 1 + gen() % 10;
        const auto x = test::random_sparse(n, f, 0.3, gen);
        const auto sel = hard_selection(SelectorLogits{test::random_dense(f, k, gen)});
        const auto s = spmm(x, sel.w_hard);
        const auto xd = densify(x);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k; ++j) mismatches += s(i, j) != xd(i, sel.indices[j]);
        }
    }
    report(6, "gather equivalence", mismatches == 0, "50 instances, " + std::to_string(mismatches) + " mismatches");
}

std::string report_without_wall_clock(const std::filesystem::path& path) {
    std::istringstream in(test::read_file(path));
    std::string line;
    std::string kept;
    while (std::getline(in, line)) {
        if (line.find("\"wall_clock_seconds\"") == std::string::npos) kept += line + '\n';
    }
    return kept;
}

void criterion_determinism() {
    ExperimentConfig cfg;
    cfg.dataset = test::data_dir() / "toy";
    cfg.k = 4;
    cfg.hidden = 8;
    cfg.seed = 7;
    test::TempDir a("accept_a");
    test::TempDir b("accept_b");
    std::ostringstream sink;
    const int code_a = cli::cmd_run(cfg, a.path(), sink, sink);
    const int code_b = cli::cmd_run(cfg, b.path(), sink, sink);
    const auto ra = report_without_wall_clock(a.path() / "report.json");
    const auto rb = report_without_wall_clock(b.path() / "report.json");
    const bool pass = code_a == 0 && code_b == 0 && !ra.empty() && ra == rb;
    report(7, "determinism", pass,
           "seed 7 on toy, report.json " + std::string(ra == rb ? "identical" : "differs") + " (" +
               std::to_string(ra.size()) + " bytes without wall clock)");
}

void run_properties() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_simplex();
    criterion_annealing();
    criterion_gumbel_max();
    criterion_gradients();
    criterion_adjacency();
    criterion_gather();
    criterion_determinism();
    std::cout << "property suite " << fmt("%.1f", seconds_since(t0)) << " s" << std::endl;
}

// ------------------------------------------------------------- quantitative

const std::vector<std::uint64_t> kSeeds{1, 2, 3};

struct Series {
    std::vector<double> accuracy;
    double slowest = 0.0;
    double median() const { return cli::median(accuracy); }
};

std::string percent(double fraction) { return fmt("%.2f", 100.0 * fraction); }

std::string per_seed(const Series& s) {
    std::string out;
    for (std::size_t i = 0; i < s.accuracy.size(); ++i) {
        out += (i ? " " : "") + percent(s.accuracy[i]);
    }
    return out;
}

/// Nonincreasing within `slack` points and first minus last at least `gap` points.
bool trend_holds(const std::vector<double>& bands, double slack, double gap) {
    for (std::size_t i = 1; i < bands.size(); ++i) {
        if (100.0 * (bands[i] - bands[i - 1]) > slack) return false;
    }
    return 100.0 * (bands.front() - bands.back()) >= gap;
}

ExperimentConfig base_config(const std::filesystem::path& dir, Mode mode, std::size_t k, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.dataset = dir;
    cfg.mode = mode;
    cfg.k = k;
    cfg.seed = seed;
    return cfg;
}

Series run_single(const PreparedDataset& data, const std::filesystem::path& dir, Mode mode, std::size_t k) {
    Series s;
    for (auto seed : kSeeds) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = run_experiment(base_config(dir, mode, k, seed), data);
        s.slowest = std::max(s.slowest, seconds_since(t0));
        s.accuracy.push_back(r.headline_accuracy());
    }
    return s;
}

/// One stage-1 per seed shared by every band; band b of the result is bands[b].
std::vector<Series> run_family(const PreparedDataset& data, const std::filesystem::path& dir, std::size_t k, std::size_t epochs_stage2,
                               const std::vector<std::optional<Band>>& bands, double& slowest) {
    std::vector<Series> out(bands.size());
    for (auto seed : kSeeds) {
        auto cfg = base_config(dir, Mode::extract, k, seed);
        cfg.epochs_stage2 = epochs_stage2;
        const auto t0 = std::chrono::steady_clock::now();
        const auto reports = run_extraction_family(cfg, data, bands);
        slowest = std::max(slowest, seconds_since(t0));
        for (std::size_t b = 0; b < bands.size(); ++b) out[b].accuracy.push_back(reports[b].headline_accuracy());
    }
    return out;
}

std::string timing(double slowest, double budget) {
    return "slowest run " + fmt("%.0f", slowest) + " s of " + fmt("%.0f", budget) + " s";
}

void run_quantitative() {
    const auto cora_dir = test::data_dir() / "cora";
    const auto pubmed_dir = test::data_dir() / "pubmed";
    if (!test::have_dataset("cora")) {
        for (int id : {8, 9, 10, 11}) report(id, "cora", false, "dataset missing under " + cora_dir.string());
    } else {
        const auto cora = prepare_dataset(cora_dir);
        constexpr double budget = 300.0;

        const auto baseline = run_single(cora, cora_dir, Mode::baseline, 0);
        report(8, "baseline cora", baseline.median() >= 0.78 && baseline.slowest < budget,
               "median " + percent(baseline.median()) + " (" + per_seed(baseline) + "), need >= 78.00, " +
                   timing(baseline.slowest, budget));

        const auto select = run_single(cora, cora_dir, Mode::select, 225);
        const bool select_in = select.median() >= 0.62 && select.median() <= 0.74;
        report(9, "selection cora k=225", select_in && select.slowest < budget,
               "median " + percent(select.median()) + " (" + per_seed(select) + "), need [62.00, 74.00], " +
                   timing(select.slowest, budget));

        double slowest = 0.0;
        const auto family =
            run_family(cora, cora_dir, 225, 50, {std::nullopt, Band{1, 76}, Band{76, 151}, Band{151, 226}}, slowest);
        const double full = family[0].median();
        report(10, "extraction cora k=225", full >= 0.66 && full <= 0.80 && slowest < budget,
               "median " + percent(full) + " (" + per_seed(family[0]) + "), need [66.00, 80.00], " +
                   timing(slowest, budget));
        const std::vector<double> bands{family[1].median(), family[2].median(), family[3].median()};
        report(11, "ranking trend cora", trend_holds(bands, 3.0, 5.0),
               "band medians " + percent(bands[0]) + " / " + percent(bands[1]) + " / " + percent(bands[2]) +
                   ", need nonincreasing within 3 and first - last >= 5");
    }
    if (!test::have_dataset("pubmed")) {
        report(12, "pubmed", false, "dataset missing under " + pubmed_dir.string());
        return;
    }
    const auto pubmed = prepare_dataset(pubmed_dir);
    constexpr double budget = 1200.0;
    double slowest = 0.0;
    const auto family = run_family(pubmed, pubmed_dir, 105, 100, {Band{1, 36}, Band{36, 71}, Band{71, 106}}, slowest);
    const std::vector<double> bands{family[0].median(), family[1].median(), family[2].median()};
    report(12, "ranking trend pubmed", trend_holds(bands, 3.0, 5.0) && slowest < budget,
           "band medians " + percent(bands[0]) + " / " + percent(bands[1]) + " / " + percent(bands[2]) +
               ", need nonincreasing within 3 and first - last >= 5, " + timing(slowest, budget));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::string suite = "all";
    std::vector<int> known_red;
    app.add_option("suite", suite, "properties, quantitative or all")
        ->check(CLI::IsMember({"properties", "quantitative", "all"}));
    app.add_option("--known-red", known_red, "Criterion whose documented FAIL keeps exit code 0");
    CLI11_PARSE(app, argc, argv);

    try {
        if (suite != "quantitative") run_properties();
        if (suite != "properties") run_quantitative();
    } catch (const std::exception& e) {
        std::cout << "FAIL aborted: " << e.what() << std::endl;
        return 1;
    }

    const std::set<int> tolerated(known_red.begin(), known_red.end());
    int blocking = 0;
    for (const auto& o : g_outcomes) {
        if (o.pass && tolerated.count(o.id)) {
            std::cout << "note: criterion " << o.id << " listed as known red now passes" << std::endl;
        }
        if (!o.pass && !tolerated.count(o.id)) ++blocking;
    }
    std::size_t passed = 0;
    for (const auto& o : g_outcomes) passed += o.pass;
    std::cout << passed << " of " << g_outcomes.size() << " criteria pass" << std::endl;
    return blocking == 0 ? 0 : 1;
}
