#include "ggs/cli.hpp"

#include "ggs/config.hpp"
#include "ggs/error.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace ggs::cli {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("failed writing " + path.string());
}

std::string format_percent(double fraction) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << fraction * 100.0;
    return s.str();
}

std::string format_reference(double percent) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << percent;
    return s.str();
}

}  // namespace

int cmd_validate(const fs::path& dataset_dir, std::ostream& out, std::ostream& err) {
    try {
        const GraphDataset ds = load_dataset(dataset_dir);
        const SplitReport split = validate_split(ds);
        out << ds.num_nodes << " nodes, " << ds.edges.size() << " edges, " << ds.num_features << " features, "
            << ds.num_classes << " classes\n";
        if (ds.source_edge_records) out << "source edge records: " << *ds.source_edge_records << "\n";
        out << "split: train " << split.train << ", val " << split.val << ", test " << split.test << "\n";
        out << "train per class:";
        for (std::size_t c = 0; c < split.train_per_class.size(); ++c) out << ' ' << split.train_per_class[c];
        out << "\n";
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_run(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.dataset.empty()) throw ConfigError("no dataset given (--dataset or dataset= in --config)");
        const ExperimentReport report = run_experiment(cfg);
        fs::create_directories(out_dir);
        write_file(out_dir / "report.json", report_to_json(report).dump(2) + "\n");
        if (report.config.mode == Mode::extract) write_file(out_dir / "ranking.csv", ranking_csv(report));
        if (report.config.mode == Mode::select) write_file(out_dir / "selected.csv", selected_csv(report));
        out << "test_accuracy=" << report.headline_accuracy() << "\n";
        return 0;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

std::vector<ReproRow> repro_table(const std::string& table) {
    if (table == "t2") {
        return {
            {"cora", Mode::baseline, 0, 0, std::nullopt, "GCN (2016)", 81.50},
            {"citeseer", Mode::baseline, 0, 0, std::nullopt, "GCN (2016)", 70.30},
            {"pubmed", Mode::baseline, 0, 0, std::nullopt, "GCN (2016)", 79.00},
        };
    }
    if (table == "t3") {
        return {
            {"cora", Mode::select, 225, 0, std::nullopt, "225", 68.20},
            {"citeseer", Mode::select, 450, 0, std::nullopt, "450", 57.70},
            {"pubmed", Mode::select, 105, 0, std::nullopt, "105", 66.80},
        };
    }
    if (table == "t4") {
        // Row labels share endpoints ("50 - 100", "100 - 150"); the bands are disjoint [lo, hi).
        return {
            {"cora", Mode::extract, 225, 50, std::nullopt, "1 - 225", 73.80},
            {"cora", Mode::extract, 225, 50, Band{1, 51}, "1 - 50", 61.30},
            {"cora", Mode::extract, 225, 50, Band{51, 101}, "50 - 100", 54.80},
            {"cora", Mode::extract, 225, 50, Band{101, 151}, "100 - 150", 48.80},
            {"cora", Mode::extract, 225, 50, Band{1, 76}, "1 - 75", 66.10},
            {"cora", Mode::extract, 225, 50, Band{76, 151}, "75 - 150", 58.40},
            {"cora", Mode::extract, 225, 50, Band{151, 226}, "150 - 225", 54.40},
        };
    }
    if (table == "t5") {
        return {
            {"pubmed", Mode::extract, 105, 100, std::nullopt, "1 - 105", 71.10},
            {"pubmed", Mode::extract, 105, 100, Band{1, 36}, "1 - 35", 67.10},
            {"pubmed", Mode::extract, 105, 100, Band{36, 71}, "35 - 70", 60.00},
            {"pubmed", Mode::extract, 105, 100, Band{71, 106}, "70 - 105", 54.60},
        };
    }
    throw ConfigError("unknown table \"" + table + "\" (expected t2, t3, t4 or t5)");
}

std::size_t threads_from_env() {
    const char* value = std::getenv("GGS_THREADS");
    if (!value) return 1;
    const auto parsed = std::strtoull(value, nullptr, 10);
    return parsed == 0 ? 1 : static_cast<std::size_t>(parsed);
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<ReproResult> run_repro(const ReproRequest& request) {
    if (request.seeds.empty()) throw ConfigError("repro: seed list is empty");
    const auto rows = repro_table(request.table);

    std::vector<ReproResult> results;
    std::map<std::string, std::shared_ptr<const PreparedDataset>> datasets;
    for (const auto& row : rows) {
        const fs::path dir = request.data_root / row.dataset;
        if (!fs::exists(dir / "meta.json")) continue;
        if (!datasets.count(row.dataset)) {
            datasets[row.dataset] = std::make_shared<const PreparedDataset>(
                prepare_dataset(dir, request.base.adjacency, request.base.row_normalize));
        }
        results.push_back({row, std::vector<double>(request.seeds.size(), 0.0), 0.0});
    }
    if (results.empty()) {
        throw DataError(request.data_root.string(), 0, "no dataset for table " + request.table + " found");
    }

    // Rows of one (dataset, mode) family share their stage-1 training per seed.
    struct Task {
        std::vector<std::size_t> result_indices;
        std::size_t seed_index;
    };
    std::vector<Task> tasks;
    std::map<std::string, std::vector<std::size_t>> families;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& row = results[i].row;
        const std::string key = row.mode == Mode::extract ? row.dataset + "/extract" : std::to_string(i);
        families[key].push_back(i);
    }
    for (std::size_t s = 0; s < request.seeds.size(); ++s) {
        for (const auto& [key, indices] : families) tasks.push_back({indices, s});
    }

    auto run_task = [&](const Task& task) {
        const auto& first = results[task.result_indices.front()].row;
        const auto& data = *datasets.at(first.dataset);
        ExperimentConfig cfg = request.base;
        cfg.dataset = request.data_root / first.dataset;
        cfg.mode = first.mode;
        cfg.k = first.k;
        cfg.band.reset();
        if (first.epochs_stage2) cfg.epochs_stage2 = first.epochs_stage2;
        cfg.seed = request.seeds[task.seed_index];
        if (first.mode == Mode::extract) {
            std::vector<std::optional<Band>> bands;
            for (std::size_t i : task.result_indices) bands.push_back(results[i].row.band);
            const auto reports = run_extraction_family(cfg, data, bands);
            for (std::size_t b = 0; b < reports.size(); ++b) {
                results[task.result_indices[b]].accuracies[task.seed_index] = reports[b].headline_accuracy();
            }
        } else {
            const auto report = run_experiment(cfg, data);
            results[task.result_indices.front()].accuracies[task.seed_index] = report.headline_accuracy();
        }
    };

    const std::size_t workers =
        std::max<std::size_t>(1, std::min(request.threads ? request.threads : threads_from_env(), tasks.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            try {
                run_task(tasks[t]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    for (auto& r : results) r.median = median(r.accuracies);
    return results;
}

std::string repro_csv(const std::string& table, const std::vector<ReproResult>& results,
                      const std::vector<std::uint64_t>& seeds) {
    std::ostringstream out;
    out << "table,dataset,row,mode,k,band,epochs_stage2,paper_value,measured,per_seed\n";
    for (const auto& r : results) {
        out << table << ',' << r.row.dataset << ',' << r.row.label << ',' << to_string(r.row.mode) << ','
            << (r.row.k ? std::to_string(r.row.k) : std::string("all")) << ','
            << (r.row.band ? std::to_string(r.row.band->lo) + ":" + std::to_string(r.row.band->hi) : "full") << ','
            << (r.row.epochs_stage2 ? std::to_string(r.row.epochs_stage2) : std::string("default")) << ','
            << format_reference(r.row.paper_value) << ',' << format_percent(r.median) << ',';
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            if (s) out << ';';
            out << seeds[s] << ':' << format_percent(r.accuracies[s]);
        }
        out << '\n';
    }
    return out.str();
}

int cmd_repro(const ReproRequest& request, std::ostream& out, std::ostream& err) {
    try {
        const auto results = run_repro(request);
        const std::string csv = repro_csv(request.table, results, request.seeds);
        if (!request.out_csv.empty()) {
            if (request.out_csv.has_parent_path()) fs::create_directories(request.out_csv.parent_path());
            write_file(request.out_csv, csv);
        }
        out << csv;
        return 0;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gumbel-softmax feature selection and extraction for graph convolutional networks", "ggs"};
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate", "Load and check a dataset directory");
    std::string validate_dir;
    validate->add_option("dataset_dir", validate_dir, "Dataset directory")->required();

    auto* run = app.add_subcommand("run", "Run one experiment");
    std::string config_file;
    std::string out_dir = "out";
    std::map<std::string, std::string> overrides;
    run->add_option("--config", config_file, "key=value config file; flags override its values");
    run->add_option("--out", out_dir, "Output directory for report.json and CSV exports");
    auto add_override = [&](const std::string& flag, const std::string& key, const std::string& help) {
        run->add_option_function<std::string>(
            flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, help);
    };
    add_override("--dataset", "dataset", "Dataset directory");
    add_override("--mode", "mode", "select | extract | baseline");
    add_override("--k", "k", "Number of selector columns");
    add_override("--seed", "seed", "Random seed");
    add_override("--band", "band", "Rank band LO:HI (half-open, extract mode)");
    add_override("--hidden", "hidden", "Hidden width of the stage-1 network");
    add_override("--epochs-stage1", "epochs_stage1", "Stage-1 (and baseline) epochs");
    add_override("--epochs-stage2", "epochs_stage2", "Stage-2 epochs");
    add_override("--lr", "lr", "Adam learning rate");
    add_override("--weight-decay", "weight_decay", "L2 weight decay on W1/W2");
    add_override("--tau-start", "tau_start", "Initial temperature");
    add_override("--tau-end", "tau_end", "Final temperature");
    add_override("--adjacency", "adjacency", "renormalized | raw");
    add_override("--row-normalize", "row_normalize", "true | false");
    add_override("--wide-stage2", "wide_stage2", "true | false");
    add_override("--extract-tau", "extract_tau", "Extraction and ranking temperature (0 = tau_end)");

    auto* repro = app.add_subcommand("repro", "Reproduce a results table across seeds");
    std::string table;
    std::string data_root;
    std::string seeds_text = "1,2,3";
    std::string repro_out;
    std::size_t threads = 0;
    std::map<std::string, std::string> repro_overrides;
    repro->add_option("table", table, "t2 | t3 | t4 | t5")->required();
    repro->add_option("--data", data_root, "Directory holding cora/, citeseer/, pubmed/")->required();
    repro->add_option("--seeds", seeds_text, "Comma-separated seeds");
    repro->add_option("--out", repro_out, "Merged CSV path");
    repro->add_option("--threads", threads, "Worker threads (default: GGS_THREADS or 1)");
    repro->add_option_function<std::string>(
        "--epochs-stage1", [&](const std::string& v) { repro_overrides["epochs_stage1"] = v; },
        "Override stage-1 epochs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    if (validate->parsed()) return cmd_validate(validate_dir, out, err);

    if (run->parsed()) {
        ExperimentConfig cfg;
        try {
            if (!config_file.empty()) apply_config_file(cfg, config_file);
            for (const auto& [key, value] : overrides) apply_setting(cfg, key, value);
            validate_config(cfg);
        } catch (const ConfigError& e) {
            err << "usage error: " << e.what() << "\n";
            return 2;
        }
        return cmd_run(cfg, out_dir, out, err);
    }

    ReproRequest request;
    request.table = table;
    request.data_root = data_root;
    request.out_csv = repro_out.empty() ? fs::path("repro_" + table + ".csv") : fs::path(repro_out);
    request.threads = threads;
    try {
        for (const auto& [key, value] : repro_overrides) apply_setting(request.base, key, value);
        std::stringstream ss(seeds_text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            ExperimentConfig scratch;
            apply_setting(scratch, "seed", item);
            request.seeds.push_back(scratch.seed);
        }
        if (request.seeds.empty()) throw ConfigError("--seeds must list at least one seed");
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }
    return cmd_repro(request, out, err);
}

}  // namespace ggs::cli
