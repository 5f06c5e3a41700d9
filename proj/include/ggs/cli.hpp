#pragma once

#include "ggs/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ggs::cli {

int cmd_validate(const std::filesystem::path& dataset_dir, std::ostream& out, std::ostream& err);

/// Runs one experiment and writes report.json plus ranking.csv (extract) or
/// selected.csv (select) into `out_dir`. Prints "test_accuracy=<value>".
int cmd_run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

/// One row of a reproduction table.
struct ReproRow {
    std::string dataset;
    Mode mode;
    std::size_t k = 0;
    std::size_t epochs_stage2 = 0;
    std::optional<Band> band;
    /// Row label of the reference table, e.g. "1 - 75".
    std::string label;
    /// Reference accuracy in percent, written to the paper_value column.
    double paper_value = 0.0;
};

/// Rows of table t2 (baselines), t3 (selection), t4 (Cora ranking bands) or
/// t5 (Pubmed ranking bands). Unknown names raise ConfigError.
std::vector<ReproRow> repro_table(const std::string& table);

struct ReproRequest {
    std::string table;
    std::filesystem::path data_root;
    std::vector<std::uint64_t> seeds;
    std::filesystem::path out_csv;
    /// Worker threads; 0 reads GGS_THREADS (default 1).
    std::size_t threads = 0;
    /// Applied to every run before the row settings (e.g. epoch overrides).
    ExperimentConfig base;
};

struct ReproResult {
    ReproRow row;
    std::vector<double> accuracies;  // one per seed, fractions in [0, 1]
    double median = 0.0;
};

/// Runs every row whose dataset exists under data_root across all seeds.
std::vector<ReproResult> run_repro(const ReproRequest& request);

/// Writes the merged CSV: table,dataset,row,mode,k,band,epochs_stage2,paper_value,measured,per_seed.
std::string repro_csv(const std::string& table, const std::vector<ReproResult>& results,
                      const std::vector<std::uint64_t>& seeds);

int cmd_repro(const ReproRequest& request, std::ostream& out, std::ostream& err);

/// Worker count from GGS_THREADS, at least 1.
std::size_t threads_from_env();

double median(std::vector<double> values);

/// Full command-line entry point: `ggs validate|run|repro ...`.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ggs::cli
