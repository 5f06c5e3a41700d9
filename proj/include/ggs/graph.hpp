#pragma once

#include "ggs/linalg.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ggs {

using NodeId = std::size_t;

struct Split {
    std::vector<NodeId> train;
    std::vector<NodeId> val;
    std::vector<NodeId> test;
};

/// A citation-network dataset: undirected graph, sparse node features, labels
/// and a train/val/test split.
struct GraphDataset {
    std::string name;
    std::size_t num_nodes = 0;
    std::size_t num_features = 0;
    std::size_t num_classes = 0;
    /// Distinct undirected edges, u < v, sorted.
    std::vector<std::pair<NodeId, NodeId>> edges;
    SparseMatrixCSR features;
    std::vector<std::size_t> labels;
    Split split;
    /// Raw citation-record count of the source distribution, when meta.json declares it.
    std::optional<std::size_t> source_edge_records;
};

struct SplitReport {
    std::vector<std::size_t> train_per_class;
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t test = 0;
    bool disjoint = false;
};

enum class AdjacencyMode {
    /// D^(-1/2) (A + I) D^(-1/2)
    renormalized,
    /// A + I, unnormalized (ablation)
    raw,
};

struct NormalizedAdjacency {
    SparseMatrixCSR a_hat;
};

struct LoadOptions {
    /// Scale each feature row to unit L1 norm.
    bool row_normalize = false;
};

/// Reads meta.json, edges.csv, features.csv, labels.csv and split.json from
/// `dir`. Every violation raises DataError naming the file and line.
GraphDataset load_dataset(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Writes the canonical form of `ds` into `dir` (created if missing).
void save_dataset(const GraphDataset& ds, const std::filesystem::path& dir);

/// Checks the structural invariants of an in-memory dataset.
void validate_dataset(const GraphDataset& ds);

SplitReport validate_split(const GraphDataset& ds);

NormalizedAdjacency normalize_adjacency(const GraphDataset& ds, AdjacencyMode mode = AdjacencyMode::renormalized);

/// Builds a dataset from an edge list, collapsing duplicates and orienting u < v.
/// Self-loops are rejected. Features default to an empty n x 0 matrix.
GraphDataset make_graph(std::size_t num_nodes, const std::vector<std::pair<NodeId, NodeId>>& edges);

}  // namespace ggs
