#include "ggs/graph.hpp"

#include "ggs/error.hpp"
#include "text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace ggs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path.string(), 0, "missing or unreadable file");
    return in;
}

json read_json(const fs::path& path) {
    auto in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path.string(), 0, std::string("invalid JSON: ") + e.what());
    }
}

std::size_t json_count(const json& meta, const char* key, const fs::path& path) {
    if (!meta.contains(key) || !meta[key].is_number_unsigned()) {
        throw DataError(path.string(), 0, std::string("missing or non-integer field \"") + key + "\"");
    }
    return meta[key].get<std::size_t>();
}

std::vector<NodeId> json_ids(const json& split, const char* key, const fs::path& path) {
    if (!split.contains(key) || !split[key].is_array()) {
        throw DataError(path.string(), 0, std::string("missing array \"") + key + "\"");
    }
    std::vector<NodeId> out;
    out.reserve(split[key].size());
    for (const auto& v : split[key]) {
        if (!v.is_number_unsigned()) {
            throw DataError(path.string(), 0, std::string("non-integer id in \"") + key + "\"");
        }
        out.push_back(v.get<NodeId>());
    }
    return out;
}

// Reads every nonempty line of a headerless CSV with a fixed field count.
template <typename OnRow>
void for_each_row(const fs::path& path, std::size_t fields, OnRow&& on_row) {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string_view> parts;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        detail::split_csv(line, parts);
        if (parts.size() != fields) {
            throw DataError(path.string(), line_no,
                            "expected " + std::to_string(fields) + " fields, found " + std::to_string(parts.size()));
        }
        on_row(parts, line_no);
    }
}

std::size_t parse_index(std::string_view s, const fs::path& path, std::size_t line_no) {
    auto v = detail::parse_unsigned(s);
    if (!v) throw DataError(path.string(), line_no, "malformed integer \"" + std::string(s) + "\"");
    return *v;
}

}  // namespace

GraphDataset load_dataset(const fs::path& dir, const LoadOptions& options) {
    GraphDataset ds;

    const auto meta_path = dir / "meta.json";
    const json meta = read_json(meta_path);
    if (!meta.contains("name") || !meta["name"].is_string()) {
        throw DataError(meta_path.string(), 0, "missing string field \"name\"");
    }
    ds.name = meta["name"].get<std::string>();
    ds.num_nodes = json_count(meta, "num_nodes", meta_path);
    ds.num_features = json_count(meta, "num_features", meta_path);
    ds.num_classes = json_count(meta, "num_classes", meta_path);
    if (meta.contains("source_edge_records")) ds.source_edge_records = json_count(meta, "source_edge_records", meta_path);
    const std::size_t n = ds.num_nodes;

    const auto edges_path = dir / "edges.csv";
    std::set<std::pair<NodeId, NodeId>> edge_set;
    for_each_row(edges_path, 2, [&](const auto& parts, std::size_t line_no) {
        const NodeId u = parse_index(parts[0], edges_path, line_no);
        const NodeId v = parse_index(parts[1], edges_path, line_no);
        if (u >= n || v >= n) {
            throw DataError(edges_path.string(), line_no,
                            "node index out of range (num_nodes=" + std::to_string(n) + ")");
        }
        if (u == v) throw DataError(edges_path.string(), line_no, "self-loop in input");
        if (u > v) throw DataError(edges_path.string(), line_no, "edge not oriented u < v");
        edge_set.emplace(u, v);
    });
    ds.edges.assign(edge_set.begin(), edge_set.end());

    const auto features_path = dir / "features.csv";
    std::vector<SparseMatrixCSR::Triplet> triplets;
    std::pair<std::size_t, std::size_t> previous{0, 0};
    bool first = true;
    for_each_row(features_path, 3, [&](const auto& parts, std::size_t line_no) {
        const std::size_t node = parse_index(parts[0], features_path, line_no);
        const std::size_t feature = parse_index(parts[1], features_path, line_no);
        const auto value = detail::parse_double(parts[2]);
        if (!value || !std::isfinite(*value)) {
            throw DataError(features_path.string(), line_no, "malformed value \"" + std::string(parts[2]) + "\"");
        }
        if (node >= n) throw DataError(features_path.string(), line_no, "node index out of range");
        if (feature >= ds.num_features) throw DataError(features_path.string(), line_no, "feature index out of range");
        const std::pair<std::size_t, std::size_t> key{node, feature};
        if (!first && key <= previous) {
            throw DataError(features_path.string(), line_no, "triplets not sorted by (node, feature) or duplicated");
        }
        previous = key;
        first = false;
        triplets.push_back({node, feature, *value});
    });
    if (options.row_normalize) {
        std::vector<double> row_sum(n, 0.0);
        for (const auto& t : triplets) row_sum[t.row] += std::abs(t.value);
        for (auto& t : triplets) {
            if (row_sum[t.row] > 0.0) t.value /= row_sum[t.row];
        }
    }
    ds.features = SparseMatrixCSR::from_triplets(n, ds.num_features, std::move(triplets));

    const auto labels_path = dir / "labels.csv";
    constexpr std::size_t unset = static_cast<std::size_t>(-1);
    ds.labels.assign(n, unset);
    for_each_row(labels_path, 2, [&](const auto& parts, std::size_t line_no) {
        const std::size_t node = parse_index(parts[0], labels_path, line_no);
        const std::size_t label = parse_index(parts[1], labels_path, line_no);
        if (node >= n) throw DataError(labels_path.string(), line_no, "node index out of range");
        if (label >= ds.num_classes) {
            throw DataError(labels_path.string(), line_no,
                            "label " + std::to_string(label) + " outside [0, " + std::to_string(ds.num_classes) + ")");
        }
        if (ds.labels[node] != unset) {
            throw DataError(labels_path.string(), line_no, "node " + std::to_string(node) + " labeled twice");
        }
        ds.labels[node] = label;
    });
    for (std::size_t i = 0; i < n; ++i) {
        if (ds.labels[i] == unset) {
            throw DataError(labels_path.string(), 0, "node " + std::to_string(i) + " has no label");
        }
    }

    const auto split_path = dir / "split.json";
    const json split = read_json(split_path);
    ds.split.train = json_ids(split, "train", split_path);
    ds.split.val = json_ids(split, "val", split_path);
    ds.split.test = json_ids(split, "test", split_path);
    try {
        validate_split(ds);
    } catch (const DataError& e) {
        throw DataError(split_path.string(), 0, e.what());
    }
    return ds;
}

void save_dataset(const GraphDataset& ds, const fs::path& dir) {
    validate_dataset(ds);
    fs::create_directories(dir);

    json meta{{"name", ds.name},
              {"num_nodes", ds.num_nodes},
              {"num_features", ds.num_features},
              {"num_classes", ds.num_classes}};
    if (ds.source_edge_records) meta["source_edge_records"] = *ds.source_edge_records;
    std::ofstream(dir / "meta.json", std::ios::binary) << meta.dump(2) << '\n';

    {
        std::ofstream out(dir / "edges.csv", std::ios::binary);
        for (const auto& [u, v] : ds.edges) out << u << ',' << v << '\n';
    }
    {
        std::ofstream out(dir / "features.csv", std::ios::binary);
        const auto& x = ds.features;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            for (std::size_t p = x.row_ptr()[i]; p < x.row_ptr()[i + 1]; ++p) {
                out << i << ',' << x.col_idx()[p] << ',' << detail::format_double(x.values()[p]) << '\n';
            }
        }
    }
    {
        std::ofstream out(dir / "labels.csv", std::ios::binary);
        for (std::size_t i = 0; i < ds.labels.size(); ++i) out << i << ',' << ds.labels[i] << '\n';
    }
    json split{{"train", ds.split.train}, {"val", ds.split.val}, {"test", ds.split.test}};
    std::ofstream(dir / "split.json", std::ios::binary) << split.dump() << '\n';
}

void validate_dataset(const GraphDataset& ds) {
    const std::size_t n = ds.num_nodes;
    for (std::size_t e = 0; e < ds.edges.size(); ++e) {
        const auto [u, v] = ds.edges[e];
        if (u >= n || v >= n) throw DataError("edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range");
        if (u >= v) throw DataError("edge (" + std::to_string(u) + "," + std::to_string(v) + ") is not u < v");
        if (e > 0 && ds.edges[e - 1] >= ds.edges[e]) throw DataError("edges not sorted or duplicated");
    }
    if (ds.features.rows() != n || ds.features.cols() != ds.num_features) {
        throw DataError("feature matrix is " + ds.features.shape_string() + ", expected " + std::to_string(n) + "x" +
                        std::to_string(ds.num_features));
    }
    if (ds.labels.size() != n) throw DataError("labels length does not match num_nodes");
    for (std::size_t i = 0; i < n; ++i) {
        if (ds.labels[i] >= ds.num_classes) throw DataError("label of node " + std::to_string(i) + " out of range");
    }
    validate_split(ds);
}

SplitReport validate_split(const GraphDataset& ds) {
    const std::size_t n = ds.num_nodes;
    std::vector<int> owner(n, -1);
    const std::pair<const char*, const std::vector<NodeId>*> parts[] = {
        {"train", &ds.split.train}, {"val", &ds.split.val}, {"test", &ds.split.test}};
    for (int p = 0; p < 3; ++p) {
        const auto& [name, ids] = parts[p];
        if (ids->empty()) throw DataError(std::string("split: ") + name + " list is empty");
        for (NodeId id : *ids) {
            if (id >= n) {
                throw DataError(std::string("split: ") + name + " node " + std::to_string(id) + " out of range");
            }
            if (owner[id] != -1) {
                throw DataError("split: node " + std::to_string(id) + " appears in both " + parts[owner[id]].first +
                                " and " + name);
            }
            owner[id] = p;
        }
    }
    SplitReport report;
    report.train_per_class.assign(ds.num_classes, 0);
    for (NodeId id : ds.split.train) {
        if (ds.labels.size() == n && ds.labels[id] < ds.num_classes) ++report.train_per_class[ds.labels[id]];
    }
    report.train = ds.split.train.size();
    report.val = ds.split.val.size();
    report.test = ds.split.test.size();
    report.disjoint = true;
    return report;
}

NormalizedAdjacency normalize_adjacency(const GraphDataset& ds, AdjacencyMode mode) {
    const std::size_t n = ds.num_nodes;
    std::vector<std::vector<NodeId>> neighbors(n);
    for (NodeId i = 0; i < n; ++i) neighbors[i].push_back(i);
    for (const auto& [u, v] : ds.edges) {
        neighbors[u].push_back(v);
        neighbors[v].push_back(u);
    }
    std::vector<double> inv_sqrt_degree(n);
    for (NodeId i = 0; i < n; ++i) {
        auto& nb = neighbors[i];
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        inv_sqrt_degree[i] = 1.0 / std::sqrt(static_cast<double>(nb.size()));
    }

    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    row_ptr.reserve(n + 1);
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j : neighbors[i]) {
            col_idx.push_back(j);
            const double a = inv_sqrt_degree[i] * inv_sqrt_degree[j];
            values.push_back(mode == AdjacencyMode::renormalized ? a : 1.0);
        }
        row_ptr.push_back(col_idx.size());
    }
    return {SparseMatrixCSR(n, n, std::move(row_ptr), std::move(col_idx), std::move(values))};
}

GraphDataset make_graph(std::size_t num_nodes, const std::vector<std::pair<NodeId, NodeId>>& edges) {
    GraphDataset ds;
    ds.name = "graph";
    ds.num_nodes = num_nodes;
    std::set<std::pair<NodeId, NodeId>> unique;
    for (auto [u, v] : edges) {
        if (u >= num_nodes || v >= num_nodes) throw DataError("make_graph: edge endpoint out of range");
        if (u == v) throw DataError("make_graph: self-loop in input");
        unique.emplace(std::min(u, v), std::max(u, v));
    }
    ds.edges.assign(unique.begin(), unique.end());
    ds.features = SparseMatrixCSR(num_nodes, 0, std::vector<std::size_t>(num_nodes + 1, 0), {}, {});
    ds.labels.assign(num_nodes, 0);
    ds.num_classes = 1;
    return ds;
}

}  // namespace ggs
