#include "ggs/config.hpp"

#include "ggs/error.hpp"
#include "text_io.hpp"

#include <fstream>
#include <sstream>

namespace ggs {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::size_t to_count(std::string_view key, std::string_view value) {
    const auto v = detail::parse_unsigned(value);
    if (!v) throw ConfigError("config: " + std::string(key) + " expects a non-negative integer, got \"" +
                              std::string(value) + "\"");
    return *v;
}

double to_real(std::string_view key, std::string_view value) {
    const auto v = detail::parse_double(value);
    if (!v) throw ConfigError("config: " + std::string(key) + " expects a number, got \"" + std::string(value) + "\"");
    return *v;
}

bool to_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config: " + std::string(key) + " expects true or false, got \"" + std::string(value) + "\"");
}

}  // namespace

Band parse_band(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw ConfigError("band must be LO:HI, got \"" + std::string(text) + "\"");
    const auto lo = detail::parse_unsigned(trim(text.substr(0, colon)));
    const auto hi = detail::parse_unsigned(trim(text.substr(colon + 1)));
    if (!lo || !hi) throw ConfigError("band must be LO:HI with integer bounds, got \"" + std::string(text) + "\"");
    if (*lo < 1 || *lo >= *hi) throw ConfigError("band requires 1 <= LO < HI, got \"" + std::string(text) + "\"");
    return {*lo, *hi};
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
    if (key == "dataset") {
        cfg.dataset = std::string(value);
    } else if (key == "mode") {
        cfg.mode = parse_mode(std::string(value));
    } else if (key == "k") {
        cfg.k = to_count(key, value);
    } else if (key == "hidden") {
        cfg.hidden = to_count(key, value);
    } else if (key == "epochs_stage1") {
        cfg.epochs_stage1 = to_count(key, value);
    } else if (key == "epochs_stage2") {
        cfg.epochs_stage2 = to_count(key, value);
    } else if (key == "lr") {
        cfg.lr = to_real(key, value);
    } else if (key == "weight_decay") {
        cfg.weight_decay = to_real(key, value);
    } else if (key == "tau_start") {
        cfg.tau_start = to_real(key, value);
    } else if (key == "tau_end") {
        cfg.tau_end = to_real(key, value);
    } else if (key == "seed") {
        const auto v = detail::parse_unsigned(value);
        if (!v) throw ConfigError("config: seed expects a non-negative integer, got \"" + std::string(value) + "\"");
        cfg.seed = *v;
    } else if (key == "band") {
        if (value == "none" || value.empty()) {
            cfg.band.reset();
        } else {
            cfg.band = parse_band(value);
        }
    } else if (key == "adjacency") {
        if (value == "renormalized") {
            cfg.adjacency = AdjacencyMode::renormalized;
        } else if (value == "raw") {
            cfg.adjacency = AdjacencyMode::raw;
        } else {
            throw ConfigError("config: adjacency expects renormalized or raw, got \"" + std::string(value) + "\"");
        }
    } else if (key == "row_normalize") {
        cfg.row_normalize = to_bool(key, value);
    } else if (key == "extract_tau") {
        cfg.extract_tau = to_real(key, value);
    } else if (key == "wide_stage2") {
        cfg.wide_stage2 = to_bool(key, value);
    } else {
        throw ConfigError("config: unknown key \"" + std::string(key) + "\"");
    }
}

void apply_config_text(ExperimentConfig& cfg, std::string_view text, std::string_view source) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": expected key=value");
        }
        try {
            apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot read config file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    apply_config_text(cfg, buffer.str(), path.string());
}

std::vector<std::pair<std::string, std::string>> config_pairs(const ExperimentConfig& cfg) {
    return {
        {"dataset", cfg.dataset.string()},
        {"mode", to_string(cfg.mode)},
        {"k", std::to_string(cfg.k)},
        {"hidden", std::to_string(cfg.hidden)},
        {"epochs_stage1", std::to_string(cfg.epochs_stage1)},
        {"epochs_stage2", std::to_string(cfg.epochs_stage2)},
        {"lr", detail::format_double(cfg.lr)},
        {"weight_decay", detail::format_double(cfg.weight_decay)},
        {"tau_start", detail::format_double(cfg.tau_start)},
        {"tau_end", detail::format_double(cfg.tau_end)},
        {"seed", std::to_string(cfg.seed)},
        {"band", cfg.band ? std::to_string(cfg.band->lo) + ":" + std::to_string(cfg.band->hi) : "none"},
        {"adjacency", cfg.adjacency == AdjacencyMode::renormalized ? "renormalized" : "raw"},
        {"row_normalize", cfg.row_normalize ? "true" : "false"},
        {"extract_tau", detail::format_double(cfg.extract_tau)},
        {"wide_stage2", cfg.wide_stage2 ? "true" : "false"},
    };
}

std::string config_to_text(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& [key, value] : config_pairs(cfg)) out += key + "=" + value + "\n";
    return out;
}

}  // namespace ggs
