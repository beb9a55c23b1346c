#include "hamreg/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace hamreg::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    while (true) {
        const auto pos = s.find(sep);
        out.push_back(trim(s.substr(0, pos)));
        if (pos == std::string_view::npos) break;
        s.remove_prefix(pos + 1);
    }
    return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError("invalid value '" + std::string(text) + "' for " + std::string(key));
    }
    return value;
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view value) {
    std::filesystem::path p{std::string(value)};
    if (p.is_relative() && !base.empty()) p = base / p;
    return p.lexically_normal();
}

}  // namespace

nn::LRSchedule parse_schedule(std::string_view text, long epochs) {
    text = trim(text);
    if (text == "standard") return nn::LRSchedule::standard();
    if (text == "scaled") return nn::LRSchedule::scaled(epochs);
    std::vector<long> boundaries;
    std::vector<double> rates;
    for (std::string_view item : split_list(text, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) throw ConfigError("lr_schedule entries look like epoch:rate");
        boundaries.push_back(parse_number<long>("lr_schedule", trim(item.substr(0, colon))));
        rates.push_back(parse_number<double>("lr_schedule", trim(item.substr(colon + 1))));
    }
    return nn::LRSchedule(std::move(boundaries), std::move(rates));
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value, const std::filesystem::path& base_dir) {
    value = trim(value);
    if (key == "system") {
        cfg.system = physics::parse_system(value);
    } else if (key == "split") {
        cfg.split = training::parse_split(value);
    } else if (key == "family") {
        cfg.family = models::parse_family(value);
    } else if (key == "coords") {
        cfg.coords = models::parse_coords(value);
    } else if (key == "layer_sizes") {
        cfg.layer_sizes.clear();
        for (std::string_view item : split_list(value, ',')) cfg.layer_sizes.push_back(parse_number<int>(key, item));
    } else if (key == "epochs") {
        cfg.epochs = parse_number<long>(key, value);
    } else if (key == "lr_schedule") {
        cfg.lr_schedule = std::string(value);
    } else if (key == "lambda_h") {
        if (value == "none") {
            cfg.lambda_h.reset();
        } else {
            cfg.lambda_h = parse_number<double>(key, value);
        }
    } else if (key == "seed") {
        cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "out_dir") {
        cfg.out_dir = resolve(base_dir, value);
    } else if (key == "dataset") {
        cfg.dataset = resolve(base_dir, value);
    } else if (key == "lambda_grid") {
        cfg.lambda_grid.clear();
        for (std::string_view item : split_list(value, ',')) cfg.lambda_grid.push_back(parse_number<double>(key, item));
    } else if (key == "history_stride") {
        cfg.history_stride = parse_number<long>(key, value);
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    std::set<std::string, std::less<>> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string_view key = trim(line.substr(0, eq));
        if (!seen.emplace(key).second) {
            throw ConfigError("line " + std::to_string(line_no) + ": key '" + std::string(key) + "' repeated");
        }
        try {
            apply_setting(cfg, key, line.substr(eq + 1), base_dir);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

nn::LRSchedule RunConfig::schedule() const { return parse_schedule(lr_schedule, epochs); }

training::TrainConfig RunConfig::train_config() const {
    training::TrainConfig tc;
    tc.family = family;
    tc.layer_sizes = layer_sizes;
    tc.epochs = epochs;
    tc.schedule = schedule();
    tc.lambda_h = lambda_h;
    tc.seed = seed;
    tc.history_stride = history_stride;
    return tc;
}

void RunConfig::validate() const {
    if (resolved_coords() != models::native_coords(family)) {
        throw ConfigError(models::to_string(family) + " models need " +
                          models::to_string(models::native_coords(family)) + " coordinates");
    }
    if (!layer_sizes.empty()) {
        const int n = models::state_dim(system, resolved_coords());
        const int out = family == models::Family::Baseline ? n : 1;
        if (layer_sizes.size() < 2 || layer_sizes.front() != n || layer_sizes.back() != out) {
            throw ConfigError("layer_sizes must run from " + std::to_string(n) + " inputs to " + std::to_string(out) +
                              " outputs");
        }
    }
    (void)schedule();
    train_config().validate();
}

}  // namespace hamreg::cli
