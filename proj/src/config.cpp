#include "fcdnet/config.hpp"

#include "fcdnet/errors.hpp"

#include <charconv>
#include <functional>
#include <sstream>

namespace fcdnet {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": '" + v + "' is not a number");
    return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError(key + ": '" + v + "' is not a nonnegative integer");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": '" + v + "' is not true or false");
}

std::vector<std::string> split_list(const std::string& v, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

std::string join_sizes(const std::vector<std::size_t>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
    return s;
}

std::string join_doubles(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + data::format_number(xs[i]);
    return s;
}

struct Entry {
    std::string section;
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class Field>
Entry size_entry(std::string section, std::string key, Field field) {
    const std::string name = section + "." + key;
    return {section, key, [=](RunConfig& c, const std::string& v) { field(c) = to_uint(name, v); },
            [=](const RunConfig& c) { return std::to_string(field(c)); }};
}

template <class Field>
Entry real_entry(std::string section, std::string key, Field field) {
    const std::string name = section + "." + key;
    return {section, key, [=](RunConfig& c, const std::string& v) { field(c) = to_double(name, v); },
            [=](const RunConfig& c) { return data::format_number(field(c)); }};
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = [] {
        std::vector<Entry> t;
        t.push_back({"data", "path", [](RunConfig& c, const std::string& v) { c.data.path = v; },
                     [](const RunConfig& c) { return c.data.path; }});
        t.push_back({"data", "sample_rate", [](RunConfig& c, const std::string& v) { c.data.sample_rate = v; },
                     [](const RunConfig& c) { return c.data.sample_rate; }});
        t.push_back({"data", "split",
                     [](RunConfig& c, const std::string& v) {
                         const auto parts = split_list(v, ':');
                         if (parts.size() != 3) throw ConfigError("data.split: expected train:val:test, got '" + v + "'");
                         const double a = to_double("data.split", parts[0]), b = to_double("data.split", parts[1]),
                                      d = to_double("data.split", parts[2]);
                         const double total = a + b + d;
                         if (!(total > 0)) throw ConfigError("data.split: parts must have a positive sum");
                         c.data.split = {a / total, b / total, d / total};
                         c.data.split.validate();
                     },
                     [](const RunConfig& c) {
                         return data::format_number(c.data.split.train) + ":" + data::format_number(c.data.split.val) +
                                ":" + data::format_number(c.data.split.test);
                     }});
        t.push_back(size_entry("data", "input_length", [](auto& c) -> auto& { return c.model.input_length; }));
        t.push_back(size_entry("data", "horizon", [](auto& c) -> auto& { return c.model.horizon; }));

        t.push_back(size_entry("model", "period", [](auto& c) -> auto& { return c.model.ltfe.period; }));
        t.push_back(size_entry("model", "levels", [](auto& c) -> auto& { return c.model.ltfe.levels; }));
        t.push_back({"model", "wavelet",
                     [](RunConfig& c, const std::string& v) {
                         if (v.size() < 3 || v.substr(0, 2) != "db") throw ConfigError("model.wavelet: expected dbN, got '" + v + "'");
                         c.model.ltfe.wavelet_order = static_cast<int>(to_uint("model.wavelet", v.substr(2)));
                     },
                     [](const RunConfig& c) { return "db" + std::to_string(c.model.ltfe.wavelet_order); }});
        t.push_back({"model", "gates",
                     [](RunConfig& c, const std::string& v) {
                         c.model.ltfe.gates.clear();
                         if (v == "default" || v.empty()) return;
                         for (const auto& g : split_list(v, ',')) c.model.ltfe.gates.push_back(to_double("model.gates", g));
                     },
                     [](const RunConfig& c) {
                         return c.model.ltfe.gates.empty() ? std::string("default") : join_doubles(c.model.ltfe.gates);
                     }});
        t.push_back(size_entry("model", "ltfe_channels", [](auto& c) -> auto& { return c.model.ltfe.conv_channels; }));
        t.push_back(size_entry("model", "ltfe_hidden", [](auto& c) -> auto& { return c.model.ltfe.hidden; }));
        t.push_back({"model", "compact_storage",
                     [](RunConfig& c, const std::string& v) { c.model.ltfe.compact_storage = to_bool("model.compact_storage", v); },
                     [](const RunConfig& c) { return std::string(c.model.ltfe.compact_storage ? "true" : "false"); }});
        t.push_back(size_entry("model", "stfe_width", [](auto& c) -> auto& { return c.model.stfe_width; }));
        t.push_back(size_entry("model", "fagru_hidden", [](auto& c) -> auto& { return c.model.fagru_hidden; }));
        t.push_back(size_entry("model", "fagru_order", [](auto& c) -> auto& { return c.model.fagru_order; }));
        t.push_back(size_entry("model", "fagwn_channels", [](auto& c) -> auto& { return c.model.fagwn_channels; }));
        t.push_back(size_entry("model", "fagwn_head", [](auto& c) -> auto& { return c.model.fagwn_head; }));
        t.push_back(size_entry("model", "fagwn_order", [](auto& c) -> auto& { return c.model.fagwn_order; }));
        t.push_back({"model", "dilations",
                     [](RunConfig& c, const std::string& v) {
                         c.model.dilations.clear();
                         for (const auto& d : split_list(v, ',')) c.model.dilations.push_back(to_uint("model.dilations", d));
                     },
                     [](const RunConfig& c) { return join_sizes(c.model.dilations); }});
        t.push_back(real_entry("model", "epsilon", [](auto& c) -> auto& { return c.model.epsilon; }));
        t.push_back(real_entry("model", "beta", [](auto& c) -> auto& { return c.model.beta_init; }));
        t.push_back(real_entry("model", "gamma", [](auto& c) -> auto& { return c.model.gamma_init; }));
        t.push_back(real_entry("model", "eta", [](auto& c) -> auto& { return c.model.eta_init; }));
        t.push_back(real_entry("model", "chi_tau", [](auto& c) -> auto& { return c.model.chi_tau; }));
        t.push_back({"model", "ablation",
                     [](RunConfig& c, const std::string& v) { c.model.ablation = parse_ablation(v); },
                     [](const RunConfig& c) { return to_string(c.model.ablation); }});
        t.push_back(size_entry("model", "rank", [](auto& c) -> auto& { return c.model.rank; }));

        t.push_back(real_entry("train", "lr0", [](auto& c) -> auto& { return c.train.lr0; }));
        t.push_back(real_entry("train", "decay", [](auto& c) -> auto& { return c.train.decay; }));
        t.push_back(size_entry("train", "decay_every", [](auto& c) -> auto& { return c.train.decay_every; }));
        t.push_back(real_entry("train", "lr_min", [](auto& c) -> auto& { return c.train.lr_min; }));
        t.push_back(size_entry("train", "epochs", [](auto& c) -> auto& { return c.train.epochs; }));
        t.push_back(size_entry("train", "batch_size", [](auto& c) -> auto& { return c.model.batch_size; }));
        t.push_back(real_entry("train", "clip_norm", [](auto& c) -> auto& { return c.train.clip_norm; }));
        t.push_back({"train", "shuffle",
                     [](RunConfig& c, const std::string& v) { c.train.shuffle = to_bool("train.shuffle", v); },
                     [](const RunConfig& c) { return std::string(c.train.shuffle ? "true" : "false"); }});
        // One seed drives both the initial weights and the batch order.
        t.push_back({"train", "seed",
                     [](RunConfig& c, const std::string& v) { c.train.seed = c.model.seed = to_uint("train.seed", v); },
                     [](const RunConfig& c) { return std::to_string(c.train.seed); }});
        return t;
    }();
    return table;
}

const Entry& find_entry(const std::string& section, const std::string& key) {
    for (const Entry& e : entries()) {
        if (e.section == section && e.key == key) return e;
    }
    throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
}

} // namespace

data::FormatDescriptor RunConfig::format() const {
    data::FormatDescriptor f;
    f.sample_rate = data.sample_rate;
    f.split = data.split;
    f.input_length = model.input_length;
    f.output_length = model.horizon;
    return f;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "data" && section != "model" && section != "train") {
                throw ConfigError(where + "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        if (section.empty()) throw ConfigError(where + "key outside of any section");
        try {
            find_entry(section, trim(line.substr(0, eq))).set(config, trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    try {
        return parse_config(data::read_text(path), path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
}

void apply_override(RunConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    }
    find_entry(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)))
        .set(config, trim(assignment.substr(eq + 1)));
}

std::string format_config(const RunConfig& config) {
    std::string out;
    std::string section;
    for (const Entry& e : entries()) {
        if (e.section != section) {
            out += (section.empty() ? "[" : "\n[") + e.section + "]\n";
            section = e.section;
        }
        out += e.key + " = " + e.get(config) + "\n";
    }
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const Entry& e : entries()) keys.push_back(e.section + "." + e.key);
    return keys;
}

} // namespace fcdnet
