#include "depthforge/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace depthforge {
namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& value) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field, "expected a number, got '" + value + "'");
    }
}

long long parse_int(const std::string& field, const std::string& value) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError(field, "expected an integer, got '" + value + "'");
    return v;
}

std::vector<double> parse_double_list(const std::string& field, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(field, "empty list element");
        out.push_back(parse_double(field, item));
    }
    if (out.empty()) throw ConfigError(field, "expected a comma separated list");
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_double_list(const std::vector<double>& vs) {
    std::string out;
    for (size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ",";
        out += format_double(vs[i]);
    }
    return out;
}

}  // namespace

const std::string* ConfigDoc::find(const std::string& section, const std::string& key) const {
    for (const auto& s : sections) {
        if (s.name != section) continue;
        for (const auto& [k, v] : s.entries)
            if (k == key) return &v;
    }
    return nullptr;
}

void ConfigDoc::set(const std::string& section, const std::string& key, const std::string& value) {
    for (auto& s : sections) {
        if (s.name != section) continue;
        for (auto& [k, v] : s.entries) {
            if (k == key) {
                v = value;
                return;
            }
        }
        s.entries.emplace_back(key, value);
        return;
    }
    sections.push_back({section, {{key, value}}});
}

ConfigDoc parse_config(const std::string& text) {
    ConfigDoc doc;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    ConfigDoc::Section* current = nullptr;
    while (std::getline(ss, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::string where = "line " + std::to_string(lineno);
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                throw ConfigError(where, "malformed section header '" + t + "'");
            std::string name = trim(t.substr(1, t.size() - 2));
            if (name.empty()) throw ConfigError(where, "empty section name");
            doc.sections.push_back({name, {}});
            current = &doc.sections.back();
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where, "expected 'key = value', got '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError(where, "empty key");
        if (!current) throw ConfigError(where, "key '" + key + "' appears before any [section]");
        current->entries.emplace_back(key, value);
    }
    return doc;
}

ConfigDoc load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ConfigDoc& doc) {
    std::string out;
    for (size_t i = 0; i < doc.sections.size(); ++i) {
        if (i) out += "\n";
        out += "[" + doc.sections[i].name + "]\n";
        for (const auto& [k, v] : doc.sections[i].entries) out += k + " = " + v + "\n";
    }
    return out;
}

PipelineConfig pipeline_config_from_doc(const ConfigDoc& doc) {
    PipelineConfig cfg;

    auto get = [&](const char* section, const char* key) -> const std::string* {
        return doc.find(section, key);
    };
    auto field = [](const char* section, const char* key) {
        return std::string(section) + "." + key;
    };
    auto set_int = [&](const char* sec, const char* key, int& dst) {
        if (const auto* v = get(sec, key)) dst = static_cast<int>(parse_int(field(sec, key), *v));
    };
    auto set_double = [&](const char* sec, const char* key, double& dst) {
        if (const auto* v = get(sec, key)) dst = parse_double(field(sec, key), *v);
    };
    auto set_string = [&](const char* sec, const char* key, std::string& dst) {
        if (const auto* v = get(sec, key)) dst = *v;
    };

    // Reject unknown keys so typos fail loudly instead of silently running
    // with defaults.
    static const std::vector<std::pair<std::string, std::vector<std::string>>> known = {
        {"pipeline", {"seed"}},
        {"paths", {"models_dir", "output_dir"}},
        {"render", {"resolution", "count", "dedup_threshold"}},
        {"augment",
         {"crop_min_frac", "occlude_prob", "background_prob", "noise_prob", "shear_prob",
          "zshift_prob", "noise_amplitude", "shear_max", "z_alpha_min", "z_alpha_max", "z_beta_min",
          "z_beta_max", "input_size"}},
        {"net", {"spec"}},
        {"train",
         {"base_lr", "gamma", "first_step_epochs", "total_epochs", "momentum", "weight_decay",
          "batch_size"}},
        {"eval",
         {"protocol", "subsample_stride", "fixed_list", "cv_folds", "c_grid", "p_grid", "layer",
          "preproc"}},
    };
    for (const auto& sec : doc.sections) {
        const std::vector<std::string>* keys = nullptr;
        for (const auto& [name, ks] : known)
            if (name == sec.name) keys = &ks;
        if (!keys) throw ConfigError(sec.name, "unknown config section");
        for (const auto& [k, v] : sec.entries) {
            bool ok = false;
            for (const auto& known_key : *keys) ok = ok || known_key == k;
            if (!ok) throw ConfigError(sec.name + "." + k, "unknown config key");
        }
    }

    if (const auto* v = get("paths", "models_dir")) cfg.models_dir = *v;
    if (const auto* v = get("paths", "output_dir")) cfg.output_dir = *v;
    set_int("render", "resolution", cfg.resolution);
    set_int("render", "count", cfg.count);
    set_int("render", "dedup_threshold", cfg.dedup_threshold);

    set_double("augment", "crop_min_frac", cfg.augment.crop_min_frac);
    set_double("augment", "occlude_prob", cfg.augment.occlude_prob);
    set_double("augment", "background_prob", cfg.augment.background_prob);
    set_double("augment", "noise_prob", cfg.augment.noise_prob);
    set_double("augment", "shear_prob", cfg.augment.shear_prob);
    set_double("augment", "zshift_prob", cfg.augment.zshift_prob);
    set_int("augment", "noise_amplitude", cfg.augment.noise_amplitude);
    set_double("augment", "shear_max", cfg.augment.shear_max);
    set_double("augment", "z_alpha_min", cfg.augment.z_alpha_range[0]);
    set_double("augment", "z_alpha_max", cfg.augment.z_alpha_range[1]);
    set_double("augment", "z_beta_min", cfg.augment.z_beta_range[0]);
    set_double("augment", "z_beta_max", cfg.augment.z_beta_range[1]);
    set_int("augment", "input_size", cfg.augment.input_size);

    set_string("net", "spec", cfg.net_spec);

    set_double("train", "base_lr", cfg.train.base_lr);
    set_double("train", "gamma", cfg.train.gamma);
    set_int("train", "first_step_epochs", cfg.train.first_step_epochs);
    set_int("train", "total_epochs", cfg.train.total_epochs);
    set_double("train", "momentum", cfg.train.momentum);
    set_double("train", "weight_decay", cfg.train.weight_decay);
    set_int("train", "batch_size", cfg.train.batch_size);

    set_string("eval", "protocol", cfg.protocol);
    set_int("eval", "subsample_stride", cfg.subsample_stride);
    set_string("eval", "fixed_list", cfg.fixed_list);
    set_int("eval", "cv_folds", cfg.cv_folds);
    if (const auto* v = get("eval", "c_grid")) cfg.c_grid = parse_double_list("eval.c_grid", *v);
    if (const auto* v = get("eval", "p_grid")) cfg.p_grid = parse_double_list("eval.p_grid", *v);
    set_string("eval", "layer", cfg.layer);
    set_string("eval", "preproc", cfg.preproc);

    if (const auto* v = get("pipeline", "seed")) {
        long long s = parse_int("pipeline.seed", *v);
        cfg.seed = static_cast<std::uint64_t>(s);
        cfg.seed_set = true;
    } else {
        throw ConfigError("pipeline.seed", "seed is required; there is no implicit default");
    }
    cfg.train.seed = cfg.seed;
    cfg.train.augment = cfg.augment;

    if (cfg.resolution <= 0) throw ConfigError("render.resolution", "must be positive");
    if (cfg.count <= 0) throw ConfigError("render.count", "must be positive");
    if (cfg.dedup_threshold < 0 || cfg.dedup_threshold > 64)
        throw ConfigError("render.dedup_threshold", "must be in [0, 64] (the hash is 64 bits)");
    if (cfg.cv_folds < 2) throw ConfigError("eval.cv_folds", "need at least 2 folds");
    if (cfg.subsample_stride < 2) throw ConfigError("eval.subsample_stride", "must be >= 2");
    if (cfg.protocol != "leave_instance_out" && cfg.protocol != "frame_subsample" &&
        cfg.protocol != "fixed_list")
        throw ConfigError("eval.protocol", "unknown protocol '" + cfg.protocol + "'");
    for (double c : cfg.c_grid)
        if (!(c > 0)) throw ConfigError("eval.c_grid", "C values must be positive");
    for (double p : cfg.p_grid)
        if (!(p > 1.0)) throw ConfigError("eval.p_grid", "p values must be > 1");
    try {
        validate_policy(cfg.augment);
        validate_train_config(cfg.train);
    } catch (const std::exception& e) {
        throw ConfigError("config", e.what());
    }
    return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    return pipeline_config_from_doc(load_config(path));
}

ConfigDoc pipeline_config_to_doc(const PipelineConfig& cfg) {
    ConfigDoc doc;
    doc.set("pipeline", "seed", std::to_string(cfg.seed));
    doc.set("paths", "models_dir", cfg.models_dir.string());
    doc.set("paths", "output_dir", cfg.output_dir.string());
    doc.set("render", "resolution", std::to_string(cfg.resolution));
    doc.set("render", "count", std::to_string(cfg.count));
    doc.set("render", "dedup_threshold", std::to_string(cfg.dedup_threshold));
    doc.set("augment", "crop_min_frac", format_double(cfg.augment.crop_min_frac));
    doc.set("augment", "occlude_prob", format_double(cfg.augment.occlude_prob));
    doc.set("augment", "background_prob", format_double(cfg.augment.background_prob));
    doc.set("augment", "noise_prob", format_double(cfg.augment.noise_prob));
    doc.set("augment", "shear_prob", format_double(cfg.augment.shear_prob));
    doc.set("augment", "zshift_prob", format_double(cfg.augment.zshift_prob));
    doc.set("augment", "noise_amplitude", std::to_string(cfg.augment.noise_amplitude));
    doc.set("augment", "shear_max", format_double(cfg.augment.shear_max));
    doc.set("augment", "z_alpha_min", format_double(cfg.augment.z_alpha_range[0]));
    doc.set("augment", "z_alpha_max", format_double(cfg.augment.z_alpha_range[1]));
    doc.set("augment", "z_beta_min", format_double(cfg.augment.z_beta_range[0]));
    doc.set("augment", "z_beta_max", format_double(cfg.augment.z_beta_range[1]));
    doc.set("augment", "input_size", std::to_string(cfg.augment.input_size));
    doc.set("net", "spec", cfg.net_spec);
    doc.set("train", "base_lr", format_double(cfg.train.base_lr));
    doc.set("train", "gamma", format_double(cfg.train.gamma));
    doc.set("train", "first_step_epochs", std::to_string(cfg.train.first_step_epochs));
    doc.set("train", "total_epochs", std::to_string(cfg.train.total_epochs));
    doc.set("train", "momentum", format_double(cfg.train.momentum));
    doc.set("train", "weight_decay", format_double(cfg.train.weight_decay));
    doc.set("train", "batch_size", std::to_string(cfg.train.batch_size));
    doc.set("eval", "protocol", cfg.protocol);
    doc.set("eval", "subsample_stride", std::to_string(cfg.subsample_stride));
    if (!cfg.fixed_list.empty()) doc.set("eval", "fixed_list", cfg.fixed_list);
    doc.set("eval", "cv_folds", std::to_string(cfg.cv_folds));
    doc.set("eval", "c_grid", format_double_list(cfg.c_grid));
    doc.set("eval", "p_grid", format_double_list(cfg.p_grid));
    doc.set("eval", "layer", cfg.layer);
    doc.set("eval", "preproc", cfg.preproc);
    return doc;
}

}  // namespace depthforge
