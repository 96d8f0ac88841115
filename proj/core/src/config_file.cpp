#include "dnerv/config_file.hpp"

#include <fstream>
#include <sstream>

namespace dnerv {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

int parse_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        int r = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return r;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
    }
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return r;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + v + "' is not a number");
    }
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        std::uint64_t r = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return r;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + v + "' is not an unsigned integer");
    }
}

std::vector<int> parse_int_list(const std::string& v, const std::string& key) {
    std::vector<int> out;
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(trim(item), key));
    return out;
}

// Returns false when the key is not a model key.
bool apply_model_key(ModelConfig& m, const std::string& key, const std::string& value) {
    if (key == "height") m.height = parse_int(value, key);
    else if (key == "width") m.width = parse_int(value, key);
    else if (key == "content_strides") m.content_strides = parse_int_list(value, key);
    else if (key == "diff_strides") m.diff_strides = parse_int_list(value, key);
    else if (key == "content_embed_channels") m.content_embed_channels = parse_int(value, key);
    else if (key == "diff_embed_channels") m.diff_embed_channels = parse_int(value, key);
    else if (key == "c_init") m.c_init = parse_int(value, key);
    else if (key == "reduction") m.reduction = parse_double(value, key);
    else if (key == "fusion_variant") m.fusion_variant = fusion_variant_from_string(value);
    else if (key == "fusion_stage") m.fusion_stage = parse_int(value, key);
    else if (key == "diff_variant") m.diff_variant = diff_variant_from_string(value);
    else if (key == "ccu_kernel") m.ccu_kernel = parse_int(value, key);
    else if (key == "decoder_kernels") m.decoder_kernels = parse_int_list(value, key);
    else if (key == "encoder_width") m.encoder_width = parse_int(value, key);
    else return false;
    return true;
}

bool apply_train_key(TrainConfig& t, const std::string& key, const std::string& value) {
    if (key == "epochs") t.epochs = parse_int(value, key);
    else if (key == "base_lr") t.base_lr = parse_double(value, key);
    else if (key == "loss") t.loss = loss_kind_from_string(value);
    else if (key == "alpha") t.alpha = parse_double(value, key);
    else if (key == "seed") t.seed = parse_u64(value, key);
    else if (key == "eval_every") t.eval_every = parse_int(value, key);
    else if (key == "precision") t.precision = precision_from_string(value);
    else return false;
    return true;
}

std::vector<std::pair<std::string, std::string>> tokenize(const std::string& text,
                                                          const std::string& origin) {
    std::vector<std::pair<std::string, std::string>> kvs;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        kvs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return kvs;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    const auto kvs = tokenize(text, origin);
    // The preset seeds the model config first, wherever the line appears.
    for (const auto& [key, value] : kvs)
        if (key == "preset") cfg.model = preset(value);
    for (const auto& [key, value] : kvs) {
        if (key == "preset") continue;
        if (apply_model_key(cfg.model, key, value)) continue;
        if (apply_train_key(cfg.train, key, value)) continue;
        throw ConfigError(origin + ": unknown config key '" + key + "'");
    }
    cfg.model.validate();
    cfg.train.validate();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str(), path);
}

ModelConfig parse_model_config_text(const std::string& text, const std::string& origin) {
    ModelConfig m;
    for (const auto& [key, value] : tokenize(text, origin))
        if (!apply_model_key(m, key, value))
            throw ConfigError(origin + ": unknown model config key '" + key + "'");
    m.validate();
    return m;
}

}  // namespace dnerv
