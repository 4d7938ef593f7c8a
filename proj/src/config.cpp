#include "ner/config.h"

#include <fstream>
#include <sstream>

#include "ner/error.h"

namespace ner {

namespace {

int to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int out = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ParseError("value for " + key + " is not an integer: '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ParseError("value for " + key + " is not a number: '" + v + "'");
    }
}

unsigned long to_ulong(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        unsigned long out = std::stoul(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ParseError("value for " + key + " is not an unsigned integer: '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ParseError("value for " + key + " is not a boolean: '" + v + "'");
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

void ModelConfig::validate() const {
    auto positive = [](const char* name, int v) {
        if (v < 1) throw ContractError(std::string(name) + " must be positive, got " +
                                       std::to_string(v));
    };
    positive("word_emb_dim", word_emb_dim);
    positive("char_emb_dim", char_emb_dim);
    positive("char_filters", char_filters);
    positive("cnn_window", cnn_window);
    positive("bilstm_state", bilstm_state);
    positive("decoder_state", decoder_state);
    positive("depth", depth);
    positive("batch_size", batch_size);
    positive("max_epochs", max_epochs);
    positive("patience", patience);
    positive("vocab_min_count", vocab_min_count);
    if (learning_rate < 0.0) throw ContractError("learning_rate must be >= 0");
    if (init_scale <= 0.0) throw ContractError("init_scale must be positive");
    if (input_dropout < 0.0 || input_dropout >= 1.0)
        throw ContractError("input_dropout must be in [0, 1)");
    if (char_encoder != "cnn" && char_encoder != "none")
        throw ContractError("char_encoder must be 'cnn' or 'none', got '" + char_encoder + "'");
    if (loss_mode != "last_layer" && loss_mode != "all_layers")
        throw ContractError("loss_mode must be 'last_layer' or 'all_layers', got '" +
                            loss_mode + "'");
    if (pool_scope != "mini-batch" && pool_scope != "document")
        throw ContractError("pool_scope must be 'mini-batch' or 'document', got '" +
                            pool_scope + "'");
    if (tag_scheme != "BMEOS")
        throw ContractError("only the BMEOS scheme is supported, got '" + tag_scheme + "'");
}

void ModelConfig::apply(const std::string& key, const std::string& value) {
    if (key == "word_emb_dim") word_emb_dim = to_int(key, value);
    else if (key == "char_emb_dim") char_emb_dim = to_int(key, value);
    else if (key == "char_filters") char_filters = to_int(key, value);
    else if (key == "cnn_window") cnn_window = to_int(key, value);
    else if (key == "bilstm_state") bilstm_state = to_int(key, value);
    else if (key == "decoder_state") decoder_state = to_int(key, value);
    else if (key == "depth") depth = to_int(key, value);
    else if (key == "batch_size") batch_size = to_int(key, value);
    else if (key == "learning_rate") learning_rate = to_double(key, value);
    else if (key == "clip_norm") clip_norm = to_double(key, value);
    else if (key == "char_encoder") char_encoder = value;
    else if (key == "loss_mode") loss_mode = value;
    else if (key == "pool_scope") pool_scope = value;
    else if (key == "tag_scheme") tag_scheme = value;
    else if (key == "max_epochs") max_epochs = to_int(key, value);
    else if (key == "patience") patience = to_int(key, value);
    else if (key == "vocab_min_count") vocab_min_count = to_int(key, value);
    else if (key == "init_scale") init_scale = to_double(key, value);
    else if (key == "input_dropout") input_dropout = to_double(key, value);
    else if (key == "feedback_gold") feedback_gold = to_bool(key, value);
    else if (key == "pool_gold") pool_gold = to_bool(key, value);
    else if (key == "seed") seed = to_ulong(key, value);
    else throw ParseError("unknown config key '" + key + "'");
}

std::map<std::string, std::string> ModelConfig::to_map() const {
    std::map<std::string, std::string> m;
    auto put_d = [&](const char* k, double v) {
        std::ostringstream ss;
        ss << v;
        m[k] = ss.str();
    };
    m["word_emb_dim"] = std::to_string(word_emb_dim);
    m["char_emb_dim"] = std::to_string(char_emb_dim);
    m["char_filters"] = std::to_string(char_filters);
    m["cnn_window"] = std::to_string(cnn_window);
    m["bilstm_state"] = std::to_string(bilstm_state);
    m["decoder_state"] = std::to_string(decoder_state);
    m["depth"] = std::to_string(depth);
    m["batch_size"] = std::to_string(batch_size);
    put_d("learning_rate", learning_rate);
    put_d("clip_norm", clip_norm);
    m["char_encoder"] = char_encoder;
    m["loss_mode"] = loss_mode;
    m["pool_scope"] = pool_scope;
    m["tag_scheme"] = tag_scheme;
    m["max_epochs"] = std::to_string(max_epochs);
    m["patience"] = std::to_string(patience);
    m["vocab_min_count"] = std::to_string(vocab_min_count);
    put_d("init_scale", init_scale);
    put_d("input_dropout", input_dropout);
    m["feedback_gold"] = feedback_gold ? "true" : "false";
    m["pool_gold"] = pool_gold ? "true" : "false";
    m["seed"] = std::to_string(seed);
    return m;
}

ModelConfig ModelConfig::from_map(const std::map<std::string, std::string>& m) {
    ModelConfig cfg;
    for (const auto& [k, v] : m) cfg.apply(k, v);
    cfg.validate();
    return cfg;
}

ModelConfig ModelConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    ModelConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path, line_no, "expected key=value, got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(path, line_no, "empty key");
        try {
            cfg.apply(key, value);
        } catch (const ParseError& e) {
            throw ParseError(path, line_no, e.what());
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace ner
