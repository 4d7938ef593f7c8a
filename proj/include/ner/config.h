#pragma once

#include <map>
#include <string>

namespace ner {

// Everything that determines the network's shape and the training run.
// Defaults are the tuned operating point; most runs only override the
// data paths and the seed.
struct ModelConfig {
    int word_emb_dim = 50;
    int char_emb_dim = 30;
    int char_filters = 30;
    int cnn_window = 3;
    int bilstm_state = 256;   // per direction
    int decoder_state = 273;
    int depth = 2;            // number of decoding passes
    int batch_size = 16;
    double learning_rate = 0.01;
    double clip_norm = 5.0;   // <= 0 disables clipping
    std::string char_encoder = "cnn";     // "cnn" | "none"
    std::string loss_mode = "last_layer";  // "last_layer" | "all_layers"
    std::string pool_scope = "mini-batch";  // "mini-batch" | "document"
    std::string tag_scheme = "BMEOS";
    int max_epochs = 100;
    int patience = 10;
    int vocab_min_count = 1;
    // Multiplies the init range of the word embedding table and the
    // decoder output head. Sharpens the initial landscape when the
    // update budget is small; 1.0 is the conventional scale.
    double init_scale = 1.0;
    double input_dropout = 0.0;
    bool feedback_gold = false;  // teacher forcing of p_{t-1} during training
    bool pool_gold = false;      // build training pools from gold spans
    unsigned long seed = 1;

    void validate() const;

    std::map<std::string, std::string> to_map() const;
    static ModelConfig from_map(const std::map<std::string, std::string>& m);

    // Flat key=value lines; '#' starts a comment. Unknown keys error.
    static ModelConfig from_file(const std::string& path);
    void apply(const std::string& key, const std::string& value);
};

}  // namespace ner
