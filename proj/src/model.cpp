#include "ner/model.h"

#include <cmath>
#include <sstream>

#include "ner/error.h"

namespace ner {

namespace {

constexpr const char* kFormatTag = "ner-model";
constexpr const char* kFormatVersion = "1";

Tensor uniform_init(std::vector<int> shape, double limit, Rng& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.values) v = rng.uniform(-limit, limit);
    return t;
}

}  // namespace

Model::Model(const ModelConfig& cfg, Vocab vocab, CharVocab chars, TagSet tags)
    : cfg_(cfg),
      vocab_(std::move(vocab)),
      chars_(std::move(chars)),
      tags_(std::move(tags)),
      rng_(cfg.seed) {
    cfg_.validate();
    if (tags_.num_types() < 1) throw ContractError("tag set has no entity types");
    use_char_ = cfg_.char_encoder == "cnn";

    Tensor emb = uniform_init({vocab_.size(), cfg_.word_emb_dim}, 0.25 * cfg_.init_scale, rng_);
    for (int j = 0; j < cfg_.word_emb_dim; ++j) emb.at(Vocab::kPad, j) = 0.0;
    word_emb_ = params_.add("word.emb", std::move(emb));

    int input_dim = cfg_.word_emb_dim;
    if (use_char_) {
        char_cnn_ = make_char_cnn(params_, chars_.size(), cfg_.char_emb_dim,
                                  cfg_.char_filters, cfg_.cnn_window, rng_);
        input_dim += cfg_.char_filters;
    }
    enc_fwd_ = make_lstm_cell(params_, "enc.fwd", input_dim, cfg_.bilstm_state, rng_);
    enc_bwd_ = make_lstm_cell(params_, "enc.bwd", input_dim, cfg_.bilstm_state, rng_);
    dec_ = make_decoder(params_, 2 * cfg_.bilstm_state, tags_.size(), cfg_.decoder_state, rng_);
    if (cfg_.init_scale != 1.0)
        for (double& v : dec_.w_out->values) v *= cfg_.init_scale;
}

void Model::set_word_embeddings(const Tensor& emb) {
    if (emb.shape != word_emb_->shape)
        throw DimensionError("embedding table shape " + shape_str(emb.shape) +
                             " does not match " + shape_str(word_emb_->shape));
    word_emb_->values = emb.values;
}

std::vector<Var> Model::sentence_inputs(Tape& tape, const std::vector<std::string>& tokens,
                                        const std::vector<int>& token_ids, Var emb_var,
                                        const CharCnnVars* cnn, bool train_mode) {
    std::vector<Var> inputs;
    inputs.reserve(tokens.size());
    for (size_t t = 0; t < tokens.size(); ++t) {
        Var x = tape.row(emb_var, token_ids[t]);
        if (cnn != nullptr) {
            Var cf = char_features(tape, *cnn, chars_, tokens[t]);
            x = tape.concat({x, cf});
        }
        if (train_mode && cfg_.input_dropout > 0.0) {
            const double keep = 1.0 - cfg_.input_dropout;
            Tensor mask = Tensor::zeros({static_cast<int>(tape.value(x).size())});
            for (double& m : mask.values) m = rng_.bernoulli(keep) ? 1.0 / keep : 0.0;
            x = tape.mul(x, tape.constant(std::move(mask)));
        }
        inputs.push_back(x);
    }
    return inputs;
}

ForwardResult Model::forward(Tape& tape, const Batch& batch, const ForwardOptions& opts) {
    const int n_sent = static_cast<int>(batch.tokens.size());
    if (n_sent == 0) throw ContractError("empty batch");
    const int depth = opts.depth_override > 0 ? opts.depth_override : cfg_.depth;
    if (opts.fixed_pool != nullptr && opts.disable_pool)
        throw ContractError("fixed_pool and disable_pool are mutually exclusive");

    Var emb_var = tape.leaf(word_emb_);
    CharCnnVars cnn_vars;
    if (use_char_) cnn_vars = on_tape(tape, char_cnn_);
    LstmCellVars fwd_vars = on_tape(tape, enc_fwd_);
    LstmCellVars bwd_vars = on_tape(tape, enc_bwd_);
    DecoderVars dec_vars = on_tape(tape, dec_);

    ForwardResult result;
    std::vector<EncoderStates> states;
    states.reserve(static_cast<size_t>(n_sent));
    for (int s = 0; s < n_sent; ++s) {
        std::vector<int> true_ids(batch.token_ids[static_cast<size_t>(s)].begin(),
                                  batch.token_ids[static_cast<size_t>(s)].begin() +
                                      static_cast<long>(batch.tokens[static_cast<size_t>(s)].size()));
        std::vector<Var> inputs =
            sentence_inputs(tape, batch.tokens[static_cast<size_t>(s)], true_ids, emb_var,
                            use_char_ ? &cnn_vars : nullptr, opts.train_mode);
        states.push_back(bilstm_encode(tape, fwd_vars, bwd_vars, inputs));
        ++result.encode_calls;
    }

    std::vector<std::vector<int>> gold_true(static_cast<size_t>(n_sent));
    if (opts.gold_feedback) {
        for (int s = 0; s < n_sent; ++s) {
            const std::vector<int>& g = batch.gold_tag_ids[static_cast<size_t>(s)];
            if (g.empty())
                throw ContractError("gold feedback requested but batch has no gold tags");
            gold_true[static_cast<size_t>(s)].assign(
                g.begin(), g.begin() + static_cast<long>(batch.tokens[static_cast<size_t>(s)].size()));
        }
    }
    auto gold_row = [&](int s) -> const std::vector<int>* {
        return opts.gold_feedback ? &gold_true[static_cast<size_t>(s)] : nullptr;
    };

    auto spans_for_layer = [&](const LayerStep& step) {
        std::vector<std::vector<EntitySpan>> spans;
        spans.reserve(static_cast<size_t>(n_sent));
        for (int s = 0; s < n_sent; ++s) {
            if (opts.pool_from_gold) {
                const std::vector<int>& g = batch.gold_tag_ids[static_cast<size_t>(s)];
                if (g.empty())
                    throw ContractError("gold pool requested but batch has no gold tags");
                std::vector<int> true_gold(
                    g.begin(), g.begin() + static_cast<long>(batch.tokens[static_cast<size_t>(s)].size()));
                spans.push_back(extract_spans(true_gold, tags_, s));
            } else {
                spans.push_back(extract_spans(step.tags[static_cast<size_t>(s)], tags_, s));
            }
        }
        return spans;
    };

    auto next_pool = [&](const LayerStep& step) -> CandidatePool {
        if (opts.disable_pool) return CandidatePool{};
        if (opts.fixed_pool != nullptr) return *opts.fixed_pool;
        return build_pool(spans_for_layer(step), states, tape);
    };

    for (int layer = 0; layer < depth; ++layer) {
        LayerStep step;
        step.tags.resize(static_cast<size_t>(n_sent));
        step.dists.resize(static_cast<size_t>(n_sent));
        step.refs.resize(static_cast<size_t>(n_sent));

        const CandidatePool* pool =
            layer == 0 ? nullptr : &result.layers[static_cast<size_t>(layer - 1)].pool;
        PoolOnTape pool_vars;
        if (pool != nullptr) pool_vars = pool_on_tape(tape, *pool);

        for (int s = 0; s < n_sent; ++s) {
            const EncoderStates& enc = states[static_cast<size_t>(s)];
            const int n_tok = static_cast<int>(enc.h.size());
            std::vector<Var> refs;
            std::vector<ReferenceDetail> details(static_cast<size_t>(n_tok));
            refs.reserve(static_cast<size_t>(n_tok));
            for (int t = 0; t < n_tok; ++t) {
                const ReferenceVector* forced = nullptr;
                if (layer > 0 && opts.overrides != nullptr) {
                    auto it = opts.overrides->find({s, t});
                    if (it != opts.overrides->end()) forced = &it->second;
                }
                if (layer == 0) {
                    refs.push_back(tape.constant(Tensor::zeros({4})));
                } else if (forced != nullptr) {
                    refs.push_back(tape.constant(Tensor::vec(forced->as_vector())));
                    details[static_cast<size_t>(t)].s = *forced;
                } else {
                    refs.push_back(reference(tape, enc.h_f[static_cast<size_t>(t)],
                                             enc.h_b[static_cast<size_t>(t)], pool_vars));
                    details[static_cast<size_t>(t)] = reference_values(
                        tape.value(enc.h_f[static_cast<size_t>(t)]).values,
                        tape.value(enc.h_b[static_cast<size_t>(t)]).values, *pool);
                }
            }
            DecodeResult dr = decode_with_reference(tape, dec_vars, tags_, enc, refs,
                                                    gold_row(s));
            step.tags[static_cast<size_t>(s)] = std::move(dr.tags);
            step.dists[static_cast<size_t>(s)] = std::move(dr.dists);
            step.refs[static_cast<size_t>(s)] = std::move(details);
        }
        step.pool = next_pool(step);
        result.layers.push_back(std::move(step));
    }
    return result;
}

Var Model::loss(Tape& tape, const ForwardResult& fwd, const Batch& batch) const {
    if (fwd.layers.empty()) throw ContractError("forward result has no layers");
    const int n_sent = static_cast<int>(batch.tokens.size());

    auto layer_mean_nll = [&](const LayerStep& step) {
        std::vector<Var> picked;
        for (int s = 0; s < n_sent; ++s) {
            const std::vector<int>& gold = batch.gold_tag_ids[static_cast<size_t>(s)];
            if (gold.empty()) throw ContractError("loss requires gold tags for every sentence");
            const auto& dists = step.dists[static_cast<size_t>(s)];
            for (size_t t = 0; t < dists.size(); ++t) {
                int g = gold[t];
                if (g < 0 || g >= tags_.size())
                    throw ContractError("gold tag id " + std::to_string(g) + " out of range");
                picked.push_back(tape.pick(dists[t], g));
            }
        }
        Var probs = tape.concat(picked);
        Var total = tape.sum(tape.log(probs));
        return tape.scale(total, -1.0 / static_cast<double>(tape.value(probs).size()));
    };

    if (cfg_.loss_mode == "last_layer") return layer_mean_nll(fwd.layers.back());
    std::vector<Var> terms;
    terms.reserve(fwd.layers.size());
    for (const LayerStep& step : fwd.layers) terms.push_back(layer_mean_nll(step));
    Var acc = terms[0];
    for (size_t i = 1; i < terms.size(); ++i) acc = tape.add(acc, terms[i]);
    return acc;
}

std::vector<std::vector<std::vector<int>>> Model::predict(
    const std::vector<Sentence>& sentences, const ForwardOptions& opts) {
    PoolScope scope =
        cfg_.pool_scope == "document" ? PoolScope::Document : PoolScope::MiniBatch;
    std::vector<Batch> batches =
        make_batches(sentences, vocab_, tags_, cfg_.batch_size, scope);
    std::vector<std::vector<std::vector<int>>> out(sentences.size());
    for (const Batch& batch : batches) {
        Tape tape;
        ForwardResult fwd = forward(tape, batch, opts);
        for (size_t s = 0; s < batch.sentence_index.size(); ++s) {
            auto& rows = out[static_cast<size_t>(batch.sentence_index[s])];
            rows.reserve(fwd.layers.size());
            for (const LayerStep& step : fwd.layers) rows.push_back(step.tags[s]);
        }
    }
    return out;
}

void Model::save(const std::string& path) const {
    std::map<std::string, std::string> meta;
    meta["format"] = kFormatTag;
    meta["format_version"] = kFormatVersion;
    for (const auto& [k, v] : cfg_.to_map()) meta["config." + k] = v;

    std::ostringstream words;
    for (int i = 2; i < vocab_.size(); ++i) {
        if (i > 2) words << '\n';
        words << vocab_.word(i);
    }
    meta["vocab.words"] = words.str();
    meta["vocab.chars"] = chars_.chars();

    std::ostringstream types;
    for (size_t i = 0; i < tags_.types().size(); ++i) {
        if (i > 0) types << '\n';
        types << tags_.types()[i];
    }
    meta["tags.types"] = types.str();

    save_checkpoint(path, params_, meta);
}

namespace {

std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    size_t begin = 0;
    while (true) {
        size_t nl = s.find('\n', begin);
        if (nl == std::string::npos) {
            out.push_back(s.substr(begin));
            break;
        }
        out.push_back(s.substr(begin, nl - begin));
        begin = nl + 1;
    }
    return out;
}

const std::string& require_meta(const CheckpointData& data, const std::string& key) {
    auto it = data.meta.find(key);
    if (it == data.meta.end()) throw LoadError("checkpoint is missing meta key '" + key + "'");
    return it->second;
}

}  // namespace

Model Model::load(const std::string& path) {
    CheckpointData data = load_checkpoint(path);
    if (require_meta(data, "format") != kFormatTag)
        throw LoadError("not a model checkpoint: format '" + data.meta.at("format") + "'");
    if (require_meta(data, "format_version") != kFormatVersion)
        throw LoadError("unsupported model format version " +
                        data.meta.at("format_version"));

    std::map<std::string, std::string> cfg_map;
    for (const auto& [k, v] : data.meta)
        if (k.rfind("config.", 0) == 0) cfg_map[k.substr(7)] = v;
    ModelConfig cfg = ModelConfig::from_map(cfg_map);

    Vocab vocab = Vocab::from_words(split_lines(require_meta(data, "vocab.words")));
    CharVocab chars = CharVocab::from_chars(require_meta(data, "vocab.chars"));
    TagSet tags = TagSet::from_types(split_lines(require_meta(data, "tags.types")));

    Model model(cfg, std::move(vocab), std::move(chars), std::move(tags));

    std::map<std::string, const Tensor*> stored;
    for (const auto& [name, tensor] : data.params) stored[name] = &tensor;
    if (stored.size() != model.params_.size())
        throw LoadError("checkpoint has " + std::to_string(stored.size()) +
                        " parameters, model expects " + std::to_string(model.params_.size()));
    for (const auto& [name, ptr] : model.params_.items()) {
        auto it = stored.find(name);
        if (it == stored.end()) throw LoadError("checkpoint is missing parameter '" + name + "'");
        if (it->second->shape != ptr->shape)
            throw LoadError("parameter '" + name + "' has shape " +
                            shape_str(it->second->shape) + ", model expects " +
                            shape_str(ptr->shape));
        ptr->values = it->second->values;
    }
    return model;
}

}  // namespace ner
