#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ner/checkpoint.h"
#include "ner/config.h"
#include "ner/conll.h"
#include "ner/decoder.h"
#include "ner/encoder.h"
#include "ner/memory.h"
#include "ner/reasoner.h"
#include "ner/tags.h"
#include "ner/tensor.h"

namespace ner {

// Forced reference scores, keyed by (sentence index within the batch,
// token position). Used by inspection tools to probe what the evidence
// channel contributes.
using RefOverrides = std::map<std::pair<int, int>, ReferenceVector>;

struct ForwardOptions {
    // Layers past the first consult this pool instead of the one built
    // from the previous layer's output.
    const CandidatePool* fixed_pool = nullptr;
    // Layers past the first see an empty pool (all-zero references).
    bool disable_pool = false;
    const RefOverrides* overrides = nullptr;
    // Feed the gold tag's one-hot as p_{t-1} instead of the prediction.
    bool gold_feedback = false;
    // Build pools from gold spans instead of predicted ones.
    bool pool_from_gold = false;
    // 0 keeps the configured depth.
    int depth_override = 0;
    // Enables input dropout (when configured) and consumes the model rng.
    bool train_mode = false;
};

// Everything one decoding pass produced. `dists` holds tape handles and
// is only meaningful while the tape that ran forward() is alive; the
// rest is plain data.
struct LayerStep {
    std::vector<std::vector<int>> tags;               // [sentence][token]
    std::vector<std::vector<Var>> dists;              // [sentence][token]
    std::vector<std::vector<ReferenceDetail>> refs;   // consumed by this layer
    CandidatePool pool;                               // consumed by the next layer
};

struct ForwardResult {
    std::vector<LayerStep> layers;
    int encode_calls = 0;  // always one per sentence, whatever the depth
};

class Model {
  public:
    Model(const ModelConfig& cfg, Vocab vocab, CharVocab chars, TagSet tags);

    // Overwrites the word embedding table (e.g. with pretrained rows).
    void set_word_embeddings(const Tensor& emb);

    // One pass over a batch: encode each sentence once, decode `depth`
    // times, rebuilding the candidate pool between passes.
    ForwardResult forward(Tape& tape, const Batch& batch, const ForwardOptions& opts = {});

    // Cross-entropy against the batch's gold tags: the final layer's
    // mean over real tokens, or the sum of per-layer means.
    Var loss(Tape& tape, const ForwardResult& fwd, const Batch& batch) const;

    // Inference over a corpus. Result is [sentence][layer][token] tag ids.
    std::vector<std::vector<std::vector<int>>> predict(const std::vector<Sentence>& sentences,
                                                       const ForwardOptions& opts = {});

    void save(const std::string& path) const;
    static Model load(const std::string& path);

    ModelConfig& config() { return cfg_; }
    const ModelConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    const Vocab& vocab() const { return vocab_; }
    const CharVocab& char_vocab() const { return chars_; }
    const TagSet& tagset() const { return tags_; }
    Rng& rng() { return rng_; }

  private:
    std::vector<Var> sentence_inputs(Tape& tape, const std::vector<std::string>& tokens,
                                     const std::vector<int>& token_ids, Var emb_var,
                                     const CharCnnVars* cnn, bool train_mode);

    ModelConfig cfg_;
    Vocab vocab_;
    CharVocab chars_;
    TagSet tags_;
    Rng rng_;
    ParamStore params_;
    TensorPtr word_emb_;
    CharCnn char_cnn_;
    LstmCell enc_fwd_;
    LstmCell enc_bwd_;
    DecoderParams dec_;
    bool use_char_ = false;
};

struct TrainResult {
    int epochs_run = 0;
    int best_epoch = -1;       // 1-based; -1 when no epoch improved
    double best_dev_f1 = -1.0;
    std::string checkpoint_path;
};

// Full training loop: shuffled epochs, per-batch SGD with clipping,
// dev-set entity F1 after each epoch, best-so-far checkpointing and
// early stopping. Writes one CSV line per epoch to `log`. A non-finite
// loss aborts with an error.
TrainResult train_model(Model& model, const std::vector<Sentence>& train_set,
                        const std::vector<Sentence>& dev_set,
                        const std::string& checkpoint_path, std::ostream& log);

}  // namespace ner
