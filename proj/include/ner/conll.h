#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "ner/rng.h"
#include "ner/tags.h"
#include "ner/tensor.h"

namespace ner {

struct Sentence {
    std::vector<std::string> tokens;
    std::vector<std::string> gold_bmeos;  // empty when the file has no tags
    int doc_id = 0;
};

struct ColumnSpec {
    int token_col = 0;
    int tag_col = -1;  // -1: last column; -2: no tags at all
};

// Tokenized sentences from CoNLL-style column text: one token per line,
// blank line between sentences, -DOCSTART- lines mark document breaks
// and are dropped. Tags are read raw (any scheme).
std::vector<Sentence> read_conll(std::istream& in, const ColumnSpec& spec,
                                 const std::string& path_for_errors = "<stream>");
std::vector<Sentence> read_conll_file(const std::string& path, const ColumnSpec& spec = {});

// read_conll + tag-scheme normalization to BMEOS. Files already in
// BMEOS (any M-/E-/S- prefix present) pass through unchanged.
std::vector<Sentence> load_corpus(const std::string& path, const ColumnSpec& spec = {},
                                  std::vector<std::string>* warnings = nullptr);

// Entity type inventory over gold tags, sorted.
std::vector<std::string> collect_types(const std::vector<Sentence>& sentences);

// Word vocabulary. Ids 0 and 1 are reserved for padding and unknowns.
// Lookup normalizes digits to '0', then tries the exact form, then the
// lowercased form, then falls back to UNK.
class Vocab {
  public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    static Vocab build(const std::vector<Sentence>& sentences, int min_count = 1);
    static Vocab from_words(const std::vector<std::string>& words);

    int lookup(const std::string& token) const;
    bool contains(const std::string& normalized) const;
    int size() const { return static_cast<int>(words_.size()); }
    const std::string& word(int id) const { return words_[static_cast<size_t>(id)]; }
    const std::vector<std::string>& words() const { return words_; }

    static std::string normalize(const std::string& token);

  private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, int> index_;
};

// Character vocabulary for the char encoder. 0 pads, 1 is the unknown
// byte. Built over raw (unnormalized) token bytes.
class CharVocab {
  public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    static CharVocab build(const std::vector<Sentence>& sentences);
    static CharVocab from_chars(const std::string& chars);

    int lookup(char c) const;
    int size() const { return static_cast<int>(chars_.size()) + 2; }
    std::string chars() const { return std::string(chars_.begin(), chars_.end()); }

  private:
    std::vector<char> chars_;
    std::unordered_map<char, int> index_;
};

struct EmbeddingStats {
    int found_exact = 0;
    int found_lowercase = 0;
    int missing = 0;
};

// Embedding matrix {V, dim} aligned with `vocab`. Rows for words found
// in the text file (word v1 v2 ... per line) are copied, first by exact
// match on the normalized form, then case-insensitively. Missing rows
// are uniform in [-0.25, 0.25]; the PAD row is zero. The matrix is
// trainable either way.
Tensor load_embeddings(const std::string& path, const Vocab& vocab, int dim, Rng& rng,
                       EmbeddingStats* stats = nullptr);

enum class PoolScope { MiniBatch, Document };

struct Batch {
    std::vector<int> sentence_index;             // into the source corpus
    std::vector<std::vector<std::string>> tokens;  // true lengths
    std::vector<std::vector<int>> token_ids;     // padded to max length with kPad
    std::vector<std::vector<int>> mask;          // 1 real token, 0 pad
    std::vector<std::vector<int>> gold_tag_ids;  // -1 on pads; empty rows when untagged
    int max_len = 0;
};

// Batches of at most `batch_size` sentences in corpus order (or in
// `order` when given). Under document scope a batch never crosses a
// document boundary.
std::vector<Batch> make_batches(const std::vector<Sentence>& sentences, const Vocab& vocab,
                                const TagSet& tagset, int batch_size, PoolScope scope,
                                const std::vector<int>* order = nullptr);

// Sentence ordering for one training epoch: shuffles sentences under
// mini-batch scope, whole documents under document scope.
std::vector<int> epoch_order(const std::vector<Sentence>& sentences, PoolScope scope, Rng& rng);

}  // namespace ner
