#include "ner/conll.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "ner/error.h"

namespace ner {

namespace {

std::vector<std::string> split_columns(const std::string& line) {
    std::vector<std::string> cols;
    std::string cur;
    for (char c : line) {
        if (c == ' ' || c == '\t') {
            if (!cur.empty()) {
                cols.push_back(std::move(cur));
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) cols.push_back(std::move(cur));
    return cols;
}

}  // namespace

std::vector<Sentence> read_conll(std::istream& in, const ColumnSpec& spec,
                                 const std::string& path_for_errors) {
    std::vector<Sentence> sentences;
    Sentence cur;
    int doc_id = 0;
    bool any_token_seen = false;
    std::string line;
    int line_no = 0;

    auto flush = [&]() {
        if (!cur.tokens.empty()) {
            cur.doc_id = doc_id;
            sentences.push_back(std::move(cur));
            cur = Sentence{};
        }
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cols = split_columns(line);
        if (cols.empty()) {
            flush();
            continue;
        }
        if (cols[0] == "-DOCSTART-") {
            flush();
            if (any_token_seen) ++doc_id;
            continue;
        }
        int ncols = static_cast<int>(cols.size());
        if (spec.token_col >= ncols)
            throw ParseError(path_for_errors, line_no,
                             "expected a token in column " + std::to_string(spec.token_col) +
                                 " but the line has " + std::to_string(ncols));
        cur.tokens.push_back(cols[static_cast<size_t>(spec.token_col)]);
        any_token_seen = true;
        if (spec.tag_col != -2) {
            int tc = spec.tag_col < 0 ? ncols - 1 : spec.tag_col;
            if (tc >= ncols || tc == spec.token_col)
                throw ParseError(path_for_errors, line_no,
                                 "no tag column: line has " + std::to_string(ncols) +
                                     " column(s)");
            cur.gold_bmeos.push_back(cols[static_cast<size_t>(tc)]);
        }
    }
    flush();
    return sentences;
}

std::vector<Sentence> read_conll_file(const std::string& path, const ColumnSpec& spec) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return read_conll(in, spec, path);
}

std::vector<Sentence> load_corpus(const std::string& path, const ColumnSpec& spec,
                                  std::vector<std::string>* warnings) {
    std::vector<Sentence> sentences = read_conll_file(path, spec);
    bool bmeos = false;
    for (const Sentence& s : sentences)
        if (looks_like_bmeos(s.gold_bmeos)) {
            bmeos = true;
            break;
        }
    if (!bmeos) {
        for (Sentence& s : sentences)
            if (!s.gold_bmeos.empty()) s.gold_bmeos = to_bmeos(s.gold_bmeos, warnings);
    }
    return sentences;
}

std::vector<std::string> collect_types(const std::vector<Sentence>& sentences) {
    std::vector<std::string> types;
    for (const Sentence& s : sentences) {
        for (const std::string& tag : s.gold_bmeos) {
            BmeosKind k;
            std::string type;
            if (parse_tag_name(tag, &k, &type) && k != BmeosKind::O)
                types.push_back(std::move(type));
        }
    }
    std::sort(types.begin(), types.end());
    types.erase(std::unique(types.begin(), types.end()), types.end());
    return types;
}

std::string Vocab::normalize(const std::string& token) {
    std::string out = token;
    for (char& c : out)
        if (c >= '0' && c <= '9') c = '0';
    return out;
}

namespace {

std::string lower(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

Vocab Vocab::build(const std::vector<Sentence>& sentences, int min_count) {
    std::map<std::string, int> counts;
    for (const Sentence& s : sentences)
        for (const std::string& tok : s.tokens) ++counts[normalize(tok)];
    std::vector<std::string> kept;
    for (const auto& [word, n] : counts)
        if (n >= min_count) kept.push_back(word);
    return from_words(kept);
}

Vocab Vocab::from_words(const std::vector<std::string>& words) {
    Vocab v;
    v.words_ = {"<pad>", "<unk>"};
    for (const std::string& w : words) {
        if (v.index_.count(w)) continue;
        v.index_.emplace(w, static_cast<int>(v.words_.size()));
        v.words_.push_back(w);
    }
    return v;
}

int Vocab::lookup(const std::string& token) const {
    std::string norm = normalize(token);
    auto it = index_.find(norm);
    if (it != index_.end()) return it->second;
    it = index_.find(lower(norm));
    if (it != index_.end()) return it->second;
    return kUnk;
}

bool Vocab::contains(const std::string& normalized) const {
    return index_.count(normalized) > 0;
}

CharVocab CharVocab::build(const std::vector<Sentence>& sentences) {
    std::map<char, int> seen;
    for (const Sentence& s : sentences)
        for (const std::string& tok : s.tokens)
            for (char c : tok) seen[c] = 1;
    CharVocab cv;
    for (const auto& [c, _] : seen) {
        cv.index_.emplace(c, static_cast<int>(cv.chars_.size()) + 2);
        cv.chars_.push_back(c);
    }
    return cv;
}

CharVocab CharVocab::from_chars(const std::string& chars) {
    CharVocab cv;
    for (char c : chars) {
        if (cv.index_.count(c)) continue;
        cv.index_.emplace(c, static_cast<int>(cv.chars_.size()) + 2);
        cv.chars_.push_back(c);
    }
    return cv;
}

int CharVocab::lookup(char c) const {
    auto it = index_.find(c);
    return it == index_.end() ? kUnk : it->second;
}

Tensor load_embeddings(const std::string& path, const Vocab& vocab, int dim, Rng& rng,
                       EmbeddingStats* stats) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);

    std::unordered_map<std::string, std::vector<double>> table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        std::vector<double> vec;
        vec.reserve(static_cast<size_t>(dim));
        double v;
        while (ss >> v) vec.push_back(v);
        if (static_cast<int>(vec.size()) != dim)
            throw ParseError(path, line_no,
                             "expected " + std::to_string(dim) + " values, got " +
                                 std::to_string(vec.size()));
        table.emplace(std::move(word), std::move(vec));
    }

    std::unordered_map<std::string, const std::vector<double>*> lower_table;
    for (const auto& [word, vec] : table) {
        std::string lw = lower(word);
        if (!lower_table.count(lw)) lower_table.emplace(std::move(lw), &vec);
    }

    Tensor emb = Tensor::zeros({vocab.size(), dim});
    EmbeddingStats st;
    for (int i = 0; i < vocab.size(); ++i) {
        if (i == Vocab::kPad) continue;  // stays zero
        const std::string& w = vocab.word(i);
        const std::vector<double>* src = nullptr;
        auto it = table.find(w);
        if (it != table.end()) {
            src = &it->second;
            ++st.found_exact;
        } else {
            auto lt = lower_table.find(lower(w));
            if (lt != lower_table.end()) {
                src = lt->second;
                ++st.found_lowercase;
            }
        }
        if (src != nullptr) {
            for (int j = 0; j < dim; ++j) emb.at(i, j) = (*src)[static_cast<size_t>(j)];
        } else {
            ++st.missing;
            for (int j = 0; j < dim; ++j) emb.at(i, j) = rng.uniform(-0.25, 0.25);
        }
    }
    if (stats != nullptr) *stats = st;
    return emb;
}

std::vector<Batch> make_batches(const std::vector<Sentence>& sentences, const Vocab& vocab,
                                const TagSet& tagset, int batch_size, PoolScope scope,
                                const std::vector<int>* order) {
    if (batch_size < 1) throw ContractError("batch size must be positive");
    std::vector<int> idx;
    if (order != nullptr) {
        idx = *order;
    } else {
        idx.resize(sentences.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    }

    std::vector<Batch> batches;
    Batch cur;
    int cur_doc = -1;

    auto flush = [&]() {
        if (cur.sentence_index.empty()) return;
        cur.max_len = 0;
        for (const auto& t : cur.tokens)
            cur.max_len = std::max(cur.max_len, static_cast<int>(t.size()));
        for (size_t r = 0; r < cur.tokens.size(); ++r) {
            int n = static_cast<int>(cur.tokens[r].size());
            cur.token_ids[r].resize(static_cast<size_t>(cur.max_len), Vocab::kPad);
            cur.mask[r].resize(static_cast<size_t>(cur.max_len), 0);
            if (!cur.gold_tag_ids[r].empty())
                cur.gold_tag_ids[r].resize(static_cast<size_t>(cur.max_len), -1);
            (void)n;
        }
        batches.push_back(std::move(cur));
        cur = Batch{};
        cur_doc = -1;
    };

    for (int si : idx) {
        const Sentence& s = sentences[static_cast<size_t>(si)];
        bool full = static_cast<int>(cur.sentence_index.size()) >= batch_size;
        bool doc_break = scope == PoolScope::Document && cur_doc != -1 && s.doc_id != cur_doc;
        if (full || doc_break) flush();
        cur_doc = s.doc_id;
        cur.sentence_index.push_back(si);
        cur.tokens.push_back(s.tokens);
        std::vector<int> ids;
        ids.reserve(s.tokens.size());
        for (const std::string& tok : s.tokens) ids.push_back(vocab.lookup(tok));
        cur.token_ids.push_back(std::move(ids));
        cur.mask.emplace_back(s.tokens.size(), 1);
        std::vector<int> gold;
        if (!s.gold_bmeos.empty()) {
            gold.reserve(s.gold_bmeos.size());
            for (const std::string& tag : s.gold_bmeos) {
                int id = tagset.id_from_name(tag);
                if (id < 0) throw ContractError("tag '" + tag + "' not in the tag set");
                gold.push_back(id);
            }
        }
        cur.gold_tag_ids.push_back(std::move(gold));
    }
    flush();
    return batches;
}

std::vector<int> epoch_order(const std::vector<Sentence>& sentences, PoolScope scope, Rng& rng) {
    std::vector<int> order(sentences.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    if (scope == PoolScope::MiniBatch) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        return order;
    }
    // Document scope: shuffle contiguous doc groups, keep inner order.
    std::vector<std::pair<int, int>> groups;  // [begin, end)
    int begin = 0;
    for (size_t i = 1; i <= sentences.size(); ++i) {
        if (i == sentences.size() || sentences[i].doc_id != sentences[i - 1].doc_id) {
            groups.emplace_back(begin, static_cast<int>(i));
            begin = static_cast<int>(i);
        }
    }
    std::shuffle(groups.begin(), groups.end(), rng.engine());
    std::vector<int> out;
    out.reserve(order.size());
    for (auto [b, e] : groups)
        for (int i = b; i < e; ++i) out.push_back(i);
    return out;
}

}  // namespace ner
