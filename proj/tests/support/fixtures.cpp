#include "support/fixtures.h"

#include <cctype>
#include <set>
#include <string>

namespace fixtures {

namespace {

const char* kConsonants[] = {"b", "d", "f", "g", "k", "l", "m",
                             "n", "p", "r", "s", "t", "v", "z"};
const char* kVowels[] = {"a", "e", "i", "o", "u"};

std::string syllable(ner::Rng& rng) {
    std::string s = kConsonants[rng.uniform_int(0, 13)];
    s += kVowels[rng.uniform_int(0, 4)];
    return s;
}

std::string cap_word(ner::Rng& rng, int syllables) {
    std::string w;
    for (int i = 0; i < syllables; ++i) w += syllable(rng);
    w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    return w;
}

// Name-shaped words drawn from one generator so surface shape never
// separates entities from non-entities.
std::string fresh_cap_word(ner::Rng& rng, std::set<std::string>& used) {
    while (true) {
        std::string w = cap_word(rng, rng.uniform_int(2, 3));
        if (used.insert(w).second) return w;
    }
}

struct SentenceBuilder {
    ner::Sentence s;

    void add(const std::string& token, const std::string& tag) {
        s.tokens.push_back(token);
        s.gold_bmeos.push_back(tag);
    }
    void words(std::initializer_list<const char*> tokens) {
        for (const char* t : tokens) add(t, "O");
    }
    void entity(const std::vector<std::string>& tokens, const std::string& type) {
        if (tokens.size() == 1) {
            add(tokens[0], "S-" + type);
            return;
        }
        add(tokens[0], "B-" + type);
        for (size_t i = 1; i + 1 < tokens.size(); ++i) add(tokens[i], "M-" + type);
        add(tokens.back(), "E-" + type);
    }
};

}  // namespace

std::string fresh_name(ner::Rng& rng, std::set<std::string>& used) {
    return fresh_cap_word(rng, used);
}

std::vector<ner::Sentence> overfit_corpus(ner::Rng& rng) {
    std::set<std::string> used;
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> orgs;
    std::vector<std::string> locs;
    for (int i = 0; i < 36; ++i) names.push_back(fresh_cap_word(rng, used));
    for (int i = 0; i < 20; ++i) {
        std::vector<std::string> org = {fresh_cap_word(rng, used)};
        if (i % 2 == 0) org.push_back(i % 4 == 0 ? "Group" : "Labs");
        orgs.push_back(org);
    }
    for (int i = 0; i < 20; ++i) locs.push_back(fresh_cap_word(rng, used));

    // Round-robin draws so every pooled word is realized in the corpus.
    size_t name_i = 0;
    size_t org_i = 0;
    size_t loc_i = 0;
    auto name = [&]() { return names[name_i++ % names.size()]; };
    auto org = [&]() { return orgs[org_i++ % orgs.size()]; };
    auto loc = [&]() { return locs[loc_i++ % locs.size()]; };

    std::vector<ner::Sentence> corpus;
    for (int i = 0; i < 50; ++i) {
        SentenceBuilder b;
        switch (i % 10) {
            case 0:
                b.entity({name()}, "PER");
                b.words({"works", "at"});
                b.entity(org(), "ORG");
                b.words({"."});
                break;
            case 1:
                b.entity({name()}, "PER");
                b.words({"visited"});
                b.entity({loc()}, "LOC");
                b.words({"last", "week", "."});
                break;
            case 2:
                b.words({"the"});
                b.entity(org(), "ORG");
                b.words({"office", "in"});
                b.entity({loc()}, "LOC");
                b.words({"closed", "."});
                break;
            case 3:
                b.entity({name()}, "PER");
                b.words({"and"});
                b.entity({name()}, "PER");
                b.words({"met", "in"});
                b.entity({loc()}, "LOC");
                b.words({"."});
                break;
            case 4:
                b.entity(org(), "ORG");
                b.words({"hired"});
                b.entity({name()}, "PER");
                b.words({"as", "chief", "analyst", "."});
                break;
            case 5:
                b.entity({name()}, "PER");
                b.words({"traveled", "from"});
                b.entity({loc()}, "LOC");
                b.words({"to"});
                b.entity({loc()}, "LOC");
                b.words({"by", "train", "."});
                break;
            case 6:
                b.words({"reporters", "gathered", "outside", "the"});
                b.entity(org(), "ORG");
                b.words({"building", "."});
                break;
            case 7:
                b.entity({name()}, "PER");
                b.words({"spoke", "with"});
                b.entity({name()}, "PER");
                b.words({"about", "the", "merger", "."});
                break;
            case 8:
                b.words({"winters", "in"});
                b.entity({loc()}, "LOC");
                b.words({"feel", "long", "and", "quiet", "."});
                break;
            default:
                b.words({"nothing", "unusual", "happened", "today", "."});
                break;
        }
        b.s.doc_id = i;
        corpus.push_back(std::move(b.s));
    }
    return corpus;
}

ner::ModelConfig overfit_config(unsigned long seed) {
    ner::ModelConfig cfg;
    cfg.word_emb_dim = 24;
    cfg.char_emb_dim = 12;
    cfg.char_filters = 12;
    cfg.bilstm_state = 32;
    cfg.decoder_state = 32;
    // Four supervised decode passes over shared parameters and a hot
    // start: together they buy memorization inside the 800-update
    // budget (200 epochs, 4 batches of 16).
    cfg.depth = 4;
    cfg.loss_mode = "all_layers";
    cfg.feedback_gold = true;
    cfg.init_scale = 8.0;
    cfg.batch_size = 16;
    cfg.learning_rate = 0.01;
    cfg.max_epochs = 200;
    cfg.patience = 200;
    cfg.seed = seed;
    return cfg;
}

namespace {

struct NamePools {
    std::vector<std::string> recurring;   // appear in two documents each
    std::vector<std::string> rare;        // one document each
    std::vector<std::string> dev_names;
    std::vector<std::string> heldout_names;
    std::vector<std::string> closed_o;    // frequent capitalized non-entities
};

ner::Sentence decisive(ner::Rng& rng, const std::string& name) {
    SentenceBuilder b;
    switch (rng.uniform_int(0, 2)) {
        case 0:
            b.entity({name}, "PER");
            b.words({"said", "hello", "to", "everyone"});
            break;
        case 1:
            b.words({"minister"});
            b.entity({name}, "PER");
            b.words({"spoke", "briefly"});
            break;
        default:
            b.entity({name}, "PER");
            b.words({"smiled", "and", "waved"});
            break;
    }
    return b.s;
}

// Either slot fits a person or a plain word; only wider context tells.
ner::Sentence ambiguous(ner::Rng& rng, const std::string& slot_word, bool slot_is_name,
                        const std::string& other_o) {
    SentenceBuilder b;
    bool slot_first = rng.bernoulli(0.5);
    bool variant = rng.bernoulli(0.5);
    auto put = [&](const std::string& w, bool is_name) {
        if (is_name)
            b.entity({w}, "PER");
        else
            b.add(w, "O");
    };
    if (variant) b.words({"both"});
    put(slot_first ? slot_word : other_o, slot_first && slot_is_name);
    b.words({"and"});
    put(slot_first ? other_o : slot_word, !slot_first && slot_is_name);
    if (variant)
        b.words({"stayed", "outside"});
    else
        b.words({"went", "home", "early"});
    return b.s;
}

ner::Sentence neutral(ner::Rng& rng) {
    SentenceBuilder b;
    if (rng.bernoulli(0.5))
        b.words({"it", "rained", "all", "afternoon"});
    else
        b.words({"the", "meeting", "ended", "late"});
    return b.s;
}

void push_doc(std::vector<ner::Sentence>& out, ner::Rng& rng, int* next_doc,
              ner::Sentence first, ner::Sentence second) {
    if (rng.bernoulli(0.5)) std::swap(first, second);
    first.doc_id = *next_doc;
    second.doc_id = *next_doc;
    ++*next_doc;
    out.push_back(std::move(first));
    out.push_back(std::move(second));
}

// A document pairing a decisive mention with an ambiguous one.
void paired_doc(std::vector<ner::Sentence>& out, ner::Rng& rng, int* next_doc,
                const std::string& name, const NamePools& pools) {
    const std::string& o_word =
        pools.closed_o[static_cast<size_t>(rng.uniform_int(
            0, static_cast<int>(pools.closed_o.size()) - 1))];
    push_doc(out, rng, next_doc, decisive(rng, name), ambiguous(rng, name, true, o_word));
}

}  // namespace

ConsistencySets consistency_corpus(ner::Rng& rng) {
    std::set<std::string> used;
    NamePools pools;
    for (int i = 0; i < 100; ++i) pools.recurring.push_back(fresh_cap_word(rng, used));
    for (int i = 0; i < 100; ++i) pools.rare.push_back(fresh_cap_word(rng, used));
    for (int i = 0; i < 50; ++i) pools.dev_names.push_back(fresh_cap_word(rng, used));
    for (int i = 0; i < 100; ++i) pools.heldout_names.push_back(fresh_cap_word(rng, used));
    for (int i = 0; i < 12; ++i) pools.closed_o.push_back(fresh_cap_word(rng, used));

    ConsistencySets sets;
    int next_doc = 0;

    // Recurring names: two paired documents each.
    for (const std::string& name : pools.recurring) {
        paired_doc(sets.train, rng, &next_doc, name, pools);
        paired_doc(sets.train, rng, &next_doc, name, pools);
    }
    // Rare names: one paired document; the name falls below the
    // vocabulary cutoff, so only characters and the pool identify it.
    for (const std::string& name : pools.rare)
        paired_doc(sets.train, rng, &next_doc, name, pools);
    // Name-shaped non-entities in the ambiguous frame, with no decisive
    // sibling: the counterweight that keeps rare capitalized words from
    // defaulting to person. Brings the training set to 500 documents.
    for (int i = 0; i < 200; ++i) {
        std::string fake = fresh_cap_word(rng, used);
        const std::string& o_word =
            pools.closed_o[static_cast<size_t>(rng.uniform_int(0, 11))];
        push_doc(sets.train, rng, &next_doc, ambiguous(rng, fake, false, o_word),
                 neutral(rng));
    }

    for (const std::string& name : pools.dev_names)
        paired_doc(sets.dev, rng, &next_doc, name, pools);
    for (const std::string& name : pools.heldout_names)
        paired_doc(sets.heldout, rng, &next_doc, name, pools);
    return sets;
}

ner::ModelConfig consistency_config(unsigned long seed) {
    ner::ModelConfig cfg;
    cfg.word_emb_dim = 20;
    cfg.char_emb_dim = 12;
    cfg.char_filters = 12;
    cfg.bilstm_state = 30;
    cfg.decoder_state = 30;
    cfg.depth = 2;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.01;
    cfg.init_scale = 6.0;
    cfg.feedback_gold = true;
    cfg.loss_mode = "all_layers";
    cfg.pool_scope = "document";
    cfg.vocab_min_count = 3;
    cfg.max_epochs = 60;
    cfg.patience = 60;
    cfg.seed = seed;
    return cfg;
}

ner::ModelConfig tiny_config(unsigned long seed) {
    ner::ModelConfig cfg;
    cfg.word_emb_dim = 6;
    cfg.char_emb_dim = 4;
    cfg.char_filters = 5;
    cfg.bilstm_state = 5;
    cfg.decoder_state = 7;
    cfg.depth = 2;
    cfg.batch_size = 4;
    cfg.seed = seed;
    return cfg;
}

}  // namespace fixtures
