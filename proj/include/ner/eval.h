#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ner/conll.h"
#include "ner/model.h"
#include "ner/tags.h"

namespace ner {

struct EvalCounts {
    int gold = 0;
    int predicted = 0;
    int matched = 0;

    double precision() const;  // matched / predicted, 0 when nothing predicted
    double recall() const;     // matched / gold, 0 when no gold entities
    double f1() const;         // harmonic mean, 0 when p + r == 0
};

struct EvalReport {
    EvalCounts counts;
    // Per entity type, ordered by type name. Only types with at least
    // one gold or predicted span appear.
    std::vector<std::pair<std::string, EvalCounts>> by_type;

    double precision() const { return counts.precision(); }
    double recall() const { return counts.recall(); }
    double f1() const { return counts.f1(); }
};

// Entity-level scores: a prediction counts iff its (sentence, begin,
// end, type) tuple exactly matches a gold span, and each gold span can
// be matched at most once.
EvalReport entity_f1(const std::vector<std::vector<int>>& gold_tags,
                     const std::vector<std::vector<int>>& pred_tags, const TagSet& tags);

// A fraction as a percentage with two decimals, rounding half away
// from zero: 0.5 -> "50.00".
std::string format_percent(double fraction);

void print_report(std::ostream& out, const std::string& label, const EvalReport& report);

// Gold tag ids per sentence; sentences without tags yield empty rows.
std::vector<std::vector<int>> gold_tag_ids(const std::vector<Sentence>& sentences,
                                           const TagSet& tags);

// Accuracy over all tokens of equally-shaped tag grids.
double token_accuracy(const std::vector<std::vector<int>>& gold,
                      const std::vector<std::vector<int>>& pred);

// One token whose tag a layer changed, with the evidence that layer
// consulted. `matched` is the pool span behind the strongest of the
// four scores; absent when the pool was empty or the scores were forced.
struct ChangedMention {
    int layer = 0;  // 1-based index of the layer that changed the tag
    int sentence = 0;
    int position = 0;
    int tag_before = 0;
    int tag_after = 0;
    ReferenceDetail refs;
    EntitySpan matched;
    bool has_match = false;
};

// All tag changes between consecutive layers of one forward pass.
// `sentence_ids` maps batch-relative rows to corpus positions.
std::vector<ChangedMention> layer_diff(const ForwardResult& fwd,
                                       const std::vector<int>& sentence_ids);

void print_changes(std::ostream& out, const std::vector<ChangedMention>& changes,
                   const TagSet& tags);

}  // namespace ner
