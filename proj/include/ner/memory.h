#pragma once

#include <iosfwd>
#include <vector>

#include "ner/encoder.h"
#include "ner/tags.h"
#include "ner/tensor.h"

namespace ner {

struct EntitySpan {
    int sentence = 0;
    int begin = 0;  // token index, inclusive
    int end = 0;    // token index, inclusive
    int type = 0;   // index into TagSet::types()

    friend bool operator==(const EntitySpan& a, const EntitySpan& b) {
        return a.sentence == b.sentence && a.begin == b.begin && a.end == b.end &&
               a.type == b.type;
    }
};

// Entity spans from a predicted tag sequence. Predictions need not be
// well-formed; the reading is total and deterministic:
//   S        one-token span
//   B        opens a span
//   M, E     continue an open span of the same type; E also closes it
//   M, E     with no open span (or the wrong type) open a new one; that
//            E closes immediately
//   a run still open when the type changes or the sentence ends closes
//   at the last token of the run
std::vector<EntitySpan> extract_spans(const std::vector<int>& tag_ids, const TagSet& tags,
                                      int sentence = 0);

// Recognized spans plus a fixed feature row per span: the encoder's
// boundary states, copied by value. Row k of each matrix belongs to
// spans[k].
struct CandidatePool {
    Tensor r_fc;  // {N, d} forward state at span begin
    Tensor r_eb;  // {N, d} backward state at span begin
    Tensor r_ee;  // {N, d} forward state at span end
    Tensor r_bc;  // {N, d} backward state at span end
    std::vector<EntitySpan> spans;

    int count() const { return static_cast<int>(spans.size()); }
    int dim() const { return r_fc.ndim() == 2 ? r_fc.cols() : 0; }
};

// Pool over one layer's output for a group of sentences. The rows are
// snapshots: gradients never flow into the encoder through them.
CandidatePool build_pool(const std::vector<std::vector<EntitySpan>>& spans_per_sentence,
                         const std::vector<EncoderStates>& states, const Tape& tape);

// The pool after a layer is simply rebuilt from that layer's output.
CandidatePool update_pool(const std::vector<std::vector<EntitySpan>>& spans_per_sentence,
                          const std::vector<EncoderStates>& states, const Tape& tape);

void dump_pool(std::ostream& out, const CandidatePool& pool, const TagSet& tags);

}  // namespace ner
