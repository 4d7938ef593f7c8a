#include "ner/memory.h"

#include <ostream>

#include "ner/error.h"

namespace ner {

std::vector<EntitySpan> extract_spans(const std::vector<int>& tag_ids, const TagSet& tags,
                                      int sentence) {
    std::vector<EntitySpan> spans;
    int open_begin = -1;
    int open_type = -1;
    int open_last = -1;  // last token known to belong to the open span

    auto close_open = [&]() {
        if (open_begin >= 0) {
            spans.push_back({sentence, open_begin, open_last, open_type});
            open_begin = open_type = open_last = -1;
        }
    };

    for (size_t t = 0; t < tag_ids.size(); ++t) {
        int id = tag_ids[t];
        BmeosKind k = tags.kind(id);
        int type = tags.type_index(id);
        int pos = static_cast<int>(t);
        switch (k) {
            case BmeosKind::O:
                close_open();
                break;
            case BmeosKind::S:
                close_open();
                spans.push_back({sentence, pos, pos, type});
                break;
            case BmeosKind::B:
                close_open();
                open_begin = pos;
                open_type = type;
                open_last = pos;
                break;
            case BmeosKind::M:
                if (open_begin >= 0 && open_type == type) {
                    open_last = pos;
                } else {
                    close_open();
                    open_begin = pos;
                    open_type = type;
                    open_last = pos;
                }
                break;
            case BmeosKind::E:
                if (open_begin >= 0 && open_type == type) {
                    spans.push_back({sentence, open_begin, pos, type});
                    open_begin = open_type = open_last = -1;
                } else {
                    close_open();
                    spans.push_back({sentence, pos, pos, type});
                }
                break;
        }
    }
    close_open();
    return spans;
}

CandidatePool build_pool(const std::vector<std::vector<EntitySpan>>& spans_per_sentence,
                         const std::vector<EncoderStates>& states, const Tape& tape) {
    if (spans_per_sentence.size() != states.size())
        throw ContractError("span groups and state groups differ in count");

    CandidatePool pool;
    for (const auto& group : spans_per_sentence)
        for (const EntitySpan& s : group) pool.spans.push_back(s);

    int n = static_cast<int>(pool.spans.size());
    if (n == 0) return pool;  // matrices stay empty, count() is 0
    int d = 0;
    for (const EncoderStates& st : states)
        if (!st.h_f.empty()) {
            d = static_cast<int>(tape.value(st.h_f[0]).size());
            break;
        }
    pool.r_fc = Tensor::zeros({n, d});
    pool.r_eb = Tensor::zeros({n, d});
    pool.r_ee = Tensor::zeros({n, d});
    pool.r_bc = Tensor::zeros({n, d});

    int row = 0;
    for (size_t g = 0; g < spans_per_sentence.size(); ++g) {
        const EncoderStates& st = states[g];
        for (const EntitySpan& s : spans_per_sentence[g]) {
            int len = static_cast<int>(st.h_f.size());
            if (s.begin < 0 || s.end < s.begin || s.end >= len)
                throw ContractError("span [" + std::to_string(s.begin) + ", " +
                                    std::to_string(s.end) + "] outside sentence of length " +
                                    std::to_string(len));
            const Tensor& fb = tape.value(st.h_f[static_cast<size_t>(s.begin)]);
            const Tensor& bb = tape.value(st.h_b[static_cast<size_t>(s.begin)]);
            const Tensor& fe = tape.value(st.h_f[static_cast<size_t>(s.end)]);
            const Tensor& be = tape.value(st.h_b[static_cast<size_t>(s.end)]);
            for (int j = 0; j < d; ++j) {
                pool.r_fc.at(row, j) = fb.values[static_cast<size_t>(j)];
                pool.r_eb.at(row, j) = bb.values[static_cast<size_t>(j)];
                pool.r_ee.at(row, j) = fe.values[static_cast<size_t>(j)];
                pool.r_bc.at(row, j) = be.values[static_cast<size_t>(j)];
            }
            ++row;
        }
    }
    return pool;
}

CandidatePool update_pool(const std::vector<std::vector<EntitySpan>>& spans_per_sentence,
                          const std::vector<EncoderStates>& states, const Tape& tape) {
    return build_pool(spans_per_sentence, states, tape);
}

void dump_pool(std::ostream& out, const CandidatePool& pool, const TagSet& tags) {
    out << "pool: " << pool.count() << " span(s), dim " << pool.dim() << "\n";
    for (int i = 0; i < pool.count(); ++i) {
        const EntitySpan& s = pool.spans[static_cast<size_t>(i)];
        out << "  [" << i << "] sent " << s.sentence << " tokens " << s.begin << ".." << s.end
            << " " << tags.types()[static_cast<size_t>(s.type)] << "\n";
    }
}

}  // namespace ner
