#include "ner/eval.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "ner/error.h"
#include "ner/memory.h"

namespace ner {

double EvalCounts::precision() const {
    return predicted == 0 ? 0.0 : static_cast<double>(matched) / predicted;
}

double EvalCounts::recall() const {
    return gold == 0 ? 0.0 : static_cast<double>(matched) / gold;
}

double EvalCounts::f1() const {
    double p = precision();
    double r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

namespace {

bool span_less(const EntitySpan& a, const EntitySpan& b) {
    if (a.sentence != b.sentence) return a.sentence < b.sentence;
    if (a.begin != b.begin) return a.begin < b.begin;
    if (a.end != b.end) return a.end < b.end;
    return a.type < b.type;
}

}  // namespace

EvalReport entity_f1(const std::vector<std::vector<int>>& gold_tags,
                     const std::vector<std::vector<int>>& pred_tags, const TagSet& tags) {
    if (gold_tags.size() != pred_tags.size())
        throw ContractError("gold and prediction differ in sentence count");

    std::vector<EntitySpan> gold;
    std::vector<EntitySpan> pred;
    for (size_t s = 0; s < gold_tags.size(); ++s) {
        if (gold_tags[s].size() != pred_tags[s].size())
            throw ContractError("sentence " + std::to_string(s) +
                                ": gold and prediction differ in length");
        int sid = static_cast<int>(s);
        for (const EntitySpan& e : extract_spans(gold_tags[s], tags, sid)) gold.push_back(e);
        for (const EntitySpan& e : extract_spans(pred_tags[s], tags, sid)) pred.push_back(e);
    }
    std::sort(gold.begin(), gold.end(), span_less);
    std::sort(pred.begin(), pred.end(), span_less);

    EvalReport report;
    report.counts.gold = static_cast<int>(gold.size());
    report.counts.predicted = static_cast<int>(pred.size());

    std::map<int, EvalCounts> per_type;
    for (const EntitySpan& e : gold) ++per_type[e.type].gold;
    for (const EntitySpan& e : pred) ++per_type[e.type].predicted;

    size_t i = 0;
    size_t j = 0;
    while (i < gold.size() && j < pred.size()) {
        if (gold[i] == pred[j]) {
            ++report.counts.matched;
            ++per_type[gold[i].type].matched;
            ++i;
            ++j;
        } else if (span_less(gold[i], pred[j])) {
            ++i;
        } else {
            ++j;
        }
    }
    for (const auto& [type_index, c] : per_type)
        report.by_type.emplace_back(tags.types()[static_cast<size_t>(type_index)], c);
    return report;
}

std::string format_percent(double fraction) {
    double percent = fraction * 100.0;
    // Half away from zero at the second decimal.
    double scaled = percent * 100.0;
    double rounded = scaled >= 0.0 ? std::floor(scaled + 0.5) : std::ceil(scaled - 0.5);
    long long cents = static_cast<long long>(rounded);
    std::ostringstream out;
    if (cents < 0) {
        out << '-';
        cents = -cents;
    }
    out << cents / 100 << '.';
    long long frac = cents % 100;
    out << (frac / 10) << (frac % 10);
    return out.str();
}

void print_report(std::ostream& out, const std::string& label, const EvalReport& report) {
    out << label << ": precision " << format_percent(report.precision()) << " recall "
        << format_percent(report.recall()) << " f1 " << format_percent(report.f1()) << " ("
        << report.counts.matched << '/' << report.counts.predicted << " predicted, "
        << report.counts.gold << " gold)\n";
    for (const auto& [type, c] : report.by_type)
        out << "  " << type << ": precision " << format_percent(c.precision()) << " recall "
            << format_percent(c.recall()) << " f1 " << format_percent(c.f1()) << " ("
            << c.matched << '/' << c.predicted << " predicted, " << c.gold << " gold)\n";
}

std::vector<std::vector<int>> gold_tag_ids(const std::vector<Sentence>& sentences,
                                           const TagSet& tags) {
    std::vector<std::vector<int>> out;
    out.reserve(sentences.size());
    for (const Sentence& s : sentences) {
        std::vector<int> row;
        row.reserve(s.gold_bmeos.size());
        for (const std::string& tag : s.gold_bmeos) {
            int id = tags.id_from_name(tag);
            if (id < 0) throw ContractError("tag '" + tag + "' not in the tag set");
            row.push_back(id);
        }
        out.push_back(std::move(row));
    }
    return out;
}

double token_accuracy(const std::vector<std::vector<int>>& gold,
                      const std::vector<std::vector<int>>& pred) {
    if (gold.size() != pred.size())
        throw ContractError("gold and prediction differ in sentence count");
    long long total = 0;
    long long hit = 0;
    for (size_t s = 0; s < gold.size(); ++s) {
        if (gold[s].size() != pred[s].size())
            throw ContractError("sentence " + std::to_string(s) +
                                ": gold and prediction differ in length");
        for (size_t t = 0; t < gold[s].size(); ++t) {
            ++total;
            if (gold[s][t] == pred[s][t]) ++hit;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(total);
}

std::vector<ChangedMention> layer_diff(const ForwardResult& fwd,
                                       const std::vector<int>& sentence_ids) {
    std::vector<ChangedMention> changes;
    for (size_t layer = 1; layer < fwd.layers.size(); ++layer) {
        const LayerStep& prev = fwd.layers[layer - 1];
        const LayerStep& cur = fwd.layers[layer];
        for (size_t s = 0; s < cur.tags.size(); ++s) {
            for (size_t t = 0; t < cur.tags[s].size(); ++t) {
                if (cur.tags[s][t] == prev.tags[s][t]) continue;
                ChangedMention ch;
                ch.layer = static_cast<int>(layer) + 1;
                ch.sentence =
                    s < sentence_ids.size() ? sentence_ids[s] : static_cast<int>(s);
                ch.position = static_cast<int>(t);
                ch.tag_before = prev.tags[s][t];
                ch.tag_after = cur.tags[s][t];
                ch.refs = cur.refs[s][t];

                const ReferenceDetail& d = ch.refs;
                double best = d.s.s_fc;
                int arg = d.arg_fc;
                if (d.s.s_eb > best) { best = d.s.s_eb; arg = d.arg_eb; }
                if (d.s.s_ee > best) { best = d.s.s_ee; arg = d.arg_ee; }
                if (d.s.s_bc > best) { best = d.s.s_bc; arg = d.arg_bc; }
                const CandidatePool& pool = prev.pool;
                if (arg >= 0 && arg < pool.count()) {
                    ch.matched = pool.spans[static_cast<size_t>(arg)];
                    ch.has_match = true;
                }
                changes.push_back(std::move(ch));
            }
        }
    }
    return changes;
}

void print_changes(std::ostream& out, const std::vector<ChangedMention>& changes,
                   const TagSet& tags) {
    for (const ChangedMention& ch : changes) {
        out << "layer " << ch.layer << " sentence " << ch.sentence << " token " << ch.position
            << ": " << tags.name(ch.tag_before) << " -> " << tags.name(ch.tag_after)
            << "  scores fc=" << format_percent(ch.refs.s.s_fc)
            << " eb=" << format_percent(ch.refs.s.s_eb)
            << " ee=" << format_percent(ch.refs.s.s_ee)
            << " bc=" << format_percent(ch.refs.s.s_bc);
        if (ch.has_match) {
            out << "  via sent " << ch.matched.sentence << " [" << ch.matched.begin << ".."
                << ch.matched.end << "] " << tags.types()[static_cast<size_t>(ch.matched.type)];
        }
        out << "\n";
    }
}

}  // namespace ner
