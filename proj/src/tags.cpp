#include "ner/tags.h"

#include <algorithm>

#include "ner/error.h"

namespace ner {

TagSet TagSet::from_types(std::vector<std::string> types) {
    std::sort(types.begin(), types.end());
    auto last = std::unique(types.begin(), types.end());
    types.erase(last, types.end());
    for (const auto& t : types) {
        if (t.empty()) throw ContractError("empty entity type name");
    }
    TagSet ts;
    ts.types_ = std::move(types);
    return ts;
}

int TagSet::id(BmeosKind kind, int type_index) const {
    if (kind == BmeosKind::O) return 0;
    if (type_index < 0 || type_index >= num_types())
        throw ContractError("type index out of range: " + std::to_string(type_index));
    int offset = 0;
    switch (kind) {
        case BmeosKind::B: offset = 0; break;
        case BmeosKind::M: offset = 1; break;
        case BmeosKind::E: offset = 2; break;
        case BmeosKind::S: offset = 3; break;
        default: break;
    }
    return 1 + 4 * type_index + offset;
}

BmeosKind TagSet::kind(int tag_id) const {
    if (tag_id == 0) return BmeosKind::O;
    if (tag_id < 0 || tag_id >= size())
        throw ContractError("tag id out of range: " + std::to_string(tag_id));
    switch ((tag_id - 1) % 4) {
        case 0: return BmeosKind::B;
        case 1: return BmeosKind::M;
        case 2: return BmeosKind::E;
        default: return BmeosKind::S;
    }
}

int TagSet::type_index(int tag_id) const {
    if (tag_id == 0) return -1;
    if (tag_id < 0 || tag_id >= size())
        throw ContractError("tag id out of range: " + std::to_string(tag_id));
    return (tag_id - 1) / 4;
}

std::string TagSet::name(int tag_id) const {
    if (tag_id == 0) return "O";
    BmeosKind k = kind(tag_id);
    const std::string& type = types_[static_cast<size_t>(type_index(tag_id))];
    char prefix = 'B';
    switch (k) {
        case BmeosKind::B: prefix = 'B'; break;
        case BmeosKind::M: prefix = 'M'; break;
        case BmeosKind::E: prefix = 'E'; break;
        case BmeosKind::S: prefix = 'S'; break;
        default: break;
    }
    return std::string(1, prefix) + "-" + type;
}

int TagSet::id_from_name(const std::string& name) const {
    if (name == "O") return 0;
    BmeosKind k;
    std::string type;
    if (!parse_tag_name(name, &k, &type)) return -1;
    auto it = std::lower_bound(types_.begin(), types_.end(), type);
    if (it == types_.end() || *it != type) return -1;
    return id(k, static_cast<int>(it - types_.begin()));
}

bool parse_tag_name(const std::string& tag, BmeosKind* kind, std::string* type) {
    if (tag == "O") {
        *kind = BmeosKind::O;
        type->clear();
        return true;
    }
    if (tag.size() < 3 || tag[1] != '-') return false;
    switch (tag[0]) {
        case 'B': *kind = BmeosKind::B; break;
        case 'M': *kind = BmeosKind::M; break;
        case 'I': *kind = BmeosKind::M; break;
        case 'E': *kind = BmeosKind::E; break;
        case 'S': *kind = BmeosKind::S; break;
        default: return false;
    }
    *type = tag.substr(2);
    return !type->empty();
}

namespace {

struct Run {
    int begin;
    int end;  // inclusive
    std::string type;
};

// Entity runs from IOB tags. IOB1 vs IOB2 does not need explicit
// detection: a token starts a new run iff it is B-X, or I-X when the
// previous token is not inside a run of type X.
std::vector<Run> iob_runs(const std::vector<std::string>& tags,
                          std::vector<std::string>* warnings) {
    std::vector<Run> runs;
    for (size_t i = 0; i < tags.size(); ++i) {
        const std::string& tag = tags[i];
        if (tag == "O") continue;
        if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I'))
            throw ParseError("unrecognized tag '" + tag + "' at token " + std::to_string(i));
        std::string type = tag.substr(2);
        bool cont = tag[0] == 'I' && !runs.empty() &&
                    runs.back().end == static_cast<int>(i) - 1 && runs.back().type == type;
        if (cont) {
            runs.back().end = static_cast<int>(i);
        } else {
            if (tag[0] == 'I' && !runs.empty() && runs.back().end == static_cast<int>(i) - 1 &&
                warnings != nullptr) {
                warnings->push_back("token " + std::to_string(i) + ": I-" + type +
                                    " continues a " + runs.back().type +
                                    " run; starting a new entity");
            }
            runs.push_back({static_cast<int>(i), static_cast<int>(i), std::move(type)});
        }
    }
    return runs;
}

}  // namespace

std::vector<std::string> to_bmeos(const std::vector<std::string>& iob_tags,
                                  std::vector<std::string>* warnings) {
    std::vector<std::string> out(iob_tags.size(), "O");
    for (const Run& run : iob_runs(iob_tags, warnings)) {
        if (run.begin == run.end) {
            out[static_cast<size_t>(run.begin)] = "S-" + run.type;
        } else {
            out[static_cast<size_t>(run.begin)] = "B-" + run.type;
            for (int i = run.begin + 1; i < run.end; ++i)
                out[static_cast<size_t>(i)] = "M-" + run.type;
            out[static_cast<size_t>(run.end)] = "E-" + run.type;
        }
    }
    return out;
}

std::vector<std::string> from_bmeos(const std::vector<std::string>& bmeos_tags) {
    std::vector<std::string> out;
    out.reserve(bmeos_tags.size());
    for (const std::string& tag : bmeos_tags) {
        if (tag == "O") {
            out.push_back("O");
            continue;
        }
        BmeosKind k;
        std::string type;
        if (!parse_tag_name(tag, &k, &type))
            throw ParseError("unrecognized tag '" + tag + "'");
        switch (k) {
            case BmeosKind::B:
            case BmeosKind::S: out.push_back("B-" + type); break;
            case BmeosKind::M:
            case BmeosKind::E: out.push_back("I-" + type); break;
            default: out.push_back("O"); break;
        }
    }
    return out;
}

bool looks_like_bmeos(const std::vector<std::string>& tags) {
    for (const std::string& tag : tags) {
        if (tag.size() >= 2 && tag[1] == '-' &&
            (tag[0] == 'M' || tag[0] == 'E' || tag[0] == 'S'))
            return true;
    }
    return false;
}

}  // namespace ner
