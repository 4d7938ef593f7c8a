#pragma once

#include <string>
#include <vector>

namespace ner {

enum class BmeosKind { O, B, M, E, S };

// The BMEOS tag alphabet over a fixed set of entity types.
// Id layout: 0 = O, then per type a (B, M, E, S) block.
class TagSet {
  public:
    static TagSet from_types(std::vector<std::string> types);

    int size() const { return 1 + 4 * static_cast<int>(types_.size()); }
    int o_id() const { return 0; }
    int num_types() const { return static_cast<int>(types_.size()); }
    const std::vector<std::string>& types() const { return types_; }

    int id(BmeosKind kind, int type_index) const;
    BmeosKind kind(int tag_id) const;
    int type_index(int tag_id) const;  // -1 for O

    std::string name(int tag_id) const;           // "O", "B-PER", ...
    int id_from_name(const std::string& name) const;  // -1 if not in the set

  private:
    std::vector<std::string> types_;
};

// Splits "B-ORG" into kind and type string. "O" gives (O, ""). Returns
// false for strings that are not of that shape.
bool parse_tag_name(const std::string& tag, BmeosKind* kind, std::string* type);

// IOB1/IOB2 (auto-detected) to BMEOS. Every maximal entity run becomes
// S or B,M...,E; O is preserved. A type switch inside a run starts a new
// run and appends a note to `warnings` when given.
std::vector<std::string> to_bmeos(const std::vector<std::string>& iob_tags,
                                  std::vector<std::string>* warnings = nullptr);

// BMEOS to IOB2; inverse of to_bmeos on valid input.
std::vector<std::string> from_bmeos(const std::vector<std::string>& bmeos_tags);

// True if any tag uses an M-/E-/S- prefix, i.e. is already BMEOS.
bool looks_like_bmeos(const std::vector<std::string>& tags);

}  // namespace ner
