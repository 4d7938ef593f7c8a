#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ner/tensor.h"

namespace ner {

// Ordered registry of named trainable tensors. Order is fixed by
// registration, which keeps serialization byte-stable across runs.
class ParamStore {
  public:
    TensorPtr add(const std::string& name, Tensor init);
    TensorPtr get(const std::string& name) const;  // throws if absent
    bool has(const std::string& name) const;
    const std::vector<std::pair<std::string, TensorPtr>>& items() const { return items_; }
    std::vector<TensorPtr> tensors() const;
    size_t size() const { return items_.size(); }

  private:
    std::vector<std::pair<std::string, TensorPtr>> items_;
};

// Self-describing binary checkpoint: magic, version, string metadata
// (config, vocabularies), then per-parameter records of name, shape and
// row-major values. Double round trips are bit-exact.
void save_checkpoint(std::ostream& out, const ParamStore& params,
                     const std::map<std::string, std::string>& meta);
void save_checkpoint(const std::string& path, const ParamStore& params,
                     const std::map<std::string, std::string>& meta);

struct CheckpointData {
    std::map<std::string, std::string> meta;
    std::vector<std::pair<std::string, Tensor>> params;
};

CheckpointData load_checkpoint(std::istream& in);
CheckpointData load_checkpoint(const std::string& path);

}  // namespace ner
