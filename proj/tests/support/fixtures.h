#pragma once

#include <set>
#include <string>
#include <vector>

#include "ner/config.h"
#include "ner/conll.h"
#include "ner/rng.h"

namespace fixtures {

// A capitalized nonsense word not seen before in `used`.
std::string fresh_name(ner::Rng& rng, std::set<std::string>& used);

// Fifty synthetic sentences over three entity types with a small closed
// vocabulary. Any healthy configuration can memorize it.
std::vector<ner::Sentence> overfit_corpus(ner::Rng& rng);
ner::ModelConfig overfit_config(unsigned long seed);

// Two-sentence documents where one sentence names a person in a
// decisive context and the other mentions the same token in a context
// that fits both a name and a plain capitalized word. Train documents
// mix in-vocabulary names, rare names and name-shaped non-entities;
// dev and heldout use names never seen in training.
struct ConsistencySets {
    std::vector<ner::Sentence> train;
    std::vector<ner::Sentence> dev;
    std::vector<ner::Sentence> heldout;
};

ConsistencySets consistency_corpus(ner::Rng& rng);
ner::ModelConfig consistency_config(unsigned long seed);

// Dimensions small enough for exhaustive numeric checks.
ner::ModelConfig tiny_config(unsigned long seed);

}  // namespace fixtures
