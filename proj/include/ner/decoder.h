#pragma once

#include <optional>
#include <vector>

#include "ner/encoder.h"
#include "ner/reasoner.h"
#include "ner/tags.h"
#include "ner/tensor.h"

namespace ner {

// Label decoder: an LSTM over positions whose input at step t is the
// encoder state, the four reference scores, and the previous tag
// distribution, followed by a linear layer and softmax.
struct DecoderParams {
    LstmCell cell;    // input = enc_dim + 4 + num_tags
    TensorPtr w_out;  // {num_tags, state_dim}
    TensorPtr b_out;  // {num_tags}
};

DecoderParams make_decoder(ParamStore& params, int enc_dim, int num_tags, int state_dim,
                           Rng& rng);
DecoderParams decoder_from_store(const ParamStore& params, int enc_dim, int num_tags,
                                 int state_dim);

struct DecoderVars {
    LstmCellVars cell;
    Var w_out;
    Var b_out;
};

DecoderVars on_tape(Tape& tape, const DecoderParams& params);

struct DecodeResult {
    std::vector<int> tags;   // argmax per token, lowest id wins ties
    std::vector<Var> dists;  // softmax distribution per token, {K}
};

// Decodes one sentence. refs[t] must be a length-4 tape value with each
// component in [0, 1]; the first distribution input p_0 is the one-hot
// of O. When `gold_feedback` is given, the distribution fed forward at
// step t+1 is the one-hot of gold[t] instead of the prediction.
DecodeResult decode_with_reference(Tape& tape, const DecoderVars& dec, const TagSet& tags,
                                   const EncoderStates& enc, const std::vector<Var>& refs,
                                   const std::vector<int>* gold_feedback = nullptr);

// First-layer decoding: no pool exists yet, so every reference score is
// zero. Identical to decode_with_reference with all-zero refs.
DecodeResult decode_first_layer(Tape& tape, const DecoderVars& dec, const TagSet& tags,
                                const EncoderStates& enc,
                                const std::vector<int>* gold_feedback = nullptr);

}  // namespace ner
