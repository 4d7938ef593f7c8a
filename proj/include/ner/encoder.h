#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ner/checkpoint.h"
#include "ner/conll.h"
#include "ner/rng.h"
#include "ner/tensor.h"

namespace ner {

// One LSTM's parameters: a single stacked weight matrix {4d, in+d} and
// bias {4d}. Row blocks, in order: candidate, output gate, input gate,
// forget gate.
struct LstmCell {
    TensorPtr w;  // {4*state_dim, input_dim + state_dim}
    TensorPtr b;  // {4*state_dim}
    int input_dim = 0;
    int state_dim = 0;
};

// Glorot-uniform weights, zero bias except the forget-gate block which
// starts at 1.
LstmCell make_lstm_cell(ParamStore& params, const std::string& prefix, int input_dim,
                        int state_dim, Rng& rng);
LstmCell lstm_cell_from_store(const ParamStore& params, const std::string& prefix,
                              int input_dim, int state_dim);

struct LstmCellVars {
    Var w;
    Var b;
    int input_dim = 0;
    int state_dim = 0;
};

LstmCellVars on_tape(Tape& tape, const LstmCell& cell);

// One recurrence step: gates from W [x; h_prev] + b, candidate through
// tanh, the three gates through the logistic function, then
// c = cand * in + c_prev * forget and h = out * tanh(c).
std::pair<Var, Var> lstm_step(Tape& tape, const LstmCellVars& cell, Var x, Var h_prev,
                              Var c_prev);

// Character-level convolution: width-3 window over the token's bytes,
// max over positions. Produces a fixed-size feature vector per token.
struct CharCnn {
    TensorPtr emb;      // {char_vocab, char_dim}
    TensorPtr filters;  // {num_filters, window * char_dim}
    TensorPtr bias;     // {num_filters}
    int char_dim = 0;
    int num_filters = 0;
    int window = 0;
};

CharCnn make_char_cnn(ParamStore& params, int char_vocab, int char_dim, int num_filters,
                      int window, Rng& rng);
CharCnn char_cnn_from_store(const ParamStore& params, int char_vocab, int char_dim,
                            int num_filters, int window);

struct CharCnnVars {
    Var emb;
    Var filters;
    Var bias;
    int char_dim = 0;
    int num_filters = 0;
    int window = 0;
};

CharCnnVars on_tape(Tape& tape, const CharCnn& cnn);

Var char_features(Tape& tape, const CharCnnVars& cnn, const CharVocab& chars,
                  const std::string& token);

// Both directions' hidden states for one sentence. h[t] is the
// concatenation [h_f[t], h_b[t]].
struct EncoderStates {
    std::vector<Var> h_f;
    std::vector<Var> h_b;
    std::vector<Var> h;
};

EncoderStates bilstm_encode(Tape& tape, const LstmCellVars& fwd, const LstmCellVars& bwd,
                            const std::vector<Var>& inputs);

}  // namespace ner
