#include "ner/encoder.h"

#include <cmath>

#include "ner/error.h"

namespace ner {

namespace {

Tensor glorot_uniform(int rows, int cols, Rng& rng) {
    Tensor t = Tensor::zeros({rows, cols});
    double limit = std::sqrt(6.0 / (rows + cols));
    for (double& v : t.values) v = rng.uniform(-limit, limit);
    return t;
}

}  // namespace

LstmCell make_lstm_cell(ParamStore& params, const std::string& prefix, int input_dim,
                        int state_dim, Rng& rng) {
    Tensor w = glorot_uniform(4 * state_dim, input_dim + state_dim, rng);
    Tensor b = Tensor::zeros({4 * state_dim});
    // Forget-gate block starts open so early gradients flow through time.
    for (int i = 3 * state_dim; i < 4 * state_dim; ++i) b.values[static_cast<size_t>(i)] = 1.0;
    LstmCell cell;
    cell.w = params.add(prefix + ".w", std::move(w));
    cell.b = params.add(prefix + ".b", std::move(b));
    cell.input_dim = input_dim;
    cell.state_dim = state_dim;
    return cell;
}

LstmCell lstm_cell_from_store(const ParamStore& params, const std::string& prefix,
                              int input_dim, int state_dim) {
    LstmCell cell;
    cell.w = params.get(prefix + ".w");
    cell.b = params.get(prefix + ".b");
    cell.input_dim = input_dim;
    cell.state_dim = state_dim;
    if (cell.w->rows() != 4 * state_dim || cell.w->cols() != input_dim + state_dim)
        throw DimensionError("lstm weight shape " + shape_str(cell.w->shape) +
                             " does not match dims (" + std::to_string(input_dim) + ", " +
                             std::to_string(state_dim) + ")");
    return cell;
}

LstmCellVars on_tape(Tape& tape, const LstmCell& cell) {
    LstmCellVars v;
    v.w = tape.leaf(cell.w);
    v.b = tape.leaf(cell.b);
    v.input_dim = cell.input_dim;
    v.state_dim = cell.state_dim;
    return v;
}

std::pair<Var, Var> lstm_step(Tape& tape, const LstmCellVars& cell, Var x, Var h_prev,
                              Var c_prev) {
    const int d = cell.state_dim;
    if (tape.value(x).size() != cell.input_dim)
        throw DimensionError("lstm input has size " + std::to_string(tape.value(x).size()) +
                             ", cell expects " + std::to_string(cell.input_dim));
    Var xh = tape.concat({x, h_prev});
    Var pre = tape.add(tape.matmul(cell.w, xh), cell.b);
    Var cand = tape.tanh(tape.slice(pre, 0, d));
    Var out_gate = tape.sigmoid(tape.slice(pre, d, d));
    Var in_gate = tape.sigmoid(tape.slice(pre, 2 * d, d));
    Var forget_gate = tape.sigmoid(tape.slice(pre, 3 * d, d));
    Var c = tape.add(tape.mul(cand, in_gate), tape.mul(c_prev, forget_gate));
    Var h = tape.mul(out_gate, tape.tanh(c));
    return {h, c};
}

CharCnn make_char_cnn(ParamStore& params, int char_vocab, int char_dim, int num_filters,
                      int window, Rng& rng) {
    CharCnn cnn;
    Tensor emb = glorot_uniform(char_vocab, char_dim, rng);
    for (int j = 0; j < char_dim; ++j) emb.at(CharVocab::kPad, j) = 0.0;
    cnn.emb = params.add("char.emb", std::move(emb));
    cnn.filters = params.add("char.filters", glorot_uniform(num_filters, window * char_dim, rng));
    cnn.bias = params.add("char.bias", Tensor::zeros({num_filters}));
    cnn.char_dim = char_dim;
    cnn.num_filters = num_filters;
    cnn.window = window;
    return cnn;
}

CharCnn char_cnn_from_store(const ParamStore& params, int char_vocab, int char_dim,
                            int num_filters, int window) {
    CharCnn cnn;
    cnn.emb = params.get("char.emb");
    cnn.filters = params.get("char.filters");
    cnn.bias = params.get("char.bias");
    cnn.char_dim = char_dim;
    cnn.num_filters = num_filters;
    cnn.window = window;
    if (cnn.emb->rows() != char_vocab || cnn.emb->cols() != char_dim)
        throw DimensionError("char embedding shape " + shape_str(cnn.emb->shape) +
                             " does not match vocab " + std::to_string(char_vocab));
    return cnn;
}

CharCnnVars on_tape(Tape& tape, const CharCnn& cnn) {
    CharCnnVars v;
    v.emb = tape.leaf(cnn.emb);
    v.filters = tape.leaf(cnn.filters);
    v.bias = tape.leaf(cnn.bias);
    v.char_dim = cnn.char_dim;
    v.num_filters = cnn.num_filters;
    v.window = cnn.window;
    return v;
}

Var char_features(Tape& tape, const CharCnnVars& cnn, const CharVocab& chars,
                  const std::string& token) {
    std::vector<int> ids;
    ids.reserve(token.size());
    for (char c : token) ids.push_back(chars.lookup(c));
    while (static_cast<int>(ids.size()) < cnn.window) ids.push_back(CharVocab::kPad);

    const int positions = static_cast<int>(ids.size()) - cnn.window + 1;
    std::vector<Var> convs;
    convs.reserve(static_cast<size_t>(positions));
    for (int p = 0; p < positions; ++p) {
        std::vector<Var> window_embs;
        window_embs.reserve(static_cast<size_t>(cnn.window));
        for (int k = 0; k < cnn.window; ++k)
            window_embs.push_back(tape.row(cnn.emb, ids[static_cast<size_t>(p + k)]));
        Var win = tape.concat(window_embs);
        convs.push_back(tape.add(tape.matmul(cnn.filters, win), cnn.bias));
    }
    return tape.max_over_rows(tape.stack_rows(convs));
}

EncoderStates bilstm_encode(Tape& tape, const LstmCellVars& fwd, const LstmCellVars& bwd,
                            const std::vector<Var>& inputs) {
    if (fwd.state_dim != bwd.state_dim)
        throw DimensionError("direction state sizes differ");
    const int n = static_cast<int>(inputs.size());
    const int d = fwd.state_dim;
    EncoderStates states;
    states.h_f.resize(static_cast<size_t>(n));
    states.h_b.resize(static_cast<size_t>(n));
    states.h.resize(static_cast<size_t>(n));

    Var h = tape.constant(Tensor::zeros({d}));
    Var c = tape.constant(Tensor::zeros({d}));
    for (int t = 0; t < n; ++t) {
        auto [nh, nc] = lstm_step(tape, fwd, inputs[static_cast<size_t>(t)], h, c);
        h = nh;
        c = nc;
        states.h_f[static_cast<size_t>(t)] = h;
    }
    h = tape.constant(Tensor::zeros({d}));
    c = tape.constant(Tensor::zeros({d}));
    for (int t = n - 1; t >= 0; --t) {
        auto [nh, nc] = lstm_step(tape, bwd, inputs[static_cast<size_t>(t)], h, c);
        h = nh;
        c = nc;
        states.h_b[static_cast<size_t>(t)] = h;
    }
    for (int t = 0; t < n; ++t)
        states.h[static_cast<size_t>(t)] =
            tape.concat({states.h_f[static_cast<size_t>(t)], states.h_b[static_cast<size_t>(t)]});
    return states;
}

}  // namespace ner
