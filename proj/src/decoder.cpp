#include "ner/decoder.h"

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

DecoderParams make_decoder(ParamStore& params, int enc_dim, int num_tags, int state_dim,
                           Rng& rng) {
    DecoderParams dec;
    dec.cell = make_lstm_cell(params, "decoder", enc_dim + 4 + num_tags, state_dim, rng);
    dec.w_out = params.add("decoder.w_out", glorot_uniform(num_tags, state_dim, rng));
    dec.b_out = params.add("decoder.b_out", Tensor::zeros({num_tags}));
    return dec;
}

DecoderParams decoder_from_store(const ParamStore& params, int enc_dim, int num_tags,
                                 int state_dim) {
    DecoderParams dec;
    dec.cell = lstm_cell_from_store(params, "decoder", enc_dim + 4 + num_tags, state_dim);
    dec.w_out = params.get("decoder.w_out");
    dec.b_out = params.get("decoder.b_out");
    if (dec.w_out->rows() != num_tags || dec.w_out->cols() != state_dim)
        throw DimensionError("decoder output shape " + shape_str(dec.w_out->shape) +
                             " does not match (" + std::to_string(num_tags) + ", " +
                             std::to_string(state_dim) + ")");
    return dec;
}

DecoderVars on_tape(Tape& tape, const DecoderParams& params) {
    DecoderVars v;
    v.cell = on_tape(tape, params.cell);
    v.w_out = tape.leaf(params.w_out);
    v.b_out = tape.leaf(params.b_out);
    return v;
}

namespace {

int argmax_lowest(const Tensor& dist) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(dist.size()); ++i)
        if (dist.at(i) > dist.at(best)) best = i;
    return best;
}

Tensor one_hot(int index, int size) {
    Tensor t = Tensor::zeros({size});
    t.at(index) = 1.0;
    return t;
}

}  // namespace

DecodeResult decode_with_reference(Tape& tape, const DecoderVars& dec, const TagSet& tags,
                                   const EncoderStates& enc, const std::vector<Var>& refs,
                                   const std::vector<int>* gold_feedback) {
    const int n = static_cast<int>(enc.h.size());
    const int k = tags.size();
    if (static_cast<int>(refs.size()) != n)
        throw ContractError("got " + std::to_string(refs.size()) + " reference vectors for " +
                            std::to_string(n) + " tokens");
    if (gold_feedback != nullptr && static_cast<int>(gold_feedback->size()) != n)
        throw ContractError("gold feedback length mismatch");

    DecodeResult result;
    result.tags.reserve(static_cast<size_t>(n));
    result.dists.reserve(static_cast<size_t>(n));

    const int d = dec.cell.state_dim;
    Var h = tape.constant(Tensor::zeros({d}));
    Var c = tape.constant(Tensor::zeros({d}));
    Var p_prev = tape.constant(one_hot(tags.o_id(), k));

    for (int t = 0; t < n; ++t) {
        const Tensor& ref_val = tape.value(refs[static_cast<size_t>(t)]);
        if (ref_val.size() != 4)
            throw ContractError("reference at token " + std::to_string(t) + " has size " +
                                std::to_string(ref_val.size()));
        for (int j = 0; j < 4; ++j) {
            double v = ref_val.at(j);
            if (!(v >= 0.0 && v <= 1.0))
                throw ContractError("reference component " + std::to_string(v) +
                                    " at token " + std::to_string(t) + " is outside [0, 1]");
        }

        Var x = tape.concat({enc.h[static_cast<size_t>(t)], refs[static_cast<size_t>(t)],
                             p_prev});
        auto [nh, nc] = lstm_step(tape, dec.cell, x, h, c);
        h = nh;
        c = nc;
        Var dist = tape.softmax(tape.add(tape.matmul(dec.w_out, h), dec.b_out));
        int pred = argmax_lowest(tape.value(dist));
        result.tags.push_back(pred);
        result.dists.push_back(dist);

        if (gold_feedback != nullptr) {
            p_prev = tape.constant(one_hot((*gold_feedback)[static_cast<size_t>(t)], k));
        } else {
            p_prev = dist;
        }
    }
    return result;
}

DecodeResult decode_first_layer(Tape& tape, const DecoderVars& dec, const TagSet& tags,
                                const EncoderStates& enc,
                                const std::vector<int>* gold_feedback) {
    std::vector<Var> zero_refs;
    zero_refs.reserve(enc.h.size());
    Var zeros = tape.constant(Tensor::zeros({4}));
    for (size_t t = 0; t < enc.h.size(); ++t) zero_refs.push_back(zeros);
    return decode_with_reference(tape, dec, tags, enc, zero_refs, gold_feedback);
}

}  // namespace ner
