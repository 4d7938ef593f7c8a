#include <cmath>

#include "doctest.h"
#include "ner/conll.h"
#include "ner/encoder.h"
#include "ner/error.h"
#include "ner/rng.h"
#include "support/gradcheck.h"

using namespace ner;

namespace {

// Cell with all-zero weights and biases: every gate sits at 1/2 and the
// candidate at 0, so the recurrence has closed forms.
LstmCell zero_cell(ParamStore& store, const std::string& prefix, int in, int d) {
    LstmCell cell;
    cell.w = store.add(prefix + ".w", Tensor::zeros({4 * d, in + d}));
    cell.b = store.add(prefix + ".b", Tensor::zeros({4 * d}));
    cell.input_dim = in;
    cell.state_dim = d;
    return cell;
}

}  // namespace

TEST_CASE("lstm step closed forms under zero weights") {
    ParamStore store;
    LstmCell cell = zero_cell(store, "z", 3, 2);
    Tape tape;
    LstmCellVars vars = on_tape(tape, cell);
    Var x = tape.constant(Tensor::vec({0.7, -0.3, 0.1}));

    // c_prev = 0: gates are 1/2, candidate 0, so c = 0 and h = 0.
    Var h0 = tape.constant(Tensor::zeros({2}));
    Var c0 = tape.constant(Tensor::zeros({2}));
    auto [h1, c1] = lstm_step(tape, vars, x, h0, c0);
    for (int i = 0; i < 2; ++i) {
        CHECK(tape.value(c1).at(i) == 0.0);
        CHECK(tape.value(h1).at(i) == 0.0);
    }

    // c_prev = c: c_t = c/2 (forget 1/2, candidate contributes 0) and
    // h_t = tanh(c/2) / 2 (output gate 1/2).
    Var cp = tape.constant(Tensor::vec({0.8, -1.6}));
    auto [h2, c2] = lstm_step(tape, vars, x, h0, cp);
    CHECK(tape.value(c2).at(0) == doctest::Approx(0.4));
    CHECK(tape.value(c2).at(1) == doctest::Approx(-0.8));
    CHECK(tape.value(h2).at(0) == doctest::Approx(0.5 * std::tanh(0.4)));
    CHECK(tape.value(h2).at(1) == doctest::Approx(0.5 * std::tanh(-0.8)));
}

TEST_CASE("lstm step respects the stacked gate layout") {
    // Bias-only weights: candidate block big positive, input gate block
    // big positive, forget block big negative, output block big positive.
    // Then c ~ tanh-saturated candidate ~ 1 and h ~ tanh(1).
    ParamStore store;
    const int d = 2;
    LstmCell cell = zero_cell(store, "b", 1, d);
    for (int i = 0; i < d; ++i) {
        cell.b->values[static_cast<size_t>(i)] = 50.0;           // candidate -> tanh ~ 1
        cell.b->values[static_cast<size_t>(d + i)] = 50.0;       // output gate ~ 1
        cell.b->values[static_cast<size_t>(2 * d + i)] = 50.0;   // input gate ~ 1
        cell.b->values[static_cast<size_t>(3 * d + i)] = -50.0;  // forget gate ~ 0
    }
    Tape tape;
    LstmCellVars vars = on_tape(tape, cell);
    Var x = tape.constant(Tensor::vec({0.3}));
    Var h0 = tape.constant(Tensor::zeros({d}));
    Var cp = tape.constant(Tensor::vec({100.0, -100.0}));  // must be forgotten
    auto [h, c] = lstm_step(tape, vars, x, h0, cp);
    for (int i = 0; i < d; ++i) {
        CHECK(tape.value(c).at(i) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(tape.value(h).at(i) == doctest::Approx(std::tanh(1.0)).epsilon(1e-6));
    }
}

TEST_CASE("fresh cells start with an open forget gate") {
    ParamStore store;
    Rng rng(1);
    LstmCell cell = make_lstm_cell(store, "enc", 4, 3, rng);
    for (int i = 0; i < 3; ++i) {
        CHECK(cell.b->values[static_cast<size_t>(3 * 3 + i)] == 1.0);
        CHECK(cell.b->values[static_cast<size_t>(i)] == 0.0);
    }
    CHECK(cell.w->shape == std::vector<int>{12, 7});
    // Weights stay inside the init bound.
    double limit = std::sqrt(6.0 / (12 + 7));
    for (double v : cell.w->values) {
        CHECK(v <= limit);
        CHECK(v >= -limit);
    }
}

TEST_CASE("lstm step gradients match finite differences") {
    Rng rng(23);
    ParamStore store;
    LstmCell cell = make_lstm_cell(store, "cell", 3, 4, rng);
    auto px = std::make_shared<Tensor>(Tensor::vec({0.2, -0.4, 0.6}));
    px->requires_grad = true;

    auto build = [&](Tape& tape) {
        LstmCellVars vars = on_tape(tape, cell);
        Var x = tape.leaf(px);
        Var h0 = tape.constant(Tensor::zeros({4}));
        Var c0 = tape.constant(Tensor::vec({0.1, 0.2, -0.3, 0.4}));
        auto [h1, c1] = lstm_step(tape, vars, x, h0, c0);
        auto [h2, c2] = lstm_step(tape, vars, x, h1, c1);
        return tape.sum(tape.mul(h2, h2));
    };
    {
        Tape tape;
        tape.backward(build(tape));
    }
    auto eval = [&]() {
        Tape tape;
        return tape.value(build(tape)).at(0);
    };
    auto res = gradcheck::check(
        {{"w", cell.w}, {"b", cell.b}, {"x", px}}, eval);
    INFO(res.worst);
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("char features are deterministic and padding is invisible") {
    std::vector<Sentence> sents(1);
    sents[0].tokens = {"abc", "a"};
    CharVocab chars = CharVocab::build(sents);
    ParamStore store;
    Rng rng(3);
    CharCnn cnn = make_char_cnn(store, chars.size(), 4, 5, 3, rng);

    Tape tape;
    CharCnnVars vars = on_tape(tape, cnn);
    Var f1 = tape.constant(tape.value(char_features(tape, vars, chars, "abc")));
    Var f2 = char_features(tape, vars, chars, "abc");
    CHECK(tape.value(f1).values == tape.value(f2).values);
    CHECK(tape.value(f2).shape == std::vector<int>{5});

    // A one-character token works: it is padded up to the window.
    Var f3 = char_features(tape, vars, chars, "a");
    CHECK(tape.value(f3).size() == 5);

    // Unseen characters map to the unknown id, not an error.
    Var f4 = char_features(tape, vars, chars, "zzz");
    CHECK(tape.value(f4).size() == 5);
}

TEST_CASE("char feature max pooling selects per filter") {
    // One embedding dimension, window 3, identity-ish filter: feature j
    // is the max over window sums weighted by filter j.
    std::vector<Sentence> sents(1);
    sents[0].tokens = {"ab", "ba", "aab"};
    CharVocab chars = CharVocab::build(sents);
    ParamStore store;
    CharCnn cnn;
    Tensor emb = Tensor::zeros({chars.size(), 1});
    emb.at(chars.lookup('a'), 0) = 1.0;
    emb.at(chars.lookup('b'), 0) = 2.0;
    cnn.emb = store.add("char.emb", emb);
    cnn.filters = store.add("char.filters", Tensor::matrix(1, 3, {1.0, 1.0, 1.0}));
    cnn.bias = store.add("char.bias", Tensor::zeros({1}));
    cnn.char_dim = 1;
    cnn.num_filters = 1;
    cnn.window = 3;

    Tape tape;
    CharCnnVars vars = on_tape(tape, cnn);
    // "aab" has windows [a a b] only: 1 + 1 + 2 = 4.
    CHECK(tape.value(char_features(tape, vars, chars, "aab")).at(0) == doctest::Approx(4.0));
    // "aabb": windows aab = 4, abb = 5; the max wins.
    CHECK(tape.value(char_features(tape, vars, chars, "aabb")).at(0) == doctest::Approx(5.0));
    // "a" pads to [a pad pad] = 1.
    CHECK(tape.value(char_features(tape, vars, chars, "a")).at(0) == doctest::Approx(1.0));
}

TEST_CASE("char cnn gradients match finite differences") {
    std::vector<Sentence> sents(1);
    sents[0].tokens = {"abc"};
    CharVocab chars = CharVocab::build(sents);
    ParamStore store;
    Rng rng(9);
    CharCnn cnn = make_char_cnn(store, chars.size(), 3, 4, 3, rng);
    auto build = [&](Tape& tape) {
        CharCnnVars vars = on_tape(tape, cnn);
        Var f = char_features(tape, vars, chars, "abcab");
        return tape.sum(tape.tanh(f));
    };
    {
        Tape tape;
        tape.backward(build(tape));
    }
    auto eval = [&]() {
        Tape tape;
        return tape.value(build(tape)).at(0);
    };
    auto res = gradcheck::check(
        {{"emb", cnn.emb}, {"filters", cnn.filters}, {"bias", cnn.bias}}, eval);
    INFO(res.worst);
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("bilstm states depend on the right context slices") {
    ParamStore store;
    Rng rng(31);
    LstmCell fwd = make_lstm_cell(store, "f", 2, 3, rng);
    LstmCell bwd = make_lstm_cell(store, "b", 2, 3, rng);

    auto encode = [&](const std::vector<std::vector<double>>& xs) {
        Tape tape;
        LstmCellVars fv = on_tape(tape, fwd);
        LstmCellVars bv = on_tape(tape, bwd);
        std::vector<Var> inputs;
        for (const auto& x : xs) inputs.push_back(tape.constant(Tensor::vec(x)));
        EncoderStates st = bilstm_encode(tape, fv, bv, inputs);
        std::vector<std::vector<double>> hf, hb;
        for (Var v : st.h_f) hf.push_back(tape.value(v).values);
        for (Var v : st.h_b) hb.push_back(tape.value(v).values);
        return std::make_pair(hf, hb);
    };

    std::vector<std::vector<double>> base = {{0.1, 0.2}, {0.3, -0.1}, {-0.2, 0.5}};
    auto [hf0, hb0] = encode(base);

    // Perturbing the last token must leave forward states at earlier
    // positions untouched, and must change the backward state there.
    auto perturbed = base;
    perturbed[2][0] += 0.7;
    auto [hf1, hb1] = encode(perturbed);
    CHECK(hf1[0] == hf0[0]);
    CHECK(hf1[1] == hf0[1]);
    CHECK(hf1[2] != hf0[2]);
    CHECK(hb1[0] != hb0[0]);

    // Perturbing the first token: backward states summarize suffixes, so
    // only position 0 moves; forward states carry it everywhere.
    auto front = base;
    front[0][1] -= 0.4;
    auto [hf2, hb2] = encode(front);
    CHECK(hb2[0] != hb0[0]);
    CHECK(hb2[1] == hb0[1]);
    CHECK(hb2[2] == hb0[2]);
    CHECK(hf2[0] != hf0[0]);
    CHECK(hf2[2] != hf0[2]);
}

TEST_CASE("bilstm handles a single token") {
    ParamStore store;
    Rng rng(31);
    LstmCell fwd = make_lstm_cell(store, "f", 2, 3, rng);
    LstmCell bwd = make_lstm_cell(store, "b", 2, 3, rng);
    Tape tape;
    EncoderStates st = bilstm_encode(tape, on_tape(tape, fwd), on_tape(tape, bwd),
                                     {tape.constant(Tensor::vec({1.0, -1.0}))});
    CHECK(st.h.size() == 1);
    CHECK(tape.value(st.h[0]).size() == 6);
    CHECK(tape.value(st.h[0]).at(0) == tape.value(st.h_f[0]).at(0));
    CHECK(tape.value(st.h[0]).at(3) == tape.value(st.h_b[0]).at(0));
}

TEST_CASE("lstm input size mismatch throws") {
    ParamStore store;
    Rng rng(1);
    LstmCell cell = make_lstm_cell(store, "c", 3, 2, rng);
    Tape tape;
    LstmCellVars vars = on_tape(tape, cell);
    Var bad = tape.constant(Tensor::vec({1.0, 2.0}));
    Var h = tape.constant(Tensor::zeros({2}));
    Var c = tape.constant(Tensor::zeros({2}));
    CHECK_THROWS_AS(lstm_step(tape, vars, bad, h, c), DimensionError);
}
