// Command-line front end: train a tagger, tag a file, score predictions.
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ner/conll.h"
#include "ner/error.h"
#include "ner/eval.h"
#include "ner/model.h"
#include "ner/reasoner.h"
#include "ner/tags.h"

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value
    long seed = -1;
    int depth = 0;
};

ner::ModelConfig resolve_config(const CommonOpts& opts) {
    ner::ModelConfig cfg;
    if (!opts.config_path.empty()) cfg = ner::ModelConfig::from_file(opts.config_path);
    for (const std::string& kv : opts.overrides) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw ner::ParseError("--set expects key=value, got '" + kv + "'");
        cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opts.seed >= 0) cfg.seed = static_cast<unsigned long>(opts.seed);
    if (opts.depth > 0) cfg.depth = opts.depth;
    cfg.validate();
    return cfg;
}

int run_train(const CommonOpts& common, const std::string& train_path,
              const std::string& dev_path, const std::string& emb_path, int emb_dim,
              const std::string& out_path, const std::string& log_path) {
    ner::ModelConfig cfg = resolve_config(common);

    std::vector<std::string> warnings;
    auto train_set = ner::load_corpus(train_path, {}, &warnings);
    auto dev_set = ner::load_corpus(dev_path, {}, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    if (train_set.empty()) throw ner::ContractError(train_path + " has no sentences");

    auto types = ner::collect_types(train_set);
    if (types.empty()) throw ner::ContractError(train_path + " has no entity annotations");
    ner::TagSet tags = ner::TagSet::from_types(types);
    ner::Vocab vocab = ner::Vocab::build(train_set, cfg.vocab_min_count);
    ner::CharVocab chars = ner::CharVocab::build(train_set);

    ner::Model model(cfg, std::move(vocab), std::move(chars), std::move(tags));
    if (!emb_path.empty()) {
        ner::EmbeddingStats stats;
        ner::Tensor emb = ner::load_embeddings(emb_path, model.vocab(),
                                               emb_dim > 0 ? emb_dim : cfg.word_emb_dim,
                                               model.rng(), &stats);
        model.set_word_embeddings(emb);
        std::cerr << "embeddings: " << stats.found_exact << " exact, "
                  << stats.found_lowercase << " lowercased, " << stats.missing
                  << " random\n";
    }

    std::ofstream log(log_path);
    if (!log) throw ner::Error("cannot write " + log_path);
    ner::TrainResult result =
        ner::train_model(model, train_set, dev_set, out_path, log);
    std::cout << "finished after " << result.epochs_run << " epoch(s); best dev f1 "
              << ner::format_percent(result.best_dev_f1) << " at epoch "
              << result.best_epoch << "\n"
              << "checkpoint: " << result.checkpoint_path << "\n"
              << "log: " << log_path << "\n";
    return 0;
}

int run_tag(const std::string& model_path, const std::string& input_path,
            const std::string& output_path, int depth, const std::string& trace_path) {
    ner::Model model = ner::Model::load(model_path);
    if (depth > 0) model.config().depth = depth;

    ner::ColumnSpec spec;
    auto sentences = ner::load_corpus(input_path, spec);
    bool have_gold = false;
    for (const auto& s : sentences)
        if (!s.gold_bmeos.empty()) have_gold = true;

    std::ofstream out(output_path);
    if (!out) throw ner::Error("cannot write " + output_path);

    std::ofstream trace;
    if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw ner::Error("cannot write " + trace_path);
        ner::write_trace_header(trace);
    }

    ner::PoolScope scope = model.config().pool_scope == "document"
                               ? ner::PoolScope::Document
                               : ner::PoolScope::MiniBatch;
    auto batches = ner::make_batches(sentences, model.vocab(), model.tagset(),
                                     model.config().batch_size, scope);
    std::vector<std::vector<std::vector<int>>> per_sentence(sentences.size());
    for (const auto& batch : batches) {
        ner::Tape tape;
        ner::ForwardResult fwd = model.forward(tape, batch);
        for (size_t s = 0; s < batch.sentence_index.size(); ++s) {
            auto& layers = per_sentence[static_cast<size_t>(batch.sentence_index[s])];
            for (const auto& step : fwd.layers) layers.push_back(step.tags[s]);
            if (trace.is_open() && fwd.layers.size() > 1) {
                const auto& refs = fwd.layers.back().refs[s];
                for (size_t t = 0; t < refs.size(); ++t)
                    ner::write_trace_row(trace, batch.sentence_index[s],
                                         static_cast<int>(t), batch.tokens[s][t], refs[t]);
            }
        }
    }

    for (size_t s = 0; s < sentences.size(); ++s) {
        const auto& sent = sentences[s];
        for (size_t t = 0; t < sent.tokens.size(); ++t) {
            out << sent.tokens[t];
            if (have_gold) out << ' ' << (sent.gold_bmeos.empty() ? "O" : sent.gold_bmeos[t]);
            for (const auto& layer : per_sentence[s])
                out << ' ' << model.tagset().name(layer[t]);
            out << "\n";
        }
        out << "\n";
    }
    std::cout << "tagged " << sentences.size() << " sentence(s) with "
              << (per_sentence.empty() ? 0 : per_sentence[0].size()) << " layer column(s): "
              << output_path << "\n";
    return 0;
}

int run_eval_with_model(const std::string& model_path, const std::string& input_path,
                        int depth, bool show_changes) {
    ner::Model model = ner::Model::load(model_path);
    if (depth > 0) model.config().depth = depth;

    auto sentences = ner::load_corpus(input_path);
    auto gold = ner::gold_tag_ids(sentences, model.tagset());
    for (size_t s = 0; s < sentences.size(); ++s)
        if (gold[s].empty())
            throw ner::ContractError("sentence " + std::to_string(s + 1) + " has no gold tags");

    ner::PoolScope scope = model.config().pool_scope == "document"
                               ? ner::PoolScope::Document
                               : ner::PoolScope::MiniBatch;
    auto batches = ner::make_batches(sentences, model.vocab(), model.tagset(),
                                     model.config().batch_size, scope);
    std::vector<std::vector<std::vector<int>>> by_layer;  // [layer][sentence][token]
    std::vector<ner::ChangedMention> all_changes;
    for (const auto& batch : batches) {
        ner::Tape tape;
        ner::ForwardResult fwd = model.forward(tape, batch);
        if (by_layer.empty())
            by_layer.assign(fwd.layers.size(),
                            std::vector<std::vector<int>>(sentences.size()));
        for (size_t s = 0; s < batch.sentence_index.size(); ++s)
            for (size_t l = 0; l < fwd.layers.size(); ++l)
                by_layer[l][static_cast<size_t>(batch.sentence_index[s])] =
                    fwd.layers[l].tags[s];
        if (show_changes) {
            auto changes = ner::layer_diff(fwd, batch.sentence_index);
            all_changes.insert(all_changes.end(), changes.begin(), changes.end());
        }
    }

    for (size_t l = 0; l < by_layer.size(); ++l) {
        ner::EvalReport report = ner::entity_f1(gold, by_layer[l], model.tagset());
        ner::print_report(std::cout, "layer " + std::to_string(l + 1), report);
    }
    if (show_changes) {
        std::cout << all_changes.size() << " tag change(s) across layers\n";
        ner::print_changes(std::cout, all_changes, model.tagset());
    }
    return 0;
}

int run_eval_file(const std::string& input_path, int gold_col, int pred_col) {
    ner::ColumnSpec gold_spec;
    gold_spec.tag_col = gold_col;
    ner::ColumnSpec pred_spec;
    pred_spec.tag_col = pred_col;
    auto gold_sents = ner::read_conll_file(input_path, gold_spec);
    auto pred_sents = ner::read_conll_file(input_path, pred_spec);

    auto normalize = [](std::vector<ner::Sentence>& sents) {
        bool bmeos = false;
        for (const auto& s : sents)
            if (ner::looks_like_bmeos(s.gold_bmeos)) bmeos = true;
        if (!bmeos)
            for (auto& s : sents) s.gold_bmeos = ner::to_bmeos(s.gold_bmeos);
    };
    normalize(gold_sents);
    normalize(pred_sents);

    std::vector<std::string> types = ner::collect_types(gold_sents);
    for (const std::string& t : ner::collect_types(pred_sents)) types.push_back(t);
    ner::TagSet tags = ner::TagSet::from_types(types);

    auto gold = ner::gold_tag_ids(gold_sents, tags);
    auto pred = ner::gold_tag_ids(pred_sents, tags);
    ner::EvalReport report = ner::entity_f1(gold, pred, tags);
    ner::print_report(std::cout, "entities", report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Document-consistent named entity tagger"};
    app.require_subcommand(1);

    CommonOpts common;

    auto* train = app.add_subcommand("train", "Train a model");
    std::string train_path;
    std::string dev_path;
    std::string emb_path;
    int emb_dim = 0;
    std::string out_path = "model.ckpt";
    std::string log_path = "train_log.csv";
    train->add_option("--train", train_path, "Training corpus")->required();
    train->add_option("--dev", dev_path, "Development corpus")->required();
    train->add_option("--config", common.config_path, "key=value config file");
    train->add_option("--set", common.overrides, "Override a config key (key=value)");
    train->add_option("--embeddings", emb_path, "Pretrained word embeddings, text format");
    train->add_option("--embeddings-dim", emb_dim, "Embedding file dimension");
    train->add_option("--seed", common.seed, "Random seed");
    train->add_option("--out", out_path, "Checkpoint output path");
    train->add_option("--log", log_path, "Training log (CSV)");

    auto* tag = app.add_subcommand("tag", "Tag a corpus with a trained model");
    std::string model_path;
    std::string input_path;
    std::string output_path = "tagged.conll";
    std::string trace_path;
    tag->add_option("--model", model_path, "Model checkpoint")->required();
    tag->add_option("--input", input_path, "Input corpus")->required();
    tag->add_option("--output", output_path, "Tagged output path");
    tag->add_option("--depth", common.depth, "Override the number of decoding passes");
    tag->add_option("--trace", trace_path, "Write per-token reference scores (CSV)");

    auto* eval = app.add_subcommand("eval", "Score predictions");
    std::string eval_model;
    std::string eval_input;
    int gold_col = 1;
    int pred_col = -1;
    bool show_changes = false;
    eval->add_option("--model", eval_model, "Model checkpoint (omit to score a tagged file)");
    eval->add_option("--input", eval_input, "Corpus to score")->required();
    eval->add_option("--depth", common.depth, "Override the number of decoding passes");
    eval->add_option("--gold-col", gold_col, "Gold tag column (file scoring)");
    eval->add_option("--pred-col", pred_col, "Prediction column, -1 = last (file scoring)");
    eval->add_flag("--changes", show_changes, "Report tokens whose tag changed between layers");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed())
            return run_train(common, train_path, dev_path, emb_path, emb_dim, out_path,
                             log_path);
        if (tag->parsed())
            return run_tag(model_path, input_path, output_path, common.depth, trace_path);
        if (eval->parsed()) {
            if (!eval_model.empty())
                return run_eval_with_model(eval_model, eval_input, common.depth, show_changes);
            return run_eval_file(eval_input, gold_col, pred_col);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
