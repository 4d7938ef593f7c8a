#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ner/error.h"
#include "ner/eval.h"
#include "ner/model.h"
#include "ner/optim.h"

namespace ner {

namespace {

std::string fixed6(double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(6) << v;
    return ss.str();
}

}  // namespace

TrainResult train_model(Model& model, const std::vector<Sentence>& train_set,
                        const std::vector<Sentence>& dev_set,
                        const std::string& checkpoint_path, std::ostream& log) {
    if (train_set.empty()) throw ContractError("empty training set");
    const ModelConfig& cfg = model.config();
    PoolScope scope =
        cfg.pool_scope == "document" ? PoolScope::Document : PoolScope::MiniBatch;

    OptimizerState opt;
    opt.learning_rate = cfg.learning_rate;
    if (cfg.clip_norm > 0.0) opt.clip_norm = cfg.clip_norm;

    ForwardOptions train_opts;
    train_opts.train_mode = true;
    train_opts.gold_feedback = cfg.feedback_gold;
    train_opts.pool_from_gold = cfg.pool_gold;

    std::vector<std::vector<int>> dev_gold = gold_tag_ids(dev_set, model.tagset());

    TrainResult result;
    result.checkpoint_path = checkpoint_path;
    log << "epoch,train_loss,dev_precision,dev_recall,dev_f1,improved\n";

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::vector<int> order = epoch_order(train_set, scope, model.rng());
        std::vector<Batch> batches = make_batches(train_set, model.vocab(), model.tagset(),
                                                  cfg.batch_size, scope, &order);
        double loss_sum = 0.0;
        long long token_count = 0;
        for (size_t b = 0; b < batches.size(); ++b) {
            Tape tape;
            ForwardResult fwd = model.forward(tape, batches[b], train_opts);
            Var loss = model.loss(tape, fwd, batches[b]);
            double loss_value = tape.value(loss).at(0);
            if (!std::isfinite(loss_value))
                throw Error("training aborted: loss is " + std::to_string(loss_value) +
                            " at epoch " + std::to_string(epoch) + " batch " +
                            std::to_string(b + 1));
            long long batch_tokens = 0;
            for (const auto& toks : batches[b].tokens)
                batch_tokens += static_cast<long long>(toks.size());
            loss_sum += loss_value * static_cast<double>(batch_tokens);
            token_count += batch_tokens;
            tape.backward(loss);
            sgd_step(model.params().tensors(), opt);
        }
        double train_loss = token_count == 0 ? 0.0 : loss_sum / static_cast<double>(token_count);

        EvalReport report;
        if (!dev_set.empty()) {
            auto pred = model.predict(dev_set);
            std::vector<std::vector<int>> final_layer;
            final_layer.reserve(pred.size());
            for (const auto& layers : pred) final_layer.push_back(layers.back());
            report = entity_f1(dev_gold, final_layer, model.tagset());
        }
        double f1 = report.f1();

        bool improved = f1 > result.best_dev_f1;
        if (improved) {
            result.best_dev_f1 = f1;
            result.best_epoch = epoch;
            model.save(checkpoint_path);
        }
        log << epoch << ',' << fixed6(train_loss) << ',' << fixed6(report.precision()) << ','
            << fixed6(report.recall()) << ',' << fixed6(f1) << ',' << (improved ? 1 : 0)
            << "\n";
        result.epochs_run = epoch;

        if (epoch - result.best_epoch >= cfg.patience) break;
    }
    return result;
}

}  // namespace ner
