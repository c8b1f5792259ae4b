#include "glac/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "glac/error.hpp"
#include "glac/tokens.hpp"

namespace glac {

double evaluate_perplexity(GlacModel& model, const Vocabulary& vocab,
                           const std::vector<StoryRecord>& records) {
    if (records.empty()) {
        throw ContractError("evaluate_perplexity: no records");
    }
    Rng unused(0); // inference consumes no randomness
    double loss_sum = 0.0;
    size_t tokens = 0;
    for (const StoryRecord& r : records) {
        Tape tape;
        auto targets = encode(vocab, r);
        auto loss = model.story_loss(tape, r, targets, /*training=*/false,
                                     unused);
        loss_sum += loss.total.value();
        tokens += loss.tokens;
    }
    if (tokens == 0) throw ContractError("evaluate_perplexity: no tokens");
    return std::exp(loss_sum / static_cast<double>(tokens));
}

SamplerConfig make_sampler_config(const AppConfig& cfg,
                                  const Vocabulary& vocab) {
    SamplerConfig sc;
    sc.k = cfg.k;
    sc.n_samples = cfg.n_samples;
    sc.seed = cfg.seed;
    const std::vector<std::string>& words =
        cfg.exempt_words.empty() ? default_exempt_words()
                                 : load_exempt_words(cfg.exempt_words);
    for (const std::string& w : words) {
        if (vocab.contains(w)) sc.exempt.insert(vocab.id(w));
    }
    return sc;
}

GenOptions make_gen_options(const AppConfig& cfg, const Vocabulary& vocab) {
    GenOptions opts;
    opts.sampler = make_sampler_config(cfg, vocab);
    opts.use_count_penalty = cfg.use_count_penalty;
    opts.reset_per_sentence = cfg.count_reset == "sentence";
    return opts;
}

std::string generate_stories(GlacModel& model, const Vocabulary& vocab,
                             const std::vector<StoryRecord>& records,
                             const GenOptions& opts, uint64_t seed) {
    Rng rng(Rng::mix(seed, 0x9f3a));
    std::ostringstream out;
    for (const StoryRecord& r : records) {
        GlacModel::StoryGen gen = model.generate_story(r, opts, rng);
        out << "# " << r.story_id << "\n";
        for (const auto& sentence : gen.sentences) {
            for (size_t i = 0; i < sentence.size(); ++i) {
                if (i) out << " ";
                out << vocab.word(sentence[i]);
            }
            out << "\n";
        }
        out << "\n";
    }
    return out.str();
}

Trainer::Trainer(const AppConfig& cfg, std::vector<StoryRecord> corpus)
    : train_rng_(0) {
    cfg.validate();
    if (corpus.empty()) throw DataError("training corpus is empty");
    split_ = split_corpus(corpus, cfg.val_fraction);
    if (split_.train.empty()) {
        throw DataError("no training records after the validation split");
    }
    vocab_ = Vocabulary::build(split_.train, cfg.min_count);
    cfg_ = cfg.resolved(vocab_.size());

    targets_.reserve(split_.train.size());
    for (const StoryRecord& r : split_.train) {
        if (r.sentences.size() != r.features.size()) {
            throw DataError("story " + r.story_id +
                            " has unlabeled images; cannot train");
        }
        targets_.push_back(encode(vocab_, r));
    }

    model_ = std::make_shared<GlacModel>(cfg_, cfg_.seed);
    opt_ = std::make_unique<Adam>(cfg_.learning_rate, cfg_.weight_decay);
    train_rng_ = Rng(Rng::mix(cfg_.seed, 0x7e41));
}

double Trainer::run_epoch(size_t epoch) {
    const std::vector<size_t> order =
        epoch_order(split_.train.size(), epoch, cfg_.seed);

    std::vector<std::vector<size_t>> batches;
    for (size_t i = 0; i < order.size(); i += cfg_.batch_size) {
        const size_t end = std::min(i + cfg_.batch_size, order.size());
        batches.emplace_back(order.begin() + i, order.begin() + end);
    }
    // A trailing batch of one story cannot feed training-mode batch norm
    // by itself only when S=1; merging keeps step counts stable either way.
    if (batches.size() > 1 && batches.back().size() == 1) {
        batches[batches.size() - 2].push_back(batches.back()[0]);
        batches.pop_back();
    }

    double epoch_loss = 0.0;
    size_t epoch_tokens = 0;
    for (const std::vector<size_t>& batch : batches) {
        size_t batch_tokens = 0;
        for (size_t idx : batch) {
            for (const auto& t : targets_[idx]) batch_tokens += t.size() - 1;
        }
        model_->zero_grads();
        for (size_t idx : batch) {
            Tape tape;
            auto loss = model_->story_loss(tape, split_.train[idx],
                                           targets_[idx], /*training=*/true,
                                           train_rng_);
            tape.backward(loss.total,
                          1.0 / static_cast<double>(batch_tokens));
            epoch_loss += loss.total.value();
            epoch_tokens += loss.tokens;
        }
        clip_global_norm(model_->params(), cfg_.grad_clip);
        opt_->step(model_->params());
    }
    return epoch_loss / static_cast<double>(epoch_tokens);
}

TrainResult Trainer::train() {
    TrainResult result;
    const std::vector<StoryRecord>& val_records =
        split_.val.empty() ? split_.train : split_.val;

    double best_ppl = std::numeric_limits<double>::infinity();
    size_t since_best = 0;
    for (size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
        EpochMetrics m;
        m.epoch = epoch;
        m.train_loss = run_epoch(epoch);
        m.val_ppl = evaluate_perplexity(*model_, vocab_, val_records);
        result.metrics.push_back(m);
        result.epochs_run = epoch + 1;

        if (cfg_.target_ppl > 0 && m.val_ppl < cfg_.target_ppl) break;
        if (m.val_ppl < best_ppl) {
            best_ppl = m.val_ppl;
            since_best = 0;
        } else if (cfg_.patience > 0 && ++since_best >= cfg_.patience) {
            break;
        }
    }
    return result;
}

void Trainer::save(const std::string& path, size_t epoch) const {
    save_checkpoint(path, *model_, vocab_, epoch, train_rng_.state());
}

} // namespace glac
