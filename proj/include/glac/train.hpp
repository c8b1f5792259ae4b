#pragma once

#include <memory>
#include <string>
#include <vector>

#include "glac/adam.hpp"
#include "glac/checkpoint.hpp"
#include "glac/config.hpp"
#include "glac/corpus.hpp"
#include "glac/model.hpp"

namespace glac {

struct EpochMetrics {
    size_t epoch = 0;
    double train_loss = 0; // mean per-token cross-entropy
    double val_ppl = 0;
};

struct TrainResult {
    std::vector<EpochMetrics> metrics;
    size_t epochs_run = 0;
};

// exp(sum of story losses / sum of scored tokens), inference mode.
double evaluate_perplexity(GlacModel& model, const Vocabulary& vocab,
                           const std::vector<StoryRecord>& records);

// Resolves the exempt word list (file or built-in) against the vocabulary.
SamplerConfig make_sampler_config(const AppConfig& cfg,
                                  const Vocabulary& vocab);
GenOptions make_gen_options(const AppConfig& cfg, const Vocabulary& vocab);

// Decoded text for a batch of feature records, one block per story.
std::string generate_stories(GlacModel& model, const Vocabulary& vocab,
                             const std::vector<StoryRecord>& records,
                             const GenOptions& opts, uint64_t seed);

class Trainer {
public:
    Trainer(const AppConfig& cfg, std::vector<StoryRecord> corpus);

    // Adam over shuffled batches with early stopping (patience on the
    // validation perplexity, optional target_ppl cutoff).
    TrainResult train();

    GlacModel& model() { return *model_; }
    const Vocabulary& vocab() const { return vocab_; }
    const std::vector<StoryRecord>& train_set() const { return split_.train; }
    const std::vector<StoryRecord>& val_set() const { return split_.val; }

    void save(const std::string& path, size_t epoch) const;

private:
    double run_epoch(size_t epoch);

    AppConfig cfg_;
    CorpusSplit split_;
    Vocabulary vocab_;
    std::vector<std::vector<std::vector<int>>> targets_; // per train story
    std::shared_ptr<GlacModel> model_;
    std::unique_ptr<Adam> opt_;
    Rng train_rng_;
};

} // namespace glac
