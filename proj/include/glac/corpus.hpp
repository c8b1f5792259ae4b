#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "glac/rng.hpp"
#include "glac/tokens.hpp"

namespace glac {

// One story: S image-feature vectors aligned with S tokenized sentences.
// Sentences hold surface token strings; ids are assigned against a
// Vocabulary at encode time, which also adds the <start>/<end> delimiters.
struct StoryRecord {
    std::string story_id;
    std::vector<std::vector<double>> features;
    std::vector<std::vector<std::string>> sentences;

    size_t images() const { return features.size(); }
    size_t feature_dim() const {
        return features.empty() ? 0 : features[0].size();
    }
};

class Vocabulary {
public:
    Vocabulary();

    // Words at frequency >= min_count get ids in descending-frequency order
    // (ties alphabetical) after the four reserved ids; rarer words fall to
    // <unk> at encode time.
    static Vocabulary build(const std::vector<StoryRecord>& records,
                            size_t min_count);
    // Rebuilds from a full id-ordered word list (checkpoint load).
    static Vocabulary from_words(std::vector<std::string> words);

    size_t size() const { return words_.size(); }
    int id(const std::string& word) const; // <unk> for out-of-vocabulary
    const std::string& word(int id) const;
    bool contains(const std::string& word) const;
    const std::vector<std::string>& words() const { return words_; }
    size_t min_count() const { return min_count_; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, int> ids_;
    size_t min_count_ = 1;
};

// Lowercase, split on whitespace, split punctuation into single-character
// tokens. Idempotent on its own space-joined output.
std::vector<std::string> tokenize(const std::string& text);

// <start> + ids + <end> for every sentence of the record.
std::vector<std::vector<int>> encode(const Vocabulary& vocab,
                                     const StoryRecord& record);

// One JSON object per line: {"story_id", "features", "sentences"}.
// allow_unlabeled admits records with an empty sentence list (generation
// inputs); otherwise sentence/feature counts must match.
std::vector<StoryRecord> load_corpus(const std::string& path,
                                     bool allow_unlabeled = false);
void save_corpus(const std::vector<StoryRecord>& records,
                 const std::string& path);

struct CorpusSplit {
    std::vector<StoryRecord> train;
    std::vector<StoryRecord> val;
    std::vector<StoryRecord> test;
};

// Deterministic tail split: the last ceil(n*val_fraction) records become
// validation. val_fraction 0 keeps everything in train.
CorpusSplit split_corpus(const std::vector<StoryRecord>& records,
                         double val_fraction);

struct SynthSpec {
    size_t n_stories = 64;
    size_t images_per_story = 5;
    size_t feature_dim = 32;
    size_t content_words = 40;
    double noise = 0.05;
};

// Deterministic toy corpus: each image encodes one latent content word
// (fixed per-seed random embedding plus Gaussian noise) and its sentence is
// a fixed template realization of that word, so features fully determine
// targets and a correct model can memorize the corpus.
std::vector<StoryRecord> synth_corpus(uint64_t seed, const SynthSpec& spec);

// Permutation of [0, n) specific to (seed, epoch).
std::vector<size_t> epoch_order(size_t n_records, size_t epoch, uint64_t seed);

} // namespace glac
