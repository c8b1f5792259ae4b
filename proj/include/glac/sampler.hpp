#pragma once

#include <set>
#include <string>
#include <vector>

#include "glac/rng.hpp"

namespace glac {

// Per-story tally of emitted words. Reset exactly at story boundaries
// (or per sentence when the reset switch says so).
class WordCounter {
public:
    explicit WordCounter(size_t vocab) : counts_(vocab, 0) {}

    size_t vocab() const { return counts_.size(); }
    int count(int token) const;
    void record(int token); // record_emission
    void reset();

private:
    std::vector<int> counts_;
};

struct SamplerConfig {
    double k = 0.3;
    int n_samples = 100;
    std::set<int> exempt; // token ids; <end> is exempt regardless
    uint64_t seed = 1;

    bool is_exempt(int token) const;
};

// p_hat(w) = p(w) / (1 + k * count_w) for non-exempt w, raw p(w) otherwise,
// then renormalized to sum 1.
std::vector<double> penalize(const std::vector<double>& probs,
                             const WordCounter& counter,
                             const SamplerConfig& cfg);

// Draws n_samples from probs and returns the modal sample. Ties break to
// the higher raw probability, then the lower token id.
int select_word(const std::vector<double>& probs, const SamplerConfig& cfg,
                Rng& rng);

// Max-stabilized softmax over raw logits (no tape involvement).
std::vector<double> softmax(const std::vector<double>& logits);

// One word per line, '#' starts a comment, blank lines ignored.
std::vector<std::string> load_exempt_words(const std::string& path);

// Shipped default exemption list: prepositions, pronouns, articles,
// conjunctions, auxiliaries, punctuation.
const std::vector<std::string>& default_exempt_words();

} // namespace glac
