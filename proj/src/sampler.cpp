#include "glac/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "glac/error.hpp"
#include "glac/tokens.hpp"

namespace glac {

int WordCounter::count(int token) const {
    if (token < 0 || static_cast<size_t>(token) >= counts_.size()) {
        throw IndexError("word counter: token " + std::to_string(token) +
                         " outside vocabulary of " +
                         std::to_string(counts_.size()));
    }
    return counts_[static_cast<size_t>(token)];
}

void WordCounter::record(int token) {
    if (token < 0 || static_cast<size_t>(token) >= counts_.size()) {
        throw IndexError("word counter: token " + std::to_string(token) +
                         " outside vocabulary of " +
                         std::to_string(counts_.size()));
    }
    ++counts_[static_cast<size_t>(token)];
}

void WordCounter::reset() { std::fill(counts_.begin(), counts_.end(), 0); }

bool SamplerConfig::is_exempt(int token) const {
    return token == kEndId || exempt.count(token) > 0;
}

namespace {

void check_distribution(const std::vector<double>& probs, const char* what) {
    if (probs.empty()) throw ContractError(std::string(what) + ": empty distribution");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) {
            throw ContractError(std::string(what) +
                                ": negative or NaN probability");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ContractError(std::string(what) + ": probabilities sum to " +
                            std::to_string(sum) + ", not 1");
    }
}

} // namespace

std::vector<double> penalize(const std::vector<double>& probs,
                             const WordCounter& counter,
                             const SamplerConfig& cfg) {
    if (cfg.k < 0.0) {
        throw ParamError("penalty sensitivity k must be non-negative, got " +
                         std::to_string(cfg.k));
    }
    check_distribution(probs, "penalize");
    if (probs.size() != counter.vocab()) {
        throw ContractError("penalize: " + std::to_string(probs.size()) +
                            " probabilities vs counter over " +
                            std::to_string(counter.vocab()) + " tokens");
    }

    std::vector<double> out(probs.size());
    double sum = 0.0;
    for (size_t w = 0; w < probs.size(); ++w) {
        const int token = static_cast<int>(w);
        out[w] = cfg.is_exempt(token)
                     ? probs[w]
                     : probs[w] / (1.0 + cfg.k * counter.count(token));
        sum += out[w];
    }
    for (double& p : out) p /= sum;
    return out;
}

int select_word(const std::vector<double>& probs, const SamplerConfig& cfg,
                Rng& rng) {
    check_distribution(probs, "select_word");
    if (cfg.n_samples < 1) {
        throw ParamError("select_word: n_samples must be positive");
    }

    std::vector<int> hits(probs.size(), 0);
    for (int s = 0; s < cfg.n_samples; ++s) {
        const double u = rng.uniform01();
        double acc = 0.0;
        size_t pick = probs.size() - 1;
        for (size_t w = 0; w < probs.size(); ++w) {
            acc += probs[w];
            if (u < acc) {
                pick = w;
                break;
            }
        }
        ++hits[pick];
    }

    size_t best = 0;
    for (size_t w = 1; w < probs.size(); ++w) {
        if (hits[w] > hits[best] ||
            (hits[w] == hits[best] && probs[w] > probs[best])) {
            best = w;
        }
    }
    return static_cast<int>(best);
}

std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty()) throw ContractError("softmax: empty logits");
    double m = logits[0];
    for (double z : logits) m = std::max(m, z);
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (double& p : out) p /= sum;
    return out;
}

std::vector<std::string> load_exempt_words(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open exempt-word list: " + path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const size_t a = line.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) continue;
        const size_t b = line.find_last_not_of(" \t\r\n");
        words.push_back(line.substr(a, b - a + 1));
    }
    return words;
}

const std::vector<std::string>& default_exempt_words() {
    static const std::vector<std::string> words = {
        // articles
        "a", "an", "the",
        // prepositions
        "in", "on", "at", "of", "to", "for", "with", "from", "by", "about",
        "as", "into", "over", "under", "near", "after", "before", "between",
        "through", "during", "off", "up", "down", "out", "around",
        // pronouns and determiners
        "i", "you", "he", "she", "it", "we", "they", "me", "him", "her",
        "us", "them", "my", "your", "his", "its", "our", "their", "this",
        "that", "these", "those", "who", "what", "which",
        // conjunctions
        "and", "or", "but", "so", "because", "if", "while", "when", "than",
        "nor", "yet",
        // auxiliaries
        "is", "are", "was", "were", "be", "been", "being", "am", "do",
        "does", "did", "have", "has", "had", "will", "would", "can",
        "could", "should", "may", "might", "must",
        // adverbial function words
        "there", "here", "not", "no",
        // punctuation
        ".", ",", "!", "?", ";", ":", "'", "\"", "(", ")", "-",
    };
    return words;
}

} // namespace glac
