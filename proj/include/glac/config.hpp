#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace glac {

// Every tunable in one flat record, mirroring the key=value config file
// one to one. vocab_size and dec_hidden may be 0 (derive from corpus /
// default to glocal_dim); resolved() pins them.
struct AppConfig {
    // optimization
    double learning_rate = 0.001;
    double weight_decay = 1e-5;
    size_t batch_size = 64;
    size_t epochs = 100;
    uint64_t seed = 1;
    double grad_clip = 5.0; // global norm; 0 disables
    size_t patience = 5;    // early-stop epochs without val improvement
    double target_ppl = 0;  // stop once val ppl drops below; 0 disables
    double val_fraction = 0.1;
    size_t min_count = 1;

    // dimensions
    size_t feature_dim = 2048;
    size_t enc_hidden = 512;
    size_t glocal_dim = 1024;
    size_t dec_hidden = 0;
    size_t embed_dim = 256;
    size_t max_len = 30;
    size_t vocab_size = 0;
    double dropout = 0.5;

    // ablation flags
    bool cascading = true;
    bool use_global = true;
    bool use_local = true;
    bool use_count_penalty = true;
    bool plain_seq2seq = false;

    // sampler
    double k = 0.3;
    int n_samples = 100;
    std::string count_reset = "story"; // or "sentence"
    std::string exempt_words;          // path; empty = built-in list

    void validate() const;
    AppConfig resolved(size_t corpus_vocab) const;
};

AppConfig parse_config(const std::string& text);
AppConfig load_config(const std::string& path);
std::string serialize_config(const AppConfig& cfg);

// The six Table-style run configurations, in fixed order:
// lstm_seq2seq, minus_cascading, minus_global, minus_local, minus_count,
// full. Flags are normalized to the full model first; each row then flips
// exactly its own flag.
std::vector<std::pair<std::string, AppConfig>> ablation_matrix(
    const AppConfig& base);

} // namespace glac
