#pragma once

#include <vector>

#include "glac/lstm.hpp"
#include "glac/sampler.hpp"
#include "glac/tensor.hpp"

namespace glac {

struct DecoderConfig {
    size_t embed_dim = 256; // paper-fixed default
    size_t hidden = 0;      // h_dec; 0 resolves to the glocal dim
    bool cascading = true;
    size_t max_len = 30; // surface tokens per sentence
    size_t vocab = 0;
};

struct DecoderParams {
    Tensor embedding; // [V, e]
    LstmParams lstm;  // input e + cond_dim
    Tensor out_w;     // [V, h_dec]
    Tensor out_b;     // [V]

    // cond_dim 0 builds the unconditioned (plain seq2seq) input width.
    static DecoderParams init(size_t vocab, size_t embed_dim, size_t cond_dim,
                              size_t hidden, Rng& rng);
};

struct DecodeStep {
    Tensor logits; // [V]
    LstmState state;
};

// Input = concat(embedding[prev_token], glocal); an undefined glocal feeds
// the embedding alone.
DecodeStep decode_step(Tape& tape, int prev_token, const Tensor& glocal,
                       const LstmState& state, const DecoderParams& params);

struct SentenceLoss {
    Tensor loss; // scalar, summed cross-entropy over scored positions
    LstmState state;
    size_t tokens = 0; // scored positions
};

// Step i consumes target[i] and is scored against target[i+1]. The target
// must be <start>-led and <end>-terminated.
SentenceLoss teacher_forced_sentence(Tape& tape, const std::vector<int>& target,
                                     const Tensor& glocal,
                                     const LstmState& state_in,
                                     const DecoderParams& params);

struct GenOptions {
    SamplerConfig sampler;
    bool use_count_penalty = true;
    bool greedy = false;             // argmax instead of sample-100
    bool reset_per_sentence = false; // counter reset scope switch
};

// Per-step generation record for instrumented tests.
struct GenStep {
    std::vector<double> logits;
    std::vector<double> glocal;
    int chosen = 0;
};

struct GenResult {
    std::vector<int> tokens; // surface tokens, <end> excluded
    LstmState state;         // post-final-step state
    size_t steps = 0;
};

// From <start>, repeatedly decode_step + sampler until <end> or max_len
// surface tokens. Emitted words are recorded on the counter.
GenResult generate_sentence(Tape& tape, const Tensor& glocal,
                            const LstmState& state_in,
                            const DecoderParams& params, WordCounter& counter,
                            const GenOptions& opts, Rng& rng, size_t max_len,
                            std::vector<GenStep>* trace = nullptr);

} // namespace glac
