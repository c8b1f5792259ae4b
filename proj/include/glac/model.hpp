#pragma once

#include <string>
#include <vector>

#include "glac/config.hpp"
#include "glac/corpus.hpp"
#include "glac/decoder.hpp"
#include "glac/glocal.hpp"
#include "glac/lstm.hpp"

namespace glac {

// The full network: bi-LSTM global channel, glocal FC stack, cascading
// sentence decoder. plain_seq2seq swaps all of that for a single LSTM
// encoder whose final state seeds an unconditioned decoder. Parameters are
// reachable through a fixed-order named registry; the registry aliases the
// live tensors, so optimizer updates through it mutate the model.
class GlacModel {
public:
    struct Named {
        std::string name;
        Tensor tensor;
    };

    // cfg must be resolved (vocab_size and dec_hidden pinned).
    GlacModel(const AppConfig& cfg, uint64_t init_seed);

    const AppConfig& config() const { return cfg_; }

    const std::vector<Named>& params() const { return params_; }
    std::vector<Named>& params() { return params_; }
    // Trainable parameters plus batch-norm running buffers.
    std::vector<Named> state_tensors() const;
    Tensor param(const std::string& name) const;
    void zero_grads();

    struct StoryLoss {
        Tensor total; // scalar, summed cross-entropy over the story
        size_t tokens = 0;
        std::vector<double> sentence_loss;
        std::vector<size_t> sentence_tokens;
        std::vector<LstmState> state_in; // decoder state entering sentence t
    };
    // Teacher-forced loss over one story. targets[t] is the encoded
    // (<start>..<end>) sentence aligned with image t.
    StoryLoss story_loss(Tape& tape, const StoryRecord& record,
                         const std::vector<std::vector<int>>& targets,
                         bool training, Rng& rng);

    struct StoryGen {
        std::vector<std::vector<int>> sentences;
        std::vector<std::vector<GenStep>> trace; // filled when requested
    };
    StoryGen generate_story(const StoryRecord& record, const GenOptions& opts,
                            Rng& rng, bool want_trace = false);

private:
    std::vector<Tensor> feature_tensors(const StoryRecord& record) const;
    std::vector<GlocalVector> make_glocals(Tape& tape,
                                           const std::vector<Tensor>& features,
                                           bool training, Rng& rng);
    LstmState seq2seq_context(Tape& tape, const std::vector<Tensor>& features);

    AppConfig cfg_;
    EncoderConfig enc_cfg_;

    LstmParams enc_fwd_, enc_bwd_; // bi-LSTM (use_global, full model)
    LstmParams s2s_enc_;           // plain seq2seq encoder
    GlocalParams glocal_;
    DecoderParams dec_;

    std::vector<Named> params_;
};

} // namespace glac
