#pragma once

#include <vector>

#include "glac/tensor.hpp"

namespace glac {

struct EncoderConfig {
    size_t feature_dim = 2048;
    size_t hidden = 512; // per direction
    size_t glocal_dim = 1024;
    bool use_global = true;
    bool use_local = true;
    double dropout = 0.5;

    // Width of the per-image concatenation feeding the first FC layer.
    size_t concat_dim() const;
    void validate() const; // both channels off is a configuration error
};

// Post-concatenation stack: fc1 -> bn1 -> dropout -> relu -> fc2 -> bn2
// -> dropout, output width glocal_dim. Running stats live here and mutate
// in training mode.
struct GlocalParams {
    Tensor fc1_w, fc1_b;
    Tensor fc2_w, fc2_b;
    Tensor bn1_gamma, bn1_beta, bn1_mean, bn1_var;
    Tensor bn2_gamma, bn2_beta, bn2_mean, bn2_var;

    static GlocalParams init(const EncoderConfig& cfg, Rng& rng);
};

// Conditioning vector for one image of a story.
struct GlocalVector {
    Tensor values; // [g]
    size_t source_index = 0;
};

// One glocal vector per image: selected channels concatenated per the
// config, then the shared FC stack over the S rows of one story. Training
// mode needs S >= 2 (batch-norm statistics).
std::vector<GlocalVector> build_glocal(Tape& tape,
                                       const std::vector<Tensor>& features,
                                       const std::vector<Tensor>& global_outputs,
                                       GlocalParams& params,
                                       const EncoderConfig& cfg, bool training,
                                       Rng& rng);

// The t-th vector, reused unchanged at every decoding step of sentence t.
const GlocalVector& glocal_for_sentence(const std::vector<GlocalVector>& glocals,
                                        size_t t);

} // namespace glac
