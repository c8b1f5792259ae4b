#pragma once

#include <vector>

#include "glac/tensor.hpp"

namespace glac {

// One direction's worth of LSTM weights. Gate order within the stacked 4h
// rows is fixed as [input, forget, cell-candidate, output].
struct LstmParams {
    Tensor w_x; // [4h, d]
    Tensor w_h; // [4h, h]
    Tensor b;   // [4h]

    size_t hidden() const { return w_h.dim(1); }
    size_t input() const { return w_x.dim(1); }

    // Weights uniform in [-1/sqrt(h), 1/sqrt(h)], biases zero except the
    // forget block at 1 so early training does not erase the cell state.
    static LstmParams init(size_t d, size_t h, Rng& rng);
};

struct LstmState {
    Tensor h;
    Tensor c;

    static LstmState zero(size_t hidden);
};

// c' = f.c + i.g, h' = o.tanh(c') with i,f,o sigmoid gates, g tanh candidate.
LstmState lstm_step(Tape& tape, const Tensor& x, const LstmState& state,
                    const LstmParams& params);

// Per-position outputs of a forward and a backward pass, both starting from
// zero state: out[t] = concat(fwd hidden after x[0..t], bwd hidden after
// x[S-1..t]), each 2h wide.
std::vector<Tensor> encode_bidirectional(Tape& tape,
                                         const std::vector<Tensor>& features,
                                         const LstmParams& fwd,
                                         const LstmParams& bwd);

} // namespace glac
