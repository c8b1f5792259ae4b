#include "glac/lstm.hpp"

#include <cmath>

#include "glac/error.hpp"

namespace glac {

LstmParams LstmParams::init(size_t d, size_t h, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(h));
    LstmParams p;
    p.w_x = Tensor::uniform({4 * h, d}, -bound, bound, rng, true);
    p.w_h = Tensor::uniform({4 * h, h}, -bound, bound, rng, true);
    p.b = Tensor::zeros({4 * h}, true);
    for (size_t j = h; j < 2 * h; ++j) p.b.data()[j] = 1.0;
    return p;
}

LstmState LstmState::zero(size_t hidden) {
    return {Tensor::zeros({hidden}), Tensor::zeros({hidden})};
}

LstmState lstm_step(Tape& tape, const Tensor& x, const LstmState& state,
                    const LstmParams& params) {
    const size_t h = params.hidden();
    const size_t d = params.input();
    if (x.rank() != 1 || x.dim(0) != d) {
        throw ShapeError("lstm_step: input " + x.shape_str() +
                         " does not match weight input size " +
                         std::to_string(d));
    }
    if (state.h.rank() != 1 || state.h.dim(0) != h || state.c.rank() != 1 ||
        state.c.dim(0) != h) {
        throw ShapeError("lstm_step: state " + state.h.shape_str() + "/" +
                         state.c.shape_str() + " does not match hidden size " +
                         std::to_string(h));
    }
    if (params.w_x.dim(0) != 4 * h || params.b.dim(0) != 4 * h) {
        throw ShapeError("lstm_step: gate stack is not 4h rows");
    }

    Tensor pre = add(tape, add(tape, matvec(tape, params.w_x, x),
                               matvec(tape, params.w_h, state.h)),
                     params.b);
    Tensor i = sigmoid(tape, slice(tape, pre, 0, h));
    Tensor f = sigmoid(tape, slice(tape, pre, h, h));
    Tensor g = tanh(tape, slice(tape, pre, 2 * h, h));
    Tensor o = sigmoid(tape, slice(tape, pre, 3 * h, h));

    Tensor c = add(tape, mul(tape, f, state.c), mul(tape, i, g));
    Tensor hout = mul(tape, o, tanh(tape, c));
    return {hout, c};
}

std::vector<Tensor> encode_bidirectional(Tape& tape,
                                         const std::vector<Tensor>& features,
                                         const LstmParams& fwd,
                                         const LstmParams& bwd) {
    if (features.empty()) {
        throw ContractError("encode_bidirectional: empty sequence");
    }
    const size_t S = features.size();
    const size_t d = features[0].dim(0);
    for (const Tensor& x : features) {
        if (x.rank() != 1 || x.dim(0) != d) {
            throw ShapeError("encode_bidirectional: mixed feature dims " +
                             features[0].shape_str() + " vs " + x.shape_str());
        }
    }

    std::vector<Tensor> hf(S), hb(S);
    LstmState st = LstmState::zero(fwd.hidden());
    for (size_t t = 0; t < S; ++t) {
        st = lstm_step(tape, features[t], st, fwd);
        hf[t] = st.h;
    }
    st = LstmState::zero(bwd.hidden());
    for (size_t t = S; t-- > 0;) {
        st = lstm_step(tape, features[t], st, bwd);
        hb[t] = st.h;
    }

    std::vector<Tensor> out(S);
    for (size_t t = 0; t < S; ++t) {
        out[t] = concat(tape, {hf[t], hb[t]}, 0);
    }
    return out;
}

} // namespace glac
