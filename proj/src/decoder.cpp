#include "glac/decoder.hpp"

#include <cmath>

#include "glac/error.hpp"
#include "glac/tokens.hpp"

namespace glac {

DecoderParams DecoderParams::init(size_t vocab, size_t embed_dim,
                                  size_t cond_dim, size_t hidden, Rng& rng) {
    DecoderParams p;
    p.embedding = Tensor::uniform({vocab, embed_dim}, -0.1, 0.1, rng, true);
    p.lstm = LstmParams::init(embed_dim + cond_dim, hidden, rng);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    p.out_w = Tensor::uniform({vocab, hidden}, -bound, bound, rng, true);
    p.out_b = Tensor::zeros({vocab}, true);
    return p;
}

DecodeStep decode_step(Tape& tape, int prev_token, const Tensor& glocal,
                       const LstmState& state, const DecoderParams& params) {
    if (prev_token < 0 ||
        static_cast<size_t>(prev_token) >= params.embedding.dim(0)) {
        throw IndexError("decode_step: token " + std::to_string(prev_token) +
                         " outside vocabulary of " +
                         std::to_string(params.embedding.dim(0)));
    }
    Tensor emb = lookup(tape, params.embedding, prev_token);
    Tensor input = glocal.defined() ? concat(tape, {emb, glocal}, 0) : emb;
    LstmState next = lstm_step(tape, input, state, params.lstm);
    Tensor logits =
        add(tape, matvec(tape, params.out_w, next.h), params.out_b);
    return {logits, next};
}

SentenceLoss teacher_forced_sentence(Tape& tape, const std::vector<int>& target,
                                     const Tensor& glocal,
                                     const LstmState& state_in,
                                     const DecoderParams& params) {
    if (target.size() < 2 || target.front() != kStartId ||
        target.back() != kEndId) {
        throw DataError(
            "teacher forcing: target must run <start> ... <end>, got " +
            std::to_string(target.size()) + " tokens");
    }
    SentenceLoss out;
    out.state = state_in;
    for (size_t i = 0; i + 1 < target.size(); ++i) {
        DecodeStep step = decode_step(tape, target[i], glocal, out.state, params);
        out.state = step.state;
        Tensor ce = softmax_cross_entropy(tape, step.logits, {target[i + 1]});
        out.loss = out.loss.defined() ? add(tape, out.loss, ce) : ce;
        ++out.tokens;
    }
    return out;
}

GenResult generate_sentence(Tape& tape, const Tensor& glocal,
                            const LstmState& state_in,
                            const DecoderParams& params, WordCounter& counter,
                            const GenOptions& opts, Rng& rng, size_t max_len,
                            std::vector<GenStep>* trace) {
    GenResult out;
    out.state = state_in;
    int prev = kStartId;
    while (out.tokens.size() < max_len) {
        DecodeStep step = decode_step(tape, prev, glocal, out.state, params);
        out.state = step.state;
        ++out.steps;

        std::vector<double> probs = softmax(step.logits.data());
        if (opts.use_count_penalty) {
            probs = penalize(probs, counter, opts.sampler);
        }

        int chosen;
        if (opts.greedy) {
            size_t best = 0;
            for (size_t w = 1; w < probs.size(); ++w) {
                if (probs[w] > probs[best]) best = w;
            }
            chosen = static_cast<int>(best);
        } else {
            chosen = select_word(probs, opts.sampler, rng);
        }

        if (trace) {
            GenStep t;
            t.logits = step.logits.data();
            if (glocal.defined()) t.glocal = glocal.data();
            t.chosen = chosen;
            trace->push_back(std::move(t));
        }

        if (chosen == kEndId) break;
        out.tokens.push_back(chosen);
        counter.record(chosen);
        prev = chosen;
    }
    return out;
}

} // namespace glac
