#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "checks.hpp"
#include "glac/decoder.hpp"
#include "glac/error.hpp"
#include "glac/tokens.hpp"

using namespace glac;
using namespace glac::testing;

namespace {

constexpr size_t kVocab = 8, kEmbed = 3, kCond = 2, kHidden = 4;

DecoderParams zeroed_params(size_t vocab = kVocab, size_t cond = kCond) {
    Rng rng(1);
    DecoderParams p = DecoderParams::init(vocab, kEmbed, cond, kHidden, rng);
    for (auto* t : {&p.embedding, &p.lstm.w_x, &p.lstm.w_h, &p.lstm.b, &p.out_w,
                    &p.out_b}) {
        std::fill(t->data().begin(), t->data().end(), 0.0);
    }
    return p;
}

GenOptions plain_opts(uint64_t seed = 3) {
    GenOptions opts;
    opts.sampler.seed = seed;
    return opts;
}

} // namespace

TEST_CASE("init shapes and embedding range") {
    Rng rng(101);
    DecoderParams p = DecoderParams::init(kVocab, kEmbed, kCond, kHidden, rng);
    CHECK(p.embedding.shape() == std::vector<size_t>{kVocab, kEmbed});
    CHECK(p.lstm.input() == kEmbed + kCond);
    CHECK(p.lstm.hidden() == kHidden);
    CHECK(p.out_w.shape() == std::vector<size_t>{kVocab, kHidden});
    CHECK(p.out_b.shape() == std::vector<size_t>{kVocab});
    for (double v : p.embedding.data()) CHECK(std::fabs(v) <= 0.1);
    for (double v : p.out_b.data()) CHECK(v == 0.0);

    DecoderParams unconditioned = DecoderParams::init(kVocab, kEmbed, 0, kHidden, rng);
    CHECK(unconditioned.lstm.input() == kEmbed);
}

TEST_CASE("zero parameters leave the bias as the logits") {
    DecoderParams p = zeroed_params();
    p.out_b = Tensor::from({kVocab}, {0.1, -0.3, 0.7, 0.2, -0.5, 0.4, 0.0, 1.0});
    Tape tape;
    Tensor glocal = Tensor::from({kCond}, {0.5, -0.5});
    DecodeStep step = decode_step(tape, kStartId, glocal, LstmState::zero(kHidden), p);
    CHECK(step.logits.data() == p.out_b.data());
    for (double v : step.state.h.data()) CHECK(v == 0.0);
}

TEST_CASE("decode_step validates the previous token") {
    Rng rng(102);
    DecoderParams p = DecoderParams::init(kVocab, kEmbed, kCond, kHidden, rng);
    Tape tape;
    Tensor glocal = Tensor::zeros({kCond});
    LstmState s = LstmState::zero(kHidden);
    CHECK_THROWS_AS(decode_step(tape, -1, glocal, s, p), IndexError);
    CHECK_THROWS_AS(decode_step(tape, static_cast<int>(kVocab), glocal, s, p),
                    IndexError);
}

TEST_CASE("undefined glocal feeds the embedding alone") {
    Rng rng(103);
    DecoderParams p = DecoderParams::init(kVocab, kEmbed, 0, kHidden, rng);
    Tape tape;
    DecodeStep step = decode_step(tape, 4, Tensor(), LstmState::zero(kHidden), p);
    CHECK(step.logits.shape() == std::vector<size_t>{kVocab});
    CHECK(step.logits.all_finite());

    Tape t2;
    Tensor emb = lookup(t2, p.embedding, 4);
    LstmState next = lstm_step(t2, emb, LstmState::zero(kHidden), p.lstm);
    Tensor logits = add(t2, matvec(t2, p.out_w, next.h), p.out_b);
    CHECK(step.logits.data() == logits.data());

    // a conditioning vector on an unconditioned decoder is a width mismatch
    CHECK_THROWS_AS(
        decode_step(tape, 4, Tensor::zeros({kCond}), LstmState::zero(kHidden), p),
        ShapeError);
}

TEST_CASE("decode_step is deterministic") {
    Rng rng(104);
    DecoderParams p = DecoderParams::init(kVocab, kEmbed, kCond, kHidden, rng);
    Tensor glocal = rand_tensor({kCond}, rng);
    Tape t1, t2;
    DecodeStep a = decode_step(t1, 5, glocal, LstmState::zero(kHidden), p);
    DecodeStep b = decode_step(t2, 5, glocal, LstmState::zero(kHidden), p);
    CHECK(a.logits.data() == b.logits.data());
    CHECK(a.state.h.data() == b.state.h.data());
    CHECK(a.state.c.data() == b.state.c.data());
}

TEST_CASE("teacher forcing scores len-1 positions") {
    Rng rng(105);
    DecoderParams p = DecoderParams::init(kVocab, kEmbed, kCond, kHidden, rng);
    Tape tape;
    Tensor glocal = rand_tensor({kCond}, rng);
    LstmState s = LstmState::zero(kHidden);

    SentenceLoss minimal =
        teacher_forced_sentence(tape, {kStartId, kEndId}, glocal, s, p);
    CHECK(minimal.tokens == 1);

    SentenceLoss three = teacher_forced_sentence(
        tape, {kStartId, 4, 5, kEndId}, glocal, s, p);
    CHECK(three.tokens == 3);
    CHECK(three.loss.value() > 0.0);
}

TEST_CASE("teacher forcing rejects malformed targets") {
    Rng rng(106);
    DecoderParams p = DecoderParams::init(kVocab, kEmbed, kCond, kHidden, rng);
    Tape tape;
    Tensor glocal = Tensor::zeros({kCond});
    LstmState s = LstmState::zero(kHidden);
    CHECK_THROWS_AS(teacher_forced_sentence(tape, {}, glocal, s, p), DataError);
    CHECK_THROWS_AS(teacher_forced_sentence(tape, {kStartId}, glocal, s, p),
                    DataError);
    CHECK_THROWS_AS(
        teacher_forced_sentence(tape, {4, 5, kEndId}, glocal, s, p), DataError);
    CHECK_THROWS_AS(
        teacher_forced_sentence(tape, {kStartId, 4, 5}, glocal, s, p), DataError);
}

TEST_CASE("zero parameters give log V per scored position") {
    DecoderParams p = zeroed_params(10);
    Tape tape;
    Tensor glocal = Tensor::zeros({kCond});
    SentenceLoss out = teacher_forced_sentence(tape, {kStartId, 4, 7, kEndId},
                                               glocal, LstmState::zero(kHidden), p);
    CHECK(out.tokens == 3);
    CHECK(std::fabs(out.loss.value() - 3.0 * std::log(10.0)) < 1e-9);
}

TEST_CASE("sentence loss equals the explicit step-by-step chain") {
    Rng rng(107);
    DecoderParams p = DecoderParams::init(kVocab, kEmbed, kCond, kHidden, rng);
    Tensor glocal = rand_tensor({kCond}, rng);
    std::vector<int> target = {kStartId, 4, 6, 5, kEndId};

    Tape tape;
    SentenceLoss got = teacher_forced_sentence(tape, target, glocal,
                                               LstmState::zero(kHidden), p);

    Tape t2;
    LstmState s = LstmState::zero(kHidden);
    Tensor loss;
    for (size_t i = 0; i + 1 < target.size(); ++i) {
        DecodeStep step = decode_step(t2, target[i], glocal, s, p);
        s = step.state;
        Tensor ce = softmax_cross_entropy(t2, step.logits, {target[i + 1]});
        loss = loss.defined() ? add(t2, loss, ce) : ce;
    }
    CHECK(got.loss.value() == loss.value());
    CHECK(got.state.h.data() == s.h.data());
    CHECK(got.state.c.data() == s.c.data());
}

TEST_CASE("finite differences through teacher forcing") {
    Rng rng(108);
    DecoderParams p = DecoderParams::init(6, 2, 2, 3, rng);
    Tensor glocal = rand_tensor({2}, rng);
    LstmState s;
    s.h = rand_tensor({3}, rng);
    s.c = rand_tensor({3}, rng);
    std::vector<int> target = {kStartId, 4, 5, kEndId};
    FdSpec spec;
    spec.h = 1e-5; // the summed loss needs a larger step to tame roundoff
    check_gradients(
        [&](Tape& t) {
            return teacher_forced_sentence(t, target, glocal, s, p).loss;
        },
        {p.embedding, p.lstm.w_x, p.lstm.w_h, p.lstm.b, p.out_w, p.out_b,
         glocal, s.h, s.c},
        spec);
}

TEST_CASE("generation stops on end and records nothing for it") {
    DecoderParams p = zeroed_params();
    auto& b = p.out_b.data();
    std::fill(b.begin(), b.end(), -10.0);
    b[kEndId] = 10.0;
    WordCounter counter(kVocab);
    Tape tape;
    Rng rng(9);
    GenResult out = generate_sentence(tape, Tensor::zeros({kCond}),
                                      LstmState::zero(kHidden), p, counter,
                                      plain_opts(), rng, 30);
    CHECK(out.tokens.empty());
    CHECK(out.steps == 1);
    for (size_t w = 0; w < kVocab; ++w) CHECK(counter.count(static_cast<int>(w)) == 0);
}

TEST_CASE("generation truncates at max_len when end never wins") {
    DecoderParams p = zeroed_params();
    auto& b = p.out_b.data();
    std::fill(b.begin(), b.end(), -10.0);
    b[5] = 10.0;
    WordCounter counter(kVocab);
    Tape tape;
    Rng rng(9);
    GenOptions opts = plain_opts();
    opts.greedy = true;
    opts.use_count_penalty = false;
    GenResult out = generate_sentence(tape, Tensor::zeros({kCond}),
                                      LstmState::zero(kHidden), p, counter,
                                      opts, rng, 4);
    CHECK(out.tokens == std::vector<int>{5, 5, 5, 5});
    CHECK(out.steps == 4);
    CHECK(counter.count(5) == 4);
}

TEST_CASE("a large count penalty forces a switch to the runner-up") {
    DecoderParams p = zeroed_params();
    auto& b = p.out_b.data();
    std::fill(b.begin(), b.end(), -20.0);
    b[4] = 3.0;
    b[5] = 2.5;
    WordCounter counter(kVocab);
    Tape tape;
    Rng rng(17);
    GenOptions opts = plain_opts();
    opts.sampler.k = 1e9;
    GenResult out = generate_sentence(tape, Tensor::zeros({kCond}),
                                      LstmState::zero(kHidden), p, counter,
                                      opts, rng, 2);
    CHECK(out.tokens == std::vector<int>{4, 5});

    // penalty off: the same rigged logits repeat the favorite
    WordCounter c2(kVocab);
    Rng r2(17);
    GenOptions off = plain_opts();
    off.use_count_penalty = false;
    off.greedy = true;
    GenResult rep = generate_sentence(tape, Tensor::zeros({kCond}),
                                      LstmState::zero(kHidden), p, c2, off, r2,
                                      2);
    CHECK(rep.tokens == std::vector<int>{4, 4});
}

TEST_CASE("sampled generation is deterministic per seed") {
    Rng init(109);
    DecoderParams p = DecoderParams::init(kVocab, kEmbed, kCond, kHidden, init);
    Tensor glocal = rand_tensor({kCond}, init);
    Tape tape;
    WordCounter c1(kVocab), c2(kVocab);
    Rng r1(33), r2(33);
    GenResult a = generate_sentence(tape, glocal, LstmState::zero(kHidden), p,
                                    c1, plain_opts(), r1, 10);
    GenResult bres = generate_sentence(tape, glocal, LstmState::zero(kHidden),
                                       p, c2, plain_opts(), r2, 10);
    CHECK(a.tokens == bres.tokens);
    CHECK(a.steps == bres.steps);
}

TEST_CASE("trace captures logits, conditioning, and choices") {
    DecoderParams p = zeroed_params();
    auto& b = p.out_b.data();
    std::fill(b.begin(), b.end(), -10.0);
    b[6] = 10.0;
    WordCounter counter(kVocab);
    Tape tape;
    Rng rng(9);
    GenOptions opts = plain_opts();
    opts.greedy = true;
    std::vector<GenStep> trace;
    Tensor glocal = Tensor::from({kCond}, {0.25, -0.75});
    GenResult out = generate_sentence(tape, glocal, LstmState::zero(kHidden),
                                      p, counter, opts, rng, 2, &trace);
    REQUIRE(trace.size() == 2);
    CHECK(trace[0].chosen == 6);
    CHECK(trace[0].logits == p.out_b.data());
    CHECK(trace[0].glocal == glocal.data());
    CHECK(out.tokens.size() == 2);
}
