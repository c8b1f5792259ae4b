#include "glac/model.hpp"

#include "glac/error.hpp"
#include "glac/tokens.hpp"

namespace glac {

GlacModel::GlacModel(const AppConfig& cfg, uint64_t init_seed) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.vocab_size == 0 || cfg_.dec_hidden == 0) {
        throw ConfigError("model requires a resolved config");
    }
    enc_cfg_.feature_dim = cfg_.feature_dim;
    enc_cfg_.hidden = cfg_.enc_hidden;
    enc_cfg_.glocal_dim = cfg_.glocal_dim;
    enc_cfg_.use_global = cfg_.use_global;
    enc_cfg_.use_local = cfg_.use_local;
    enc_cfg_.dropout = cfg_.dropout;

    Rng rng(Rng::mix(init_seed, 0x1417));
    auto reg = [this](const std::string& name, const Tensor& t) {
        params_.push_back({name, t});
    };

    if (cfg_.plain_seq2seq) {
        s2s_enc_ = LstmParams::init(cfg_.feature_dim, cfg_.dec_hidden, rng);
        reg("enc.w_x", s2s_enc_.w_x);
        reg("enc.w_h", s2s_enc_.w_h);
        reg("enc.b", s2s_enc_.b);
        dec_ = DecoderParams::init(cfg_.vocab_size, cfg_.embed_dim, 0,
                                   cfg_.dec_hidden, rng);
    } else {
        if (cfg_.use_global) {
            enc_fwd_ = LstmParams::init(cfg_.feature_dim, cfg_.enc_hidden, rng);
            enc_bwd_ = LstmParams::init(cfg_.feature_dim, cfg_.enc_hidden, rng);
            reg("enc_fwd.w_x", enc_fwd_.w_x);
            reg("enc_fwd.w_h", enc_fwd_.w_h);
            reg("enc_fwd.b", enc_fwd_.b);
            reg("enc_bwd.w_x", enc_bwd_.w_x);
            reg("enc_bwd.w_h", enc_bwd_.w_h);
            reg("enc_bwd.b", enc_bwd_.b);
        }
        glocal_ = GlocalParams::init(enc_cfg_, rng);
        reg("fc1.w", glocal_.fc1_w);
        reg("fc1.b", glocal_.fc1_b);
        reg("fc2.w", glocal_.fc2_w);
        reg("fc2.b", glocal_.fc2_b);
        reg("bn1.gamma", glocal_.bn1_gamma);
        reg("bn1.beta", glocal_.bn1_beta);
        reg("bn2.gamma", glocal_.bn2_gamma);
        reg("bn2.beta", glocal_.bn2_beta);
        dec_ = DecoderParams::init(cfg_.vocab_size, cfg_.embed_dim,
                                   cfg_.glocal_dim, cfg_.dec_hidden, rng);
    }
    reg("dec.embedding", dec_.embedding);
    reg("dec.w_x", dec_.lstm.w_x);
    reg("dec.w_h", dec_.lstm.w_h);
    reg("dec.b", dec_.lstm.b);
    reg("dec.out_w", dec_.out_w);
    reg("dec.out_b", dec_.out_b);
}

std::vector<GlacModel::Named> GlacModel::state_tensors() const {
    std::vector<Named> all = params_;
    if (!cfg_.plain_seq2seq) {
        all.push_back({"bn1.mean", glocal_.bn1_mean});
        all.push_back({"bn1.var", glocal_.bn1_var});
        all.push_back({"bn2.mean", glocal_.bn2_mean});
        all.push_back({"bn2.var", glocal_.bn2_var});
    }
    return all;
}

Tensor GlacModel::param(const std::string& name) const {
    for (const Named& n : params_) {
        if (n.name == name) return n.tensor;
    }
    for (const Named& n : state_tensors()) {
        if (n.name == name) return n.tensor;
    }
    throw ContractError("no parameter named " + name);
}

void GlacModel::zero_grads() {
    for (Named& n : params_) n.tensor.zero_grad();
}

std::vector<Tensor> GlacModel::feature_tensors(const StoryRecord& record) const {
    std::vector<Tensor> out;
    out.reserve(record.features.size());
    for (const auto& f : record.features) {
        if (f.size() != cfg_.feature_dim) {
            throw DataError("story " + record.story_id + ": feature dim " +
                            std::to_string(f.size()) + ", model expects " +
                            std::to_string(cfg_.feature_dim));
        }
        out.push_back(Tensor::from({f.size()}, f));
    }
    return out;
}

std::vector<GlocalVector> GlacModel::make_glocals(
    Tape& tape, const std::vector<Tensor>& features, bool training, Rng& rng) {
    std::vector<Tensor> global_outputs;
    if (cfg_.use_global) {
        global_outputs = encode_bidirectional(tape, features, enc_fwd_, enc_bwd_);
    } else {
        global_outputs.resize(features.size());
    }
    return build_glocal(tape, features, global_outputs, glocal_, enc_cfg_,
                        training, rng);
}

LstmState GlacModel::seq2seq_context(Tape& tape,
                                     const std::vector<Tensor>& features) {
    if (features.empty()) throw ContractError("seq2seq encoder: empty story");
    LstmState st = LstmState::zero(cfg_.dec_hidden);
    for (const Tensor& x : features) {
        st = lstm_step(tape, x, st, s2s_enc_);
    }
    return st;
}

GlacModel::StoryLoss GlacModel::story_loss(
    Tape& tape, const StoryRecord& record,
    const std::vector<std::vector<int>>& targets, bool training, Rng& rng) {
    if (targets.size() != record.features.size()) {
        throw DataError("story " + record.story_id + ": " +
                        std::to_string(record.features.size()) +
                        " images but " + std::to_string(targets.size()) +
                        " target sentences");
    }
    const std::vector<Tensor> features = feature_tensors(record);
    const size_t S = features.size();

    std::vector<GlocalVector> glocals;
    LstmState state = LstmState::zero(cfg_.dec_hidden);
    if (cfg_.plain_seq2seq) {
        state = seq2seq_context(tape, features);
    } else {
        glocals = make_glocals(tape, features, training, rng);
    }

    StoryLoss out;
    for (size_t t = 0; t < S; ++t) {
        out.state_in.push_back(state);
        Tensor cond;
        if (!cfg_.plain_seq2seq) {
            cond = glocal_for_sentence(glocals, t).values;
        }
        SentenceLoss s =
            teacher_forced_sentence(tape, targets[t], cond, state, dec_);
        out.total = out.total.defined() ? add(tape, out.total, s.loss) : s.loss;
        out.tokens += s.tokens;
        out.sentence_loss.push_back(s.loss.value());
        out.sentence_tokens.push_back(s.tokens);
        // Seq2seq decoding is one long sequence; the cascading flag only
        // governs the glocal model.
        if (cfg_.plain_seq2seq || cfg_.cascading) {
            state = s.state;
        } else {
            state = LstmState::zero(cfg_.dec_hidden);
        }
    }
    return out;
}

GlacModel::StoryGen GlacModel::generate_story(const StoryRecord& record,
                                              const GenOptions& opts, Rng& rng,
                                              bool want_trace) {
    const std::vector<Tensor> features = feature_tensors(record);
    const size_t S = features.size();

    Tape tape; // forward only, discarded
    Rng dummy(0);
    std::vector<GlocalVector> glocals;
    LstmState state = LstmState::zero(cfg_.dec_hidden);
    if (cfg_.plain_seq2seq) {
        state = seq2seq_context(tape, features);
    } else {
        glocals = make_glocals(tape, features, /*training=*/false, dummy);
    }

    WordCounter counter(cfg_.vocab_size);
    StoryGen out;
    for (size_t t = 0; t < S; ++t) {
        if (opts.reset_per_sentence) counter.reset();
        Tensor cond;
        if (!cfg_.plain_seq2seq) {
            cond = glocal_for_sentence(glocals, t).values;
        }
        std::vector<GenStep> trace;
        GenResult r =
            generate_sentence(tape, cond, state, dec_, counter, opts, rng,
                              cfg_.max_len, want_trace ? &trace : nullptr);
        out.sentences.push_back(std::move(r.tokens));
        if (want_trace) out.trace.push_back(std::move(trace));
        if (cfg_.plain_seq2seq || cfg_.cascading) {
            state = r.state;
        } else {
            state = LstmState::zero(cfg_.dec_hidden);
        }
    }
    return out;
}

} // namespace glac
