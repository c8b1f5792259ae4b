#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "glac/checkpoint.hpp"
#include "glac/config.hpp"
#include "glac/corpus.hpp"
#include "glac/gradcheck.hpp"
#include "glac/train.hpp"

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

int cmd_train(const std::string& corpus_path, const std::string& config_path,
              bool seed_set, uint64_t seed, const std::string& out_path) {
    glac::AppConfig cfg = glac::load_config(config_path);
    if (seed_set) cfg.seed = seed;
    auto records = glac::load_corpus(corpus_path);
    glac::Trainer trainer(cfg, std::move(records));
    glac::TrainResult result = trainer.train();
    for (const glac::EpochMetrics& m : result.metrics) {
        std::cout << "epoch=" << m.epoch << " train_loss=" << fmt(m.train_loss)
                  << " val_ppl=" << fmt(m.val_ppl) << "\n";
    }
    trainer.save(out_path, result.epochs_run);
    std::cout << "saved " << out_path << " after " << result.epochs_run
              << " epochs\n";
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& corpus_path) {
    glac::Checkpoint ck = glac::load_checkpoint(ckpt_path);
    auto records = glac::load_corpus(corpus_path);
    const double ppl =
        glac::evaluate_perplexity(*ck.model, ck.vocab, records);
    std::cout << "perplexity=" << fmt(ppl) << "\n";
    return 0;
}

int cmd_generate(const std::string& ckpt_path, const std::string& features_path,
                 bool greedy, bool k_set, double k, bool n_set, int n_samples,
                 bool seed_set, uint64_t seed) {
    glac::Checkpoint ck = glac::load_checkpoint(ckpt_path);
    auto records = glac::load_corpus(features_path, /*allow_unlabeled=*/true);
    glac::GenOptions opts = glac::make_gen_options(ck.config, ck.vocab);
    opts.greedy = greedy;
    if (k_set) opts.sampler.k = k;
    if (n_set) opts.sampler.n_samples = n_samples;
    const uint64_t gen_seed = seed_set ? seed : ck.config.seed;
    std::cout << glac::generate_stories(*ck.model, ck.vocab, records, opts,
                                        gen_seed);
    return 0;
}

int cmd_gradcheck(const std::string& dims) {
    if (dims != "tiny") {
        std::cerr << "error: only --dims tiny is defined\n";
        return 2;
    }
    glac::GradcheckReport report = glac::run_gradcheck();
    for (const auto& [name, err] : report.per_tensor) {
        std::cout << name << " max_rel_err=" << fmt(err) << "\n";
    }
    std::cout << "worst_rel_err=" << fmt(report.worst_rel_err) << " at "
              << report.worst_param << " tolerance=" << fmt(report.tolerance)
              << " seconds=" << fmt(report.seconds) << "\n";
    std::cout << (report.passed ? "PASS" : "FAIL") << "\n";
    return report.passed ? 0 : 1;
}

int cmd_ablations(const std::string& config_path, const std::string& out_dir) {
    glac::AppConfig base = glac::load_config(config_path);
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, cfg] : glac::ablation_matrix(base)) {
        const std::string path = out_dir + "/" + name + ".cfg";
        std::ofstream out(path);
        if (!out) {
            std::cerr << "error: cannot write " << path << "\n";
            return 2;
        }
        out << glac::serialize_config(cfg);
        std::cout << path << "\n";
    }
    return 0;
}

int cmd_synth(const std::string& out_path, uint64_t seed,
              const glac::SynthSpec& spec) {
    auto records = glac::synth_corpus(seed, spec);
    glac::save_corpus(records, out_path);
    std::cout << "wrote " << records.size() << " stories to " << out_path
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"glocal attention cascading network over precomputed image features"};
    app.require_subcommand(1);

    std::string corpus_path, config_path, out_path, ckpt_path, features_path;
    std::string dims = "tiny", out_dir;
    uint64_t seed = 0;
    double k = 0;
    int n_samples = 0;
    bool greedy = false;
    glac::SynthSpec spec;

    auto* train = app.add_subcommand("train", "train a model");
    train->add_option("--corpus", corpus_path)->required();
    train->add_option("--config", config_path)->required();
    auto* train_seed = train->add_option("--seed", seed);
    train->add_option("--out", out_path)->required();

    auto* eval = app.add_subcommand("eval", "perplexity of a checkpoint");
    eval->add_option("--ckpt", ckpt_path)->required();
    eval->add_option("--corpus", corpus_path)->required();

    auto* gen = app.add_subcommand("generate", "decode stories from features");
    gen->add_option("--ckpt", ckpt_path)->required();
    gen->add_option("--features", features_path)->required();
    gen->add_flag("--greedy", greedy);
    auto* gen_k = gen->add_option("--k", k);
    auto* gen_n = gen->add_option("--n-samples", n_samples);
    auto* gen_seed = gen->add_option("--seed", seed);

    auto* gc = app.add_subcommand("gradcheck", "finite-difference audit");
    gc->add_option("--dims", dims);

    auto* abl = app.add_subcommand("ablations", "emit the six run configs");
    abl->add_option("--config", config_path)->required();
    abl->add_option("--out-dir", out_dir)->required();

    auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
    synth->add_option("--out", out_path)->required();
    auto* synth_seed = synth->add_option("--seed", seed);
    synth->add_option("--n-stories", spec.n_stories);
    synth->add_option("--images", spec.images_per_story);
    synth->add_option("--feature-dim", spec.feature_dim);
    synth->add_option("--content-words", spec.content_words);
    synth->add_option("--noise", spec.noise);

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            return cmd_train(corpus_path, config_path, !train_seed->empty(),
                             seed, out_path);
        }
        if (eval->parsed()) return cmd_eval(ckpt_path, corpus_path);
        if (gen->parsed()) {
            return cmd_generate(ckpt_path, features_path, greedy,
                                !gen_k->empty(), k, !gen_n->empty(), n_samples,
                                !gen_seed->empty(), seed);
        }
        if (gc->parsed()) return cmd_gradcheck(dims);
        if (abl->parsed()) return cmd_ablations(config_path, out_dir);
        if (synth->parsed()) {
            return cmd_synth(out_path, synth_seed->empty() ? 1 : seed, spec);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
