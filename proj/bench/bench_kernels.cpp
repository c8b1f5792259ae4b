// Times the serial and OpenMP kernel variants on representative shapes and
// checks that both produce bit-identical results. Also times a full-model
// forward/backward pass in each execution mode.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "glac/config.hpp"
#include "glac/corpus.hpp"
#include "glac/kernels.hpp"
#include "glac/model.hpp"
#include "glac/rng.hpp"
#include "glac/tensor.hpp"

using namespace glac;

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::vector<double> random_vec(size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform01() * 2.0 - 1.0;
    return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        double t0 = now_seconds();
        fn();
        best = std::min(best, now_seconds() - t0);
    }
    return best;
}

void bench_gemm(size_t m, size_t k, size_t n) {
    Rng rng(42);
    auto a = random_vec(m * k, rng);
    auto b = random_vec(k * n, rng);
    std::vector<double> cs(m * n), cp(m * n);

    double ts = time_best_of(5, [&] {
        kernels::serial::gemm_nn(a.data(), b.data(), cs.data(), m, k, n, false);
    });
    double tp = time_best_of(5, [&] {
        kernels::omp::gemm_nn(a.data(), b.data(), cp.data(), m, k, n, false);
    });
    std::printf("gemm_nn %4zux%4zux%4zu  serial %8.3f ms  omp %8.3f ms  speedup %5.2fx  %s\n",
                m, k, n, ts * 1e3, tp * 1e3, ts / tp,
                bit_equal(cs, cp) ? "bit-equal" : "MISMATCH");
}

void bench_ew(size_t n) {
    Rng rng(43);
    auto a = random_vec(n, rng);
    auto b = random_vec(n, rng);
    std::vector<double> ys(n), yp(n);

    double ts = time_best_of(5, [&] {
        for (int i = 0; i < 20; ++i) kernels::serial::ew_tanh(a.data(), ys.data(), n);
    });
    double tp = time_best_of(5, [&] {
        for (int i = 0; i < 20; ++i) kernels::omp::ew_tanh(a.data(), yp.data(), n);
    });
    std::printf("ew_tanh x20   n=%7zu  serial %8.3f ms  omp %8.3f ms  speedup %5.2fx  %s\n",
                n, ts * 1e3, tp * 1e3, ts / tp,
                bit_equal(ys, yp) ? "bit-equal" : "MISMATCH");

    ts = time_best_of(5, [&] {
        for (int i = 0; i < 20; ++i) kernels::serial::ew_mul(a.data(), b.data(), ys.data(), n);
    });
    tp = time_best_of(5, [&] {
        for (int i = 0; i < 20; ++i) kernels::omp::ew_mul(a.data(), b.data(), yp.data(), n);
    });
    std::printf("ew_mul  x20   n=%7zu  serial %8.3f ms  omp %8.3f ms  speedup %5.2fx  %s\n",
                n, ts * 1e3, tp * 1e3, ts / tp,
                bit_equal(ys, yp) ? "bit-equal" : "MISMATCH");
}

// One teacher-forced story forward+backward per call, averaged over calls.
double model_pass_seconds(kernels::Exec mode, std::vector<double>* grads_out) {
    kernels::set_exec_mode(mode);

    AppConfig cfg;
    cfg.feature_dim = 256;
    cfg.enc_hidden = 128;
    cfg.glocal_dim = 192;
    cfg.embed_dim = 64;
    cfg.vocab_size = 60;
    cfg.dropout = 0.0;

    SynthSpec spec;
    spec.n_stories = 4;
    spec.feature_dim = cfg.feature_dim;
    auto records = synth_corpus(7, spec);
    Vocabulary vocab = Vocabulary::build(records, 1);
    AppConfig resolved = cfg.resolved(static_cast<int>(vocab.size()));

    GlacModel model(resolved, 7);
    std::vector<std::vector<std::vector<int>>> targets;
    for (const auto& r : records) targets.push_back(encode(vocab, r));

    Rng drop(1);
    auto one_pass = [&] {
        model.zero_grads();
        for (size_t i = 0; i < records.size(); ++i) {
            Tape tape;
            auto loss = model.story_loss(tape, records[i], targets[i], true, drop);
            tape.backward(loss.total);
        }
    };
    one_pass();  // warm-up and gradient snapshot
    if (grads_out) {
        grads_out->clear();
        for (auto& [name, t] : model.state_tensors()) {
            if (!t.has_grad()) continue;
            const auto& g = t.grad();
            grads_out->insert(grads_out->end(), g.begin(), g.end());
        }
    }
    return time_best_of(3, one_pass);
}

} // namespace

int main() {
    std::printf("== kernel benchmarks (serial vs OpenMP) ==\n");
    bench_gemm(64, 64, 64);
    bench_gemm(256, 256, 256);
    bench_gemm(512, 128, 512);
    bench_ew(1 << 16);
    bench_ew(1 << 20);

    std::printf("\n== full model forward/backward (4 stories) ==\n");
    std::vector<double> gs, gp;
    double ts = model_pass_seconds(kernels::Exec::serial, &gs);
    double tp = model_pass_seconds(kernels::Exec::parallel, &gp);
    std::printf("model pass    serial %8.3f ms  omp %8.3f ms  speedup %5.2fx  grads %s\n",
                ts * 1e3, tp * 1e3, ts / tp,
                bit_equal(gs, gp) ? "bit-equal" : "MISMATCH");
    return 0;
}
