#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <vector>

#include "doctest.h"
#include "glac/tensor.hpp"

namespace glac::testing {

inline Tensor rand_tensor(std::vector<size_t> shape, Rng& rng, double lo = -2.0,
                          double hi = 2.0) {
    return Tensor::uniform(std::move(shape), lo, hi, rng, true);
}

// Uniform magnitudes in [0.1, 2] with random signs, keeping relu inputs away
// from the kink at zero.
inline Tensor rand_tensor_off_zero(std::vector<size_t> shape, Rng& rng) {
    Tensor t = Tensor::uniform(std::move(shape), 0.1, 2.0, rng, true);
    for (auto& v : t.data()) {
        if (rng.uniform01() < 0.5) v = -v;
    }
    return t;
}

inline bool bit_equal(const std::vector<double>& a,
                      const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

inline bool bit_equal(const Tensor& a, const Tensor& b) {
    return a.shape() == b.shape() && bit_equal(a.data(), b.data());
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::fabs(a[i] - b[i]));
    }
    return m;
}

struct FdSpec {
    double h = 1e-6;
    double tol = 1e-5;
    double floor = 1e-8;
};

// Central-difference check of d(build())/d(input element) against the tape
// gradient. build must be a pure function of the captured input tensors so
// that in-place perturbation of one element re-evaluates the same graph.
inline void check_gradients(const std::function<Tensor(Tape&)>& build,
                            std::vector<Tensor> inputs, FdSpec spec = {}) {
    for (auto& t : inputs) {
        t.set_requires_grad(true);
        t.zero_grad();
    }
    Tape tape;
    Tensor loss = build(tape);
    REQUIRE(loss.numel() == 1);
    tape.backward(loss);

    double worst = 0;
    for (auto& t : inputs) {
        auto& x = t.data();
        const auto& g = t.grad();
        for (size_t i = 0; i < x.size(); ++i) {
            const double keep = x[i];
            x[i] = keep + spec.h;
            Tape tp;
            const double fp = build(tp).value();
            x[i] = keep - spec.h;
            Tape tm;
            const double fm = build(tm).value();
            x[i] = keep;
            const double fd = (fp - fm) / (2.0 * spec.h);
            const double rel =
                std::fabs(g[i] - fd) /
                std::max({std::fabs(g[i]), std::fabs(fd), spec.floor});
            worst = std::max(worst, rel);
        }
    }
    CHECK(worst < spec.tol);
}

// Loss functional with O(1) gradients on every output element: a dot product
// with fixed weights drawn once by the caller.
inline Tensor weighted_sum(Tape& tape, const Tensor& y, const Tensor& w) {
    return sum(tape, mul(tape, y, w));
}

inline Tensor fixed_weights(const std::vector<size_t>& shape, Rng& rng) {
    return Tensor::uniform(shape, 0.5, 1.5, rng, false);
}

} // namespace glac::testing
