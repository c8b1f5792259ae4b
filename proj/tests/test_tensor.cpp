#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "checks.hpp"
#include "glac/error.hpp"
#include "glac/tensor.hpp"

using namespace glac;
using namespace glac::testing;

TEST_CASE("matmul identity and worked example") {
    Tape tape;
    Tensor eye = Tensor::from({2, 2}, {1, 0, 0, 1});
    Tensor v = Tensor::from({2, 1}, {3, 7});
    Tensor out = matmul(tape, eye, v);
    CHECK(out.at(0, 0) == 3.0);
    CHECK(out.at(1, 0) == 7.0);

    Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
    Tensor ones = Tensor::from({2, 1}, {1, 1});
    Tensor r = matmul(tape, a, ones);
    CHECK(r.at(0, 0) == 3.0);
    CHECK(r.at(1, 0) == 7.0);
}

TEST_CASE("matmul matches the triple-loop oracle") {
    Rng rng(11);
    Tensor a = rand_tensor({4, 5}, rng);
    Tensor b = rand_tensor({5, 3}, rng);
    Tape tape;
    Tensor c = matmul(tape, a, b);
    for (size_t i = 0; i < 4; ++i) {
        for (size_t j = 0; j < 3; ++j) {
            double want = 0;
            for (size_t k = 0; k < 5; ++k) want += a.at(i, k) * b.at(k, j);
            CHECK(std::fabs(c.at(i, j) - want) < 1e-12);
        }
    }
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
    Tape tape;
    Tensor a = Tensor::zeros({2, 3});
    Tensor b = Tensor::zeros({4, 2});
    CHECK_THROWS_AS(matmul(tape, a, b), ShapeError);
}

TEST_CASE("matvec worked example") {
    Tape tape;
    Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
    Tensor x = Tensor::from({2}, {5, 6});
    Tensor y = matvec(tape, a, x);
    CHECK(y.at(0) == 17.0);
    CHECK(y.at(1) == 39.0);
    CHECK_THROWS_AS(matvec(tape, a, Tensor::zeros({3})), ShapeError);
}

TEST_CASE("linear matches the loop oracle") {
    Rng rng(12);
    Tensor x = rand_tensor({2, 3}, rng);
    Tensor w = rand_tensor({4, 3}, rng);
    Tensor b = rand_tensor({4}, rng);
    Tape tape;
    Tensor y = linear(tape, x, w, b);
    REQUIRE(y.shape() == std::vector<size_t>{2, 4});
    for (size_t i = 0; i < 2; ++i) {
        for (size_t o = 0; o < 4; ++o) {
            double want = b.at(o);
            for (size_t j = 0; j < 3; ++j) want += x.at(i, j) * w.at(o, j);
            CHECK(std::fabs(y.at(i, o) - want) < 1e-12);
        }
    }
}

TEST_CASE("elementwise forward values") {
    Tape tape;
    Tensor x = Tensor::from({4}, {0.0, -3.2, 3.2, 0.7});
    CHECK(sigmoid(tape, x).at(0) == 0.5);
    Tensor r = relu(tape, x);
    CHECK(r.at(1) == 0.0);
    CHECK(r.at(2) == 3.2);
    CHECK(tanh(tape, x).at(0) == 0.0);

    Tensor a = Tensor::from({2}, {1, -2});
    Tensor b = Tensor::from({2}, {10, 0.5});
    Tensor s = add(tape, a, b);
    CHECK(s.at(0) == 11.0);
    CHECK(s.at(1) == -1.5);
    Tensor m = mul(tape, a, b);
    CHECK(m.at(0) == 10.0);
    CHECK(m.at(1) == -1.0);
    CHECK(scale(tape, a, 2.0).at(1) == -4.0);
    CHECK(sum(tape, Tensor::from({3}, {1, 2, 3})).value() == 6.0);

    CHECK_THROWS_AS(add(tape, a, Tensor::zeros({3})), ShapeError);
    CHECK_THROWS_AS(mul(tape, a, Tensor::zeros({3})), ShapeError);
}

TEST_CASE("concat joins along the requested axis") {
    Tape tape;
    Tensor a = Tensor::from({2}, {1, 2});
    Tensor b = Tensor::from({1}, {3});
    Tensor c = concat(tape, {a, b}, 0);
    CHECK(c.data() == std::vector<double>{1, 2, 3});

    Tensor one = concat(tape, {a}, 0);
    CHECK(one.data() == a.data());

    Tensor m1 = Tensor::from({2, 2}, {1, 2, 3, 4});
    Tensor m2 = Tensor::from({2, 1}, {5, 6});
    Tensor wide = concat(tape, {m1, m2}, 1);
    REQUIRE(wide.shape() == std::vector<size_t>{2, 3});
    CHECK(wide.data() == std::vector<double>{1, 2, 5, 3, 4, 6});

    Tensor tall = concat(tape, {m1, Tensor::from({1, 2}, {7, 8})}, 0);
    REQUIRE(tall.shape() == std::vector<size_t>{3, 2});
    CHECK(tall.data() == std::vector<double>{1, 2, 3, 4, 7, 8});

    CHECK_THROWS_AS(concat(tape, {}, 0), ContractError);
    CHECK_THROWS_AS(concat(tape, {m1, Tensor::zeros({3, 3})}, 1), ShapeError);
    CHECK_THROWS_AS(concat(tape, {a, m1}, 0), ShapeError);
}

TEST_CASE("slice, row, stack_rows, lookup") {
    Tape tape;
    Tensor v = Tensor::from({4}, {10, 20, 30, 40});
    Tensor s = slice(tape, v, 1, 2);
    CHECK(s.data() == std::vector<double>{20, 30});
    CHECK_THROWS_AS(slice(tape, v, 3, 2), IndexError);

    Tensor m = Tensor::from({2, 2}, {1, 2, 3, 4});
    CHECK(row(tape, m, 1).data() == std::vector<double>{3, 4});
    CHECK_THROWS_AS(row(tape, m, 2), IndexError);

    Tensor stacked = stack_rows(tape, {row(tape, m, 1), row(tape, m, 0)});
    CHECK(stacked.data() == std::vector<double>{3, 4, 1, 2});
    CHECK_THROWS_AS(stack_rows(tape, {v, row(tape, m, 0)}), ShapeError);
    CHECK_THROWS_AS(stack_rows(tape, {}), ContractError);

    CHECK(lookup(tape, m, 1).data() == std::vector<double>{3, 4});
    CHECK_THROWS_AS(lookup(tape, m, 2), IndexError);
    CHECK_THROWS_AS(lookup(tape, m, -1), IndexError);
}

TEST_CASE("backward of sum(x*x) doubles the input") {
    Tensor x = Tensor::from({3}, {1, 2, 3}, true);
    Tape tape;
    Tensor loss = sum(tape, mul(tape, x, x));
    tape.backward(loss);
    CHECK(x.grad() == std::vector<double>{2, 4, 6});
}

TEST_CASE("gradients accumulate over fan-out and across tapes") {
    Tensor x = Tensor::from({2}, {1, 5}, true);
    Tape tape;
    Tensor loss = sum(tape, add(tape, x, x));
    tape.backward(loss);
    CHECK(x.grad() == std::vector<double>{2, 2});
    // a second story on its own tape adds onto the shared leaves
    Tape second;
    second.backward(sum(second, add(second, x, x)));
    CHECK(x.grad() == std::vector<double>{4, 4});
}

TEST_CASE("unused inputs keep zero gradients") {
    Tensor x = Tensor::from({2}, {1, 2}, true);
    Tensor y = Tensor::from({2}, {3, 4}, true);
    Tape tape;
    Tensor loss = sum(tape, x);
    tape.backward(loss);
    CHECK(y.grad() == std::vector<double>{0, 0});
}

TEST_CASE("requires_grad propagates as the OR over inputs") {
    Tape tape;
    Tensor a = Tensor::from({2}, {1, 2}, true);
    Tensor b = Tensor::from({2}, {3, 4}, false);
    CHECK(add(tape, a, b).requires_grad());
    CHECK_FALSE(add(tape, b, b).requires_grad());
}

TEST_CASE("backward seed scales gradients and rejects non-scalars") {
    Tensor x = Tensor::from({2}, {1, 2}, true);
    Tape tape;
    Tensor s = sum(tape, x);
    tape.backward(s, 0.5);
    CHECK(x.grad() == std::vector<double>{0.5, 0.5});

    Tape t2;
    Tensor v = add(t2, x, x);
    CHECK_THROWS_AS(t2.backward(v), ContractError);
}

TEST_CASE("dropout aliasing, parameter range, and statistics") {
    Rng rng(21);
    Tape tape;
    Tensor x = Tensor::full({8}, 1.0);
    CHECK(dropout(tape, x, 0.0, true, rng).same_storage(x));
    CHECK(dropout(tape, x, 0.5, false, rng).same_storage(x));
    CHECK_THROWS_AS(dropout(tape, x, 1.0, true, rng), ParamError);
    CHECK_THROWS_AS(dropout(tape, x, -0.1, true, rng), ParamError);

    const size_t n = 100000;
    Tensor big = Tensor::full({n}, 1.0);
    Tensor dropped = dropout(tape, big, 0.5, true, rng);
    double mean = 0;
    size_t zeros = 0;
    for (double v : dropped.data()) {
        mean += v;
        if (v == 0.0) ++zeros;
        else CHECK(v == 2.0); // survivors scaled by 1/(1-rate)
    }
    mean /= static_cast<double>(n);
    CHECK(mean > 0.98);
    CHECK(mean < 1.02);
    CHECK(zeros > 0);
}

TEST_CASE("dropout backward reuses the forward mask") {
    Rng rng(22);
    Tensor x = Tensor::from({6}, {1, 2, 3, 4, 5, 6}, true);
    Tape tape;
    Tensor y = dropout(tape, x, 0.5, true, rng);
    Tensor loss = sum(tape, y);
    tape.backward(loss);
    for (size_t i = 0; i < 6; ++i) {
        const double mask = y.at(i) / x.at(i);
        CHECK(x.grad()[i] == mask);
    }
}

TEST_CASE("dropout masks are deterministic per rng state") {
    Tape tape;
    Tensor x = Tensor::full({64}, 1.0);
    Rng r1(7), r2(7);
    Tensor a = dropout(tape, x, 0.3, true, r1);
    Tensor b = dropout(tape, x, 0.3, true, r2);
    CHECK(bit_equal(a, b));
}

TEST_CASE("batch_norm training normalizes each column") {
    Rng rng(31);
    Tensor x = rand_tensor({8, 3}, rng);
    x.set_requires_grad(false);
    Tensor gamma = Tensor::from({3}, {1, 1, 1});
    Tensor beta = Tensor::zeros({3});
    Tensor rm = Tensor::zeros({3});
    Tensor rv = Tensor::full({3}, 1.0);
    Tape tape;
    Tensor y = batch_norm(tape, x, gamma, beta, rm, rv, true);
    for (size_t j = 0; j < 3; ++j) {
        double m = 0, v = 0;
        for (size_t i = 0; i < 8; ++i) m += y.at(i, j);
        m /= 8;
        for (size_t i = 0; i < 8; ++i) v += (y.at(i, j) - m) * (y.at(i, j) - m);
        v /= 8;
        CHECK(std::fabs(m) < 1e-9);
        // biased variance of the output is 1/(1 + eps/var) under gamma=1
        CHECK(std::fabs(v - 1.0) < 1e-4);
    }
}

TEST_CASE("batch_norm applies gamma and beta") {
    Rng rng(32);
    Tensor x = rand_tensor({16, 2}, rng);
    x.set_requires_grad(false);
    Tensor gamma = Tensor::from({2}, {2.0, 0.5});
    Tensor beta = Tensor::from({2}, {-1.0, 3.0});
    Tensor rm = Tensor::zeros({2});
    Tensor rv = Tensor::full({2}, 1.0);
    Tape tape;
    Tensor y = batch_norm(tape, x, gamma, beta, rm, rv, true);
    for (size_t j = 0; j < 2; ++j) {
        double m = 0;
        for (size_t i = 0; i < 16; ++i) m += y.at(i, j);
        m /= 16;
        CHECK(std::fabs(m - beta.at(j)) < 1e-9);
    }
}

TEST_CASE("batch_norm updates running statistics with momentum 0.1") {
    Tensor x = Tensor::from({4, 1}, {1, 2, 3, 6});
    Tensor gamma = Tensor::from({1}, {1.0});
    Tensor beta = Tensor::zeros({1});
    Tensor rm = Tensor::from({1}, {0.5});
    Tensor rv = Tensor::from({1}, {2.0});
    Tape tape;
    batch_norm(tape, x, gamma, beta, rm, rv, true);
    const double mean = 3.0;
    const double biased = ((1 - 3.) * (1 - 3.) + (2 - 3.) * (2 - 3.) +
                           (3 - 3.) * (3 - 3.) + (6 - 3.) * (6 - 3.)) /
                          4.0;
    const double unbiased = biased * 4.0 / 3.0;
    CHECK(std::fabs(rm.at(0) - (0.9 * 0.5 + 0.1 * mean)) < 1e-12);
    CHECK(std::fabs(rv.at(0) - (0.9 * 2.0 + 0.1 * unbiased)) < 1e-12);
}

TEST_CASE("batch_norm inference uses the running buffers") {
    Tensor x = Tensor::from({2, 2}, {1, 2, 3, 4});
    Tensor gamma = Tensor::from({2}, {2, 1});
    Tensor beta = Tensor::from({2}, {0.5, -0.5});
    Tensor rm = Tensor::from({2}, {1.0, 3.0});
    Tensor rv = Tensor::from({2}, {4.0, 0.25});
    Tape tape;
    Tensor y = batch_norm(tape, x, gamma, beta, rm, rv, false);
    for (size_t i = 0; i < 2; ++i) {
        for (size_t j = 0; j < 2; ++j) {
            const double want = gamma.at(j) * (x.at(i, j) - rm.at(j)) /
                                    std::sqrt(rv.at(j) + 1e-5) +
                                beta.at(j);
            CHECK(std::fabs(y.at(i, j) - want) < 1e-12);
        }
    }
    // inference must not move the running buffers
    CHECK(rm.at(0) == 1.0);
    CHECK(rv.at(1) == 0.25);
}

TEST_CASE("batch_norm rejects single-row training batches") {
    Tensor x = Tensor::zeros({1, 3});
    Tensor gamma = Tensor::full({3}, 1.0);
    Tensor beta = Tensor::zeros({3});
    Tensor rm = Tensor::zeros({3});
    Tensor rv = Tensor::full({3}, 1.0);
    Tape tape;
    CHECK_THROWS_AS(batch_norm(tape, x, gamma, beta, rm, rv, true),
                    ContractError);
    CHECK_NOTHROW(batch_norm(tape, x, gamma, beta, rm, rv, false));
}

TEST_CASE("cross entropy of uniform logits is log V") {
    Tape tape;
    Tensor logits = Tensor::full({7}, 1.3);
    Tensor loss = softmax_cross_entropy(tape, logits, {4});
    CHECK(std::fabs(loss.value() - std::log(7.0)) < 1e-12);
}

TEST_CASE("cross entropy vanishes when the target dominates") {
    Tape tape;
    std::vector<double> v(5, 0.0);
    v[2] = 50.0;
    Tensor loss = softmax_cross_entropy(tape, Tensor::from({5}, v), {2});
    CHECK(loss.value() < 1e-9);
    CHECK(loss.value() >= 0.0);
}

TEST_CASE("batched cross entropy is the mean over rows") {
    Rng rng(41);
    Tensor logits = rand_tensor({3, 5}, rng);
    logits.set_requires_grad(false);
    std::vector<int> targets = {1, 4, 0};
    Tape tape;
    const double batched = softmax_cross_entropy(tape, logits, targets).value();
    double mean = 0;
    for (size_t i = 0; i < 3; ++i) {
        Tensor r = row(tape, logits, i);
        mean += softmax_cross_entropy(tape, r, {targets[i]}).value();
    }
    mean /= 3.0;
    CHECK(std::fabs(batched - mean) < 1e-12);
}

TEST_CASE("cross entropy rejects bad targets and shapes") {
    Tape tape;
    Tensor logits = Tensor::zeros({2, 4});
    CHECK_THROWS_AS(softmax_cross_entropy(tape, logits, {0, 4}), IndexError);
    CHECK_THROWS_AS(softmax_cross_entropy(tape, logits, {0}), ShapeError);
    CHECK_THROWS_AS(softmax_cross_entropy(tape, Tensor::zeros({2, 2, 2}), {0}),
                    ShapeError);
}

TEST_CASE("cross entropy is stable for large logits") {
    Tape tape;
    Tensor logits = Tensor::from({3}, {1000.0, 999.0, 998.0});
    Tensor loss = softmax_cross_entropy(tape, logits, {0});
    CHECK(std::isfinite(loss.value()));
    CHECK(loss.value() > 0.0);
    CHECK(loss.value() < 1.0);
}

// Finite-difference oracle for every op: h=1e-6, relative error below 1e-5
// with denominator max(|analytic|, |fd|, 1e-8), inputs in [-2, 2].
TEST_CASE("finite differences: matmul, matvec, linear") {
    Rng rng(51);
    {
        Tensor a = rand_tensor({3, 4}, rng), b = rand_tensor({4, 2}, rng);
        Tensor w = fixed_weights({3, 2}, rng);
        check_gradients(
            [&](Tape& t) { return weighted_sum(t, matmul(t, a, b), w); },
            {a, b});
    }
    {
        Tensor a = rand_tensor({3, 4}, rng), x = rand_tensor({4}, rng);
        Tensor w = fixed_weights({3}, rng);
        check_gradients(
            [&](Tape& t) { return weighted_sum(t, matvec(t, a, x), w); },
            {a, x});
    }
    {
        Tensor x = rand_tensor({2, 3}, rng), wgt = rand_tensor({4, 3}, rng);
        Tensor b = rand_tensor({4}, rng);
        Tensor w = fixed_weights({2, 4}, rng);
        check_gradients(
            [&](Tape& t) { return weighted_sum(t, linear(t, x, wgt, b), w); },
            {x, wgt, b});
    }
}

TEST_CASE("finite differences: elementwise ops") {
    Rng rng(52);
    Tensor w = fixed_weights({6}, rng);
    {
        Tensor x = rand_tensor({6}, rng);
        check_gradients(
            [&](Tape& t) { return weighted_sum(t, sigmoid(t, x), w); }, {x});
    }
    {
        Tensor x = rand_tensor({6}, rng);
        check_gradients([&](Tape& t) { return weighted_sum(t, tanh(t, x), w); },
                        {x});
    }
    {
        Tensor x = rand_tensor_off_zero({6}, rng);
        check_gradients([&](Tape& t) { return weighted_sum(t, relu(t, x), w); },
                        {x});
    }
    {
        Tensor a = rand_tensor({6}, rng), b = rand_tensor({6}, rng);
        check_gradients(
            [&](Tape& t) { return weighted_sum(t, add(t, a, b), w); }, {a, b});
        check_gradients(
            [&](Tape& t) { return weighted_sum(t, mul(t, a, b), w); }, {a, b});
        check_gradients(
            [&](Tape& t) { return weighted_sum(t, scale(t, a, -1.7), w); },
            {a});
        check_gradients([&](Tape& t) { return sum(t, a); }, {a});
    }
}

TEST_CASE("finite differences: shape ops") {
    Rng rng(53);
    {
        Tensor a = rand_tensor({3}, rng), b = rand_tensor({2}, rng);
        Tensor w = fixed_weights({5}, rng);
        check_gradients(
            [&](Tape& t) { return weighted_sum(t, concat(t, {a, b}, 0), w); },
            {a, b});
    }
    {
        Tensor a = rand_tensor({2, 2}, rng), b = rand_tensor({2, 3}, rng);
        Tensor w = fixed_weights({2, 5}, rng);
        check_gradients(
            [&](Tape& t) { return weighted_sum(t, concat(t, {a, b}, 1), w); },
            {a, b});
    }
    {
        Tensor x = rand_tensor({6}, rng);
        Tensor w = fixed_weights({3}, rng);
        check_gradients(
            [&](Tape& t) { return weighted_sum(t, slice(t, x, 2, 3), w); },
            {x});
    }
    {
        Tensor x = rand_tensor({3, 4}, rng);
        Tensor w = fixed_weights({4}, rng);
        check_gradients(
            [&](Tape& t) { return weighted_sum(t, row(t, x, 1), w); }, {x});
        check_gradients(
            [&](Tape& t) { return weighted_sum(t, lookup(t, x, 2), w); }, {x});
    }
    {
        Tensor a = rand_tensor({4}, rng), b = rand_tensor({4}, rng);
        Tensor w = fixed_weights({2, 4}, rng);
        check_gradients(
            [&](Tape& t) {
                return weighted_sum(t, stack_rows(t, {a, b}), w);
            },
            {a, b});
    }
}

TEST_CASE("finite differences: batch_norm") {
    Rng rng(54);
    Tensor x = rand_tensor({5, 3}, rng);
    Tensor gamma = Tensor::uniform({3}, 0.5, 1.5, rng, true);
    Tensor beta = rand_tensor({3}, rng);
    Tensor w = fixed_weights({5, 3}, rng);
    {
        Tensor rm = Tensor::zeros({3});
        Tensor rv = Tensor::full({3}, 1.0);
        check_gradients(
            [&](Tape& t) {
                return weighted_sum(
                    t, batch_norm(t, x, gamma, beta, rm, rv, true), w);
            },
            {x, gamma, beta});
    }
    {
        Tensor rm = rand_tensor({3}, rng);
        rm.set_requires_grad(false);
        Tensor rv = Tensor::uniform({3}, 0.5, 2.0, rng);
        check_gradients(
            [&](Tape& t) {
                return weighted_sum(
                    t, batch_norm(t, x, gamma, beta, rm, rv, false), w);
            },
            {x, gamma, beta});
    }
}

TEST_CASE("finite differences: softmax cross entropy") {
    Rng rng(55);
    Tensor logits = rand_tensor({3, 5}, rng);
    std::vector<int> targets = {1, 4, 0};
    check_gradients(
        [&](Tape& t) { return softmax_cross_entropy(t, logits, targets); },
        {logits});

    Tensor single = rand_tensor({6}, rng);
    check_gradients(
        [&](Tape& t) { return softmax_cross_entropy(t, single, {3}); },
        {single});
}

TEST_CASE("finite differences: composed stack") {
    Rng rng(56);
    Tensor x = rand_tensor({2, 4}, rng);
    Tensor w1 = rand_tensor({5, 4}, rng), b1 = rand_tensor({5}, rng);
    Tensor w2 = rand_tensor({3, 5}, rng), b2 = rand_tensor({3}, rng);
    std::vector<int> targets = {2, 0};
    check_gradients(
        [&](Tape& t) {
            Tensor h = tanh(t, linear(t, x, w1, b1));
            Tensor logits = linear(t, h, w2, b2);
            return softmax_cross_entropy(t, logits, targets);
        },
        {x, w1, b1, w2, b2});
}

TEST_CASE("forward passes are bit-deterministic") {
    Rng rng(57);
    Tensor a = rand_tensor({6, 6}, rng), b = rand_tensor({6, 6}, rng);
    Tape t1, t2;
    CHECK(bit_equal(matmul(t1, a, b), matmul(t2, a, b)));
    CHECK(bit_equal(tanh(t1, a), tanh(t2, a)));
}
