#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "glac/rng.hpp"

namespace glac {

// Dense row-major 64-bit float tensor with an optional gradient buffer.
// Copying a Tensor aliases the underlying storage (shared ownership), which
// is what lets tape closures hold onto operands cheaply. A tensor and the
// tape it was recorded on belong to one thread; distinct tapes may run
// concurrently, and grad-disabled tensors (trained parameters at inference
// time) may be shared read-only.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<size_t> shape, bool requires_grad = false);
    static Tensor full(std::vector<size_t> shape, double v,
                       bool requires_grad = false);
    static Tensor from(std::vector<size_t> shape, std::vector<double> data,
                       bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);
    static Tensor uniform(std::vector<size_t> shape, double lo, double hi,
                          Rng& rng, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const std::vector<size_t>& shape() const;
    size_t rank() const { return shape().size(); }
    size_t dim(size_t i) const { return shape().at(i); }
    size_t numel() const;

    std::vector<double>& data();
    const std::vector<double>& data() const;
    // Gradient buffer, allocated to zeros on first access.
    std::vector<double>& grad();
    bool has_grad() const;
    void zero_grad();

    bool requires_grad() const;
    void set_requires_grad(bool v);

    // Value of a one-element tensor.
    double value() const;
    double at(size_t i) const { return data().at(i); }
    double at(size_t r, size_t c) const;

    bool all_finite() const;
    bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

    std::string shape_str() const;

private:
    struct Impl {
        std::vector<size_t> shape;
        std::vector<double> data;
        std::vector<double> grad;
        bool requires_grad = false;
    };
    std::shared_ptr<Impl> impl_;
};

// Reverse-mode gradient tape, rebuilt per forward pass (define-by-run).
// Operations append one closure each; backward() replays them once in
// reverse, accumulating into the grad buffers of every grad-enabled input.
class Tape {
public:
    void record(std::function<void()> fn) { nodes_.push_back(std::move(fn)); }
    size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

    // Seeds d(loss)/d(loss) = seed and propagates. Gradients add across
    // fan-out and across repeated backward calls; callers zero parameter
    // grads when they mean to start fresh.
    void backward(const Tensor& loss, double seed = 1.0);

private:
    std::vector<std::function<void()>> nodes_;
};

// --- operations ----------------------------------------------------------
//
// Each op computes eagerly and, when any operand requires grad, records its
// backward closure on the tape. Output requires_grad is the OR over inputs.

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);   // [m,k]·[k,n]
Tensor matvec(Tape& tape, const Tensor& a, const Tensor& x);   // [m,n]·[n]
// x[B,in] · w[out,in]ᵀ + b[out], the fully connected layer.
Tensor linear(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b);

Tensor sigmoid(Tape& tape, const Tensor& x);
Tensor tanh(Tape& tape, const Tensor& x);
Tensor relu(Tape& tape, const Tensor& x);
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);      // same shape
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);      // same shape
Tensor scale(Tape& tape, const Tensor& x, double c);
Tensor sum(Tape& tape, const Tensor& x);                       // -> scalar

Tensor concat(Tape& tape, const std::vector<Tensor>& parts, size_t axis);
Tensor slice(Tape& tape, const Tensor& x, size_t begin, size_t len); // 1-D
Tensor row(Tape& tape, const Tensor& x, size_t r);                   // 2-D -> 1-D
Tensor stack_rows(Tape& tape, const std::vector<Tensor>& rows);      // n×[d] -> [n,d]
Tensor lookup(Tape& tape, const Tensor& table, int id);              // [V,e] -> [e]

// Inverted dropout: training zeroes each element with probability `rate`
// and scales survivors by 1/(1−rate); inference returns x unchanged.
Tensor dropout(Tape& tape, const Tensor& x, double rate, bool training,
               Rng& rng);

// Per-column batch normalization over the rows of x[B,d]. Training mode
// normalizes by batch statistics and updates the running buffers in place
// (momentum towards the current batch, unbiased variance in the running
// estimate); inference mode normalizes by the running buffers.
Tensor batch_norm(Tape& tape, const Tensor& x, const Tensor& gamma,
                  const Tensor& beta, Tensor& running_mean,
                  Tensor& running_var, bool training, double eps = 1e-5,
                  double momentum = 0.1);

// Mean over rows of −log softmax(logits)[target], max-stabilized.
// logits is [B,V] with B targets, or [V] with one target.
Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits,
                             const std::vector<int>& targets);

} // namespace glac
