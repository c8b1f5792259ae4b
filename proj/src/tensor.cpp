#include "glac/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "glac/error.hpp"
#include "glac/kernels.hpp"

namespace glac {

namespace {

size_t shape_numel(const std::vector<size_t>& shape) {
    size_t n = 1;
    for (size_t d : shape) n *= d;
    return n;
}

std::string shape_to_str(const std::vector<size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

void require_defined(const Tensor& t, const char* what) {
    if (!t.defined()) throw ContractError(std::string(what) + ": undefined tensor");
}

void require_rank(const Tensor& t, size_t rank, const char* what) {
    require_defined(t, what);
    if (t.rank() != rank) {
        throw ShapeError(std::string(what) + ": expected rank " +
                         std::to_string(rank) + ", got " + t.shape_str());
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    require_defined(a, what);
    require_defined(b, what);
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(what) + ": shape mismatch " +
                         a.shape_str() + " vs " + b.shape_str());
    }
}

} // namespace

// ----------------------------------------------------------------- Tensor

Tensor Tensor::zeros(std::vector<size_t> shape, bool requires_grad) {
    Tensor t;
    t.impl_ = std::make_shared<Impl>();
    t.impl_->shape = std::move(shape);
    for (size_t d : t.impl_->shape) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive");
    }
    t.impl_->data.assign(shape_numel(t.impl_->shape), 0.0);
    t.impl_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::full(std::vector<size_t> shape, double v, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    std::fill(t.data().begin(), t.data().end(), v);
    return t;
}

Tensor Tensor::from(std::vector<size_t> shape, std::vector<double> data,
                    bool requires_grad) {
    Tensor t;
    t.impl_ = std::make_shared<Impl>();
    t.impl_->shape = std::move(shape);
    for (size_t d : t.impl_->shape) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive");
    }
    if (shape_numel(t.impl_->shape) != data.size()) {
        throw ShapeError("data length " + std::to_string(data.size()) +
                         " does not match shape " +
                         shape_to_str(t.impl_->shape));
    }
    t.impl_->data = std::move(data);
    t.impl_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
    return from({1}, {v}, requires_grad);
}

Tensor Tensor::uniform(std::vector<size_t> shape, double lo, double hi,
                       Rng& rng, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

const std::vector<size_t>& Tensor::shape() const {
    if (!impl_) throw ContractError("shape() on undefined tensor");
    return impl_->shape;
}

size_t Tensor::numel() const { return shape_numel(shape()); }

std::vector<double>& Tensor::data() {
    if (!impl_) throw ContractError("data() on undefined tensor");
    return impl_->data;
}

const std::vector<double>& Tensor::data() const {
    if (!impl_) throw ContractError("data() on undefined tensor");
    return impl_->data;
}

std::vector<double>& Tensor::grad() {
    if (!impl_) throw ContractError("grad() on undefined tensor");
    if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
    return impl_->grad;
}

bool Tensor::has_grad() const { return impl_ && !impl_->grad.empty(); }

void Tensor::zero_grad() {
    if (impl_ && !impl_->grad.empty()) {
        std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
    }
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

void Tensor::set_requires_grad(bool v) {
    if (!impl_) throw ContractError("set_requires_grad() on undefined tensor");
    impl_->requires_grad = v;
}

double Tensor::value() const {
    if (numel() != 1) {
        throw ContractError("value() requires a one-element tensor, got " +
                            shape_str());
    }
    return data()[0];
}

double Tensor::at(size_t r, size_t c) const {
    if (rank() != 2) throw ShapeError("at(r,c) requires rank 2");
    if (r >= dim(0) || c >= dim(1)) throw IndexError("at(r,c) out of range");
    return data()[r * dim(1) + c];
}

bool Tensor::all_finite() const {
    for (double v : data()) {
        if (!std::isfinite(v)) return false;
    }
    if (has_grad()) {
        for (double v : impl_->grad) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

std::string Tensor::shape_str() const { return shape_to_str(shape()); }

// ------------------------------------------------------------------- Tape

void Tape::backward(const Tensor& loss, double seed) {
    if (!loss.defined() || loss.numel() != 1) {
        throw ContractError("backward requires a scalar loss");
    }
    Tensor l = loss;
    if (l.requires_grad()) l.grad()[0] += seed;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        (*it)();
    }
}

// ------------------------------------------------------------------- ops

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul lhs");
    require_rank(b, 2, "matmul rhs");
    const size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) {
        throw ShapeError("matmul: inner dimensions disagree, " + a.shape_str() +
                         " x " + b.shape_str());
    }
    Tensor out = Tensor::zeros({m, n}, a.requires_grad() || b.requires_grad());
    kernels::gemm_nn(a.data().data(), b.data().data(), out.data().data(),
                     m, k, n, false);
    if (out.requires_grad()) {
        Tensor ac = a, bc = b, oc = out;
        tape.record([ac, bc, oc, m, k, n]() mutable {
            const double* g = oc.grad().data();
            if (ac.requires_grad()) {
                kernels::gemm_nt(g, bc.data().data(), ac.grad().data(),
                                 m, n, k, true);
            }
            if (bc.requires_grad()) {
                kernels::gemm_tn(ac.data().data(), g, bc.grad().data(),
                                 k, m, n, true);
            }
        });
    }
    return out;
}

Tensor matvec(Tape& tape, const Tensor& a, const Tensor& x) {
    require_rank(a, 2, "matvec lhs");
    require_rank(x, 1, "matvec rhs");
    const size_t m = a.dim(0), n = a.dim(1);
    if (x.dim(0) != n) {
        throw ShapeError("matvec: dimensions disagree, " + a.shape_str() +
                         " x " + x.shape_str());
    }
    Tensor out = Tensor::zeros({m}, a.requires_grad() || x.requires_grad());
    kernels::matvec(a.data().data(), x.data().data(), out.data().data(),
                    m, n, false);
    if (out.requires_grad()) {
        Tensor ac = a, xc = x, oc = out;
        tape.record([ac, xc, oc, m, n]() mutable {
            const double* g = oc.grad().data();
            if (ac.requires_grad()) {
                kernels::ger_acc(ac.grad().data(), g, xc.data().data(), m, n);
            }
            if (xc.requires_grad()) {
                kernels::matvec_t(ac.data().data(), g, xc.grad().data(),
                                  m, n, true);
            }
        });
    }
    return out;
}

Tensor linear(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b) {
    require_rank(x, 2, "linear input");
    require_rank(w, 2, "linear weight");
    require_rank(b, 1, "linear bias");
    const size_t rows = x.dim(0), in = x.dim(1), out_dim = w.dim(0);
    if (w.dim(1) != in || b.dim(0) != out_dim) {
        throw ShapeError("linear: incompatible shapes x=" + x.shape_str() +
                         " w=" + w.shape_str() + " b=" + b.shape_str());
    }
    Tensor out = Tensor::zeros(
        {rows, out_dim},
        x.requires_grad() || w.requires_grad() || b.requires_grad());
    kernels::gemm_nt(x.data().data(), w.data().data(), out.data().data(),
                     rows, in, out_dim, false);
    kernels::add_rowvec(out.data().data(), b.data().data(), out.data().data(),
                        rows, out_dim);
    if (out.requires_grad()) {
        Tensor xc = x, wc = w, bc = b, oc = out;
        tape.record([xc, wc, bc, oc, rows, in, out_dim]() mutable {
            const double* g = oc.grad().data();
            if (xc.requires_grad()) {
                kernels::gemm_nn(g, wc.data().data(), xc.grad().data(),
                                 rows, out_dim, in, true);
            }
            if (wc.requires_grad()) {
                kernels::gemm_tn(g, xc.data().data(), wc.grad().data(),
                                 out_dim, rows, in, true);
            }
            if (bc.requires_grad()) {
                kernels::colsum(g, bc.grad().data(), rows, out_dim, true);
            }
        });
    }
    return out;
}

namespace {

enum class Unary { sigmoid, tanh, relu };

Tensor unary_op(Tape& tape, const Tensor& x, Unary kind) {
    require_defined(x, "unary op");
    const size_t n = x.numel();
    Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
    switch (kind) {
        case Unary::sigmoid:
            kernels::ew_sigmoid(x.data().data(), out.data().data(), n);
            break;
        case Unary::tanh:
            kernels::ew_tanh(x.data().data(), out.data().data(), n);
            break;
        case Unary::relu:
            kernels::ew_relu(x.data().data(), out.data().data(), n);
            break;
    }
    if (out.requires_grad()) {
        Tensor xc = x, oc = out;
        tape.record([xc, oc, kind, n]() mutable {
            const double* g = oc.grad().data();
            switch (kind) {
                case Unary::sigmoid:
                    kernels::ew_sigmoid_bwd(xc.grad().data(), g,
                                            oc.data().data(), n);
                    break;
                case Unary::tanh:
                    kernels::ew_tanh_bwd(xc.grad().data(), g,
                                         oc.data().data(), n);
                    break;
                case Unary::relu:
                    kernels::ew_relu_bwd(xc.grad().data(), g,
                                         xc.data().data(), n);
                    break;
            }
        });
    }
    return out;
}

} // namespace

Tensor sigmoid(Tape& tape, const Tensor& x) {
    return unary_op(tape, x, Unary::sigmoid);
}
Tensor tanh(Tape& tape, const Tensor& x) {
    return unary_op(tape, x, Unary::tanh);
}
Tensor relu(Tape& tape, const Tensor& x) {
    return unary_op(tape, x, Unary::relu);
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    const size_t n = a.numel();
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad() || b.requires_grad());
    kernels::ew_add(a.data().data(), b.data().data(), out.data().data(), n);
    if (out.requires_grad()) {
        Tensor ac = a, bc = b, oc = out;
        tape.record([ac, bc, oc, n]() mutable {
            const double* g = oc.grad().data();
            if (ac.requires_grad()) kernels::ew_axpy(ac.grad().data(), 1.0, g, n);
            if (bc.requires_grad()) kernels::ew_axpy(bc.grad().data(), 1.0, g, n);
        });
    }
    return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    const size_t n = a.numel();
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad() || b.requires_grad());
    kernels::ew_mul(a.data().data(), b.data().data(), out.data().data(), n);
    if (out.requires_grad()) {
        Tensor ac = a, bc = b, oc = out;
        tape.record([ac, bc, oc, n]() mutable {
            const double* g = oc.grad().data();
            if (ac.requires_grad()) {
                kernels::ew_add_mul(ac.grad().data(), g, bc.data().data(), n);
            }
            if (bc.requires_grad()) {
                kernels::ew_add_mul(bc.grad().data(), g, ac.data().data(), n);
            }
        });
    }
    return out;
}

Tensor scale(Tape& tape, const Tensor& x, double c) {
    require_defined(x, "scale");
    const size_t n = x.numel();
    Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
    kernels::ew_scale(x.data().data(), c, out.data().data(), n);
    if (out.requires_grad()) {
        Tensor xc = x, oc = out;
        tape.record([xc, oc, c, n]() mutable {
            kernels::ew_axpy(xc.grad().data(), c, oc.grad().data(), n);
        });
    }
    return out;
}

Tensor sum(Tape& tape, const Tensor& x) {
    require_defined(x, "sum");
    double s = 0.0;
    for (double v : x.data()) s += v;
    Tensor out = Tensor::scalar(s);
    out.set_requires_grad(x.requires_grad());
    if (out.requires_grad()) {
        Tensor xc = x, oc = out;
        const size_t n = x.numel();
        tape.record([xc, oc, n]() mutable {
            const double g = oc.grad()[0];
            double* dx = xc.grad().data();
            for (size_t i = 0; i < n; ++i) dx[i] += g;
        });
    }
    return out;
}

Tensor concat(Tape& tape, const std::vector<Tensor>& parts, size_t axis) {
    if (parts.empty()) throw ContractError("concat: no parts");
    const size_t rank = parts[0].rank();
    if (axis >= rank) {
        throw ShapeError("concat: axis " + std::to_string(axis) +
                         " out of range for rank " + std::to_string(rank));
    }
    std::vector<size_t> out_shape = parts[0].shape();
    bool needs_grad = parts[0].requires_grad();
    for (size_t p = 1; p < parts.size(); ++p) {
        const auto& s = parts[p].shape();
        if (s.size() != rank) {
            throw ShapeError("concat: rank mismatch " + parts[0].shape_str() +
                             " vs " + parts[p].shape_str());
        }
        for (size_t d = 0; d < rank; ++d) {
            if (d != axis && s[d] != out_shape[d]) {
                throw ShapeError("concat: non-axis dimensions disagree, " +
                                 parts[0].shape_str() + " vs " +
                                 parts[p].shape_str());
            }
        }
        out_shape[axis] += s[axis];
        needs_grad = needs_grad || parts[p].requires_grad();
    }

    size_t outer = 1, inner = 1;
    for (size_t d = 0; d < axis; ++d) outer *= out_shape[d];
    for (size_t d = axis + 1; d < rank; ++d) inner *= out_shape[d];
    const size_t out_axis = out_shape[axis];

    Tensor out = Tensor::zeros(out_shape, needs_grad);
    size_t offset = 0;
    for (const Tensor& p : parts) {
        const size_t pa = p.shape()[axis];
        const double* src = p.data().data();
        double* dst = out.data().data();
        for (size_t o = 0; o < outer; ++o) {
            std::copy(src + o * pa * inner, src + (o + 1) * pa * inner,
                      dst + (o * out_axis + offset) * inner);
        }
        offset += pa;
    }

    if (needs_grad) {
        std::vector<Tensor> pc = parts;
        Tensor oc = out;
        tape.record([pc, oc, outer, inner, out_axis, axis]() mutable {
            const double* g = oc.grad().data();
            size_t off = 0;
            for (Tensor& p : pc) {
                const size_t pa = p.shape()[axis];
                if (p.requires_grad()) {
                    double* dg = p.grad().data();
                    for (size_t o = 0; o < outer; ++o) {
                        const double* gs = g + (o * out_axis + off) * inner;
                        double* dd = dg + o * pa * inner;
                        for (size_t i = 0; i < pa * inner; ++i) dd[i] += gs[i];
                    }
                }
                off += pa;
            }
        });
    }
    return out;
}

Tensor slice(Tape& tape, const Tensor& x, size_t begin, size_t len) {
    require_rank(x, 1, "slice");
    if (begin + len > x.dim(0)) {
        throw IndexError("slice [" + std::to_string(begin) + ", " +
                         std::to_string(begin + len) + ") out of range for " +
                         x.shape_str());
    }
    Tensor out = Tensor::zeros({len}, x.requires_grad());
    std::copy(x.data().begin() + begin, x.data().begin() + begin + len,
              out.data().begin());
    if (out.requires_grad()) {
        Tensor xc = x, oc = out;
        tape.record([xc, oc, begin, len]() mutable {
            const double* g = oc.grad().data();
            double* dx = xc.grad().data();
            for (size_t i = 0; i < len; ++i) dx[begin + i] += g[i];
        });
    }
    return out;
}

Tensor row(Tape& tape, const Tensor& x, size_t r) {
    require_rank(x, 2, "row");
    if (r >= x.dim(0)) {
        throw IndexError("row " + std::to_string(r) + " out of range for " +
                         x.shape_str());
    }
    const size_t cols = x.dim(1);
    Tensor out = Tensor::zeros({cols}, x.requires_grad());
    std::copy(x.data().begin() + r * cols, x.data().begin() + (r + 1) * cols,
              out.data().begin());
    if (out.requires_grad()) {
        Tensor xc = x, oc = out;
        tape.record([xc, oc, r, cols]() mutable {
            const double* g = oc.grad().data();
            double* dx = xc.grad().data() + r * cols;
            for (size_t i = 0; i < cols; ++i) dx[i] += g[i];
        });
    }
    return out;
}

Tensor stack_rows(Tape& tape, const std::vector<Tensor>& rows) {
    if (rows.empty()) throw ContractError("stack_rows: no rows");
    const size_t d = rows[0].numel();
    bool needs_grad = false;
    for (const Tensor& r : rows) {
        require_rank(r, 1, "stack_rows");
        if (r.dim(0) != d) {
            throw ShapeError("stack_rows: row length mismatch " +
                             rows[0].shape_str() + " vs " + r.shape_str());
        }
        needs_grad = needs_grad || r.requires_grad();
    }
    Tensor out = Tensor::zeros({rows.size(), d}, needs_grad);
    for (size_t i = 0; i < rows.size(); ++i) {
        std::copy(rows[i].data().begin(), rows[i].data().end(),
                  out.data().begin() + i * d);
    }
    if (needs_grad) {
        std::vector<Tensor> rc = rows;
        Tensor oc = out;
        tape.record([rc, oc, d]() mutable {
            const double* g = oc.grad().data();
            for (size_t i = 0; i < rc.size(); ++i) {
                if (!rc[i].requires_grad()) continue;
                double* dr = rc[i].grad().data();
                for (size_t j = 0; j < d; ++j) dr[j] += g[i * d + j];
            }
        });
    }
    return out;
}

Tensor lookup(Tape& tape, const Tensor& table, int id) {
    require_rank(table, 2, "lookup");
    if (id < 0 || static_cast<size_t>(id) >= table.dim(0)) {
        throw IndexError("lookup id " + std::to_string(id) +
                         " out of range for table " + table.shape_str());
    }
    const size_t e = table.dim(1);
    Tensor out = Tensor::zeros({e}, table.requires_grad());
    std::copy(table.data().begin() + id * e,
              table.data().begin() + (id + 1) * e, out.data().begin());
    if (out.requires_grad()) {
        Tensor tc = table, oc = out;
        tape.record([tc, oc, id, e]() mutable {
            const double* g = oc.grad().data();
            double* dt = tc.grad().data() + static_cast<size_t>(id) * e;
            for (size_t i = 0; i < e; ++i) dt[i] += g[i];
        });
    }
    return out;
}

Tensor dropout(Tape& tape, const Tensor& x, double rate, bool training,
               Rng& rng) {
    require_defined(x, "dropout");
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw ParamError("dropout rate must be in [0, 1), got " +
                         std::to_string(rate));
    }
    if (!training || rate == 0.0) return x;

    const size_t n = x.numel();
    const double keep_scale = 1.0 / (1.0 - rate);
    std::vector<double> mask(n);
    for (size_t i = 0; i < n; ++i) {
        mask[i] = rng.uniform01() < rate ? 0.0 : keep_scale;
    }
    Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
    kernels::ew_mul(x.data().data(), mask.data(), out.data().data(), n);
    if (out.requires_grad()) {
        Tensor xc = x, oc = out;
        tape.record([xc, oc, mask = std::move(mask), n]() mutable {
            kernels::ew_add_mul(xc.grad().data(), oc.grad().data(),
                                mask.data(), n);
        });
    }
    return out;
}

Tensor batch_norm(Tape& tape, const Tensor& x, const Tensor& gamma,
                  const Tensor& beta, Tensor& running_mean,
                  Tensor& running_var, bool training, double eps,
                  double momentum) {
    require_rank(x, 2, "batch_norm input");
    const size_t rows = x.dim(0), cols = x.dim(1);
    require_rank(gamma, 1, "batch_norm gamma");
    require_rank(beta, 1, "batch_norm beta");
    if (gamma.dim(0) != cols || beta.dim(0) != cols ||
        running_mean.dim(0) != cols || running_var.dim(0) != cols) {
        throw ShapeError("batch_norm: parameter width does not match " +
                         x.shape_str());
    }
    if (training && rows < 2) {
        throw ContractError(
            "batch_norm: training mode needs batch >= 2 (variance of a "
            "single row is undefined)");
    }

    Tensor out = Tensor::zeros({rows, cols}, x.requires_grad() ||
                                                 gamma.requires_grad() ||
                                                 beta.requires_grad());
    const double* xd = x.data().data();
    double* od = out.data().data();
    const double* gm = gamma.data().data();
    const double* bt = beta.data().data();

    std::vector<double> mean(cols), var(cols), inv_std(cols);
    if (training) {
        for (size_t j = 0; j < cols; ++j) {
            double m = 0.0;
            for (size_t i = 0; i < rows; ++i) m += xd[i * cols + j];
            m /= static_cast<double>(rows);
            double v = 0.0;
            for (size_t i = 0; i < rows; ++i) {
                const double d = xd[i * cols + j] - m;
                v += d * d;
            }
            v /= static_cast<double>(rows);
            mean[j] = m;
            var[j] = v;
            inv_std[j] = 1.0 / std::sqrt(v + eps);
            // Running estimates track the batch with unbiased variance.
            const double unbiased =
                v * static_cast<double>(rows) / static_cast<double>(rows - 1);
            running_mean.data()[j] =
                (1.0 - momentum) * running_mean.data()[j] + momentum * m;
            running_var.data()[j] =
                (1.0 - momentum) * running_var.data()[j] + momentum * unbiased;
        }
    } else {
        for (size_t j = 0; j < cols; ++j) {
            mean[j] = running_mean.data()[j];
            var[j] = running_var.data()[j];
            inv_std[j] = 1.0 / std::sqrt(var[j] + eps);
        }
    }

    std::vector<double> xhat(rows * cols);
    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) {
            const double h = (xd[i * cols + j] - mean[j]) * inv_std[j];
            xhat[i * cols + j] = h;
            od[i * cols + j] = gm[j] * h + bt[j];
        }
    }

    if (out.requires_grad()) {
        Tensor xc = x, gc = gamma, bc = beta, oc = out;
        tape.record([xc, gc, bc, oc, xhat = std::move(xhat),
                     inv_std = std::move(inv_std), rows, cols,
                     training]() mutable {
            const double* g = oc.grad().data();
            const double* gmv = gc.data().data();
            if (gc.requires_grad()) {
                double* dg = gc.grad().data();
                for (size_t j = 0; j < cols; ++j) {
                    double s = 0.0;
                    for (size_t i = 0; i < rows; ++i) {
                        s += g[i * cols + j] * xhat[i * cols + j];
                    }
                    dg[j] += s;
                }
            }
            if (bc.requires_grad()) {
                double* db = bc.grad().data();
                for (size_t j = 0; j < cols; ++j) {
                    double s = 0.0;
                    for (size_t i = 0; i < rows; ++i) s += g[i * cols + j];
                    db[j] += s;
                }
            }
            if (xc.requires_grad()) {
                double* dx = xc.grad().data();
                if (training) {
                    // dxhat = g·γ; dx = (dxhat − mean(dxhat)
                    //        − xhat·mean(dxhat∘xhat)) · inv_std
                    const double inv_rows = 1.0 / static_cast<double>(rows);
                    for (size_t j = 0; j < cols; ++j) {
                        double sum_dh = 0.0, sum_dh_xhat = 0.0;
                        for (size_t i = 0; i < rows; ++i) {
                            const double dh = g[i * cols + j] * gmv[j];
                            sum_dh += dh;
                            sum_dh_xhat += dh * xhat[i * cols + j];
                        }
                        for (size_t i = 0; i < rows; ++i) {
                            const double dh = g[i * cols + j] * gmv[j];
                            dx[i * cols + j] +=
                                (dh - inv_rows * sum_dh -
                                 xhat[i * cols + j] * inv_rows * sum_dh_xhat) *
                                inv_std[j];
                        }
                    }
                } else {
                    for (size_t i = 0; i < rows; ++i) {
                        for (size_t j = 0; j < cols; ++j) {
                            dx[i * cols + j] +=
                                g[i * cols + j] * gmv[j] * inv_std[j];
                        }
                    }
                }
            }
        });
    }
    return out;
}

Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits,
                             const std::vector<int>& targets) {
    require_defined(logits, "softmax_cross_entropy");
    size_t rows, cols;
    if (logits.rank() == 1) {
        rows = 1;
        cols = logits.dim(0);
    } else if (logits.rank() == 2) {
        rows = logits.dim(0);
        cols = logits.dim(1);
    } else {
        throw ShapeError("softmax_cross_entropy: logits must be rank 1 or 2, got " +
                         logits.shape_str());
    }
    if (targets.size() != rows) {
        throw ShapeError("softmax_cross_entropy: " + std::to_string(rows) +
                         " rows but " + std::to_string(targets.size()) +
                         " targets");
    }
    for (int t : targets) {
        if (t < 0 || static_cast<size_t>(t) >= cols) {
            throw IndexError("softmax_cross_entropy: target " +
                             std::to_string(t) + " outside vocabulary of " +
                             std::to_string(cols));
        }
    }

    const double* z = logits.data().data();
    std::vector<double> probs(rows * cols);
    double loss = 0.0;
    for (size_t i = 0; i < rows; ++i) {
        const double* zi = z + i * cols;
        double m = zi[0];
        for (size_t j = 1; j < cols; ++j) m = std::max(m, zi[j]);
        double sum = 0.0;
        for (size_t j = 0; j < cols; ++j) {
            const double e = std::exp(zi[j] - m);
            probs[i * cols + j] = e;
            sum += e;
        }
        const double inv_sum = 1.0 / sum;
        for (size_t j = 0; j < cols; ++j) probs[i * cols + j] *= inv_sum;
        loss += std::log(sum) - (zi[targets[i]] - m);
    }
    loss /= static_cast<double>(rows);

    Tensor out = Tensor::scalar(loss);
    out.set_requires_grad(logits.requires_grad());
    if (out.requires_grad()) {
        Tensor lc = logits, oc = out;
        tape.record([lc, oc, probs = std::move(probs), targets, rows,
                     cols]() mutable {
            const double g = oc.grad()[0] / static_cast<double>(rows);
            double* dz = lc.grad().data();
            for (size_t i = 0; i < rows; ++i) {
                for (size_t j = 0; j < cols; ++j) {
                    double p = probs[i * cols + j];
                    if (j == static_cast<size_t>(targets[i])) p -= 1.0;
                    dz[i * cols + j] += g * p;
                }
            }
        });
    }
    return out;
}

} // namespace glac
