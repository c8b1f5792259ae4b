#pragma once

#include <cstddef>

namespace glac::kernels {

// Dense kernels backing every tensor operation. Each kernel exists twice:
// a plain-loop serial reference under kernels::serial and an OpenMP variant
// under kernels::omp. The parallel variants split work over independent
// output elements only, so the floating-point reduction order of every
// output element is identical to the serial path and results are bit-equal
// for any thread count. The unprefixed functions dispatch on exec_mode().
//
// Matrices are row-major, row index first.

enum class Exec { serial, parallel };

Exec exec_mode();
void set_exec_mode(Exec e);

namespace serial {

// c[m×n] = (or +=) a[m×k] · b[k×n]
void gemm_nn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc);
// c[m×n] = (or +=) a[m×k] · b[n×k]ᵀ
void gemm_nt(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc);
// c[m×n] = (or +=) a[k×m]ᵀ · b[k×n]
void gemm_tn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc);
// y[m] = (or +=) a[m×n] · x[n]
void matvec(const double* a, const double* x, double* y,
            size_t m, size_t n, bool acc);
// y[n] = (or +=) a[m×n]ᵀ · x[m]
void matvec_t(const double* a, const double* x, double* y,
              size_t m, size_t n, bool acc);
// a[m×n] += x[m] ⊗ y[n]
void ger_acc(double* a, const double* x, const double* y, size_t m, size_t n);
// y[cols] = (or +=) column sums of x[rows×cols]
void colsum(const double* x, double* y, size_t rows, size_t cols, bool acc);
// y[rows×cols] = x + b broadcast over rows
void add_rowvec(const double* x, const double* b, double* y,
                size_t rows, size_t cols);

void ew_add(const double* a, const double* b, double* y, size_t n);
void ew_mul(const double* a, const double* b, double* y, size_t n);
void ew_add_mul(double* y, const double* a, const double* b, size_t n); // y += a∘b
void ew_axpy(double* y, double alpha, const double* x, size_t n);       // y += α·x
void ew_scale(const double* x, double alpha, double* y, size_t n);
void ew_sigmoid(const double* x, double* y, size_t n);
void ew_tanh(const double* x, double* y, size_t n);
void ew_relu(const double* x, double* y, size_t n);
// dx += g ∘ y ∘ (1−y), y = σ(x)
void ew_sigmoid_bwd(double* dx, const double* g, const double* y, size_t n);
// dx += g ∘ (1−y²), y = tanh(x)
void ew_tanh_bwd(double* dx, const double* g, const double* y, size_t n);
// dx += g ∘ 1[x > 0]
void ew_relu_bwd(double* dx, const double* g, const double* x, size_t n);

} // namespace serial

namespace omp {

void gemm_nn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc);
void gemm_nt(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc);
void gemm_tn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc);
void matvec(const double* a, const double* x, double* y,
            size_t m, size_t n, bool acc);
void matvec_t(const double* a, const double* x, double* y,
              size_t m, size_t n, bool acc);
void ger_acc(double* a, const double* x, const double* y, size_t m, size_t n);
void colsum(const double* x, double* y, size_t rows, size_t cols, bool acc);
void add_rowvec(const double* x, const double* b, double* y,
                size_t rows, size_t cols);

void ew_add(const double* a, const double* b, double* y, size_t n);
void ew_mul(const double* a, const double* b, double* y, size_t n);
void ew_add_mul(double* y, const double* a, const double* b, size_t n);
void ew_axpy(double* y, double alpha, const double* x, size_t n);
void ew_scale(const double* x, double alpha, double* y, size_t n);
void ew_sigmoid(const double* x, double* y, size_t n);
void ew_tanh(const double* x, double* y, size_t n);
void ew_relu(const double* x, double* y, size_t n);
void ew_sigmoid_bwd(double* dx, const double* g, const double* y, size_t n);
void ew_tanh_bwd(double* dx, const double* g, const double* y, size_t n);
void ew_relu_bwd(double* dx, const double* g, const double* x, size_t n);

} // namespace omp

void gemm_nn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc);
void gemm_nt(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc);
void gemm_tn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc);
void matvec(const double* a, const double* x, double* y,
            size_t m, size_t n, bool acc);
void matvec_t(const double* a, const double* x, double* y,
              size_t m, size_t n, bool acc);
void ger_acc(double* a, const double* x, const double* y, size_t m, size_t n);
void colsum(const double* x, double* y, size_t rows, size_t cols, bool acc);
void add_rowvec(const double* x, const double* b, double* y,
                size_t rows, size_t cols);
void ew_add(const double* a, const double* b, double* y, size_t n);
void ew_mul(const double* a, const double* b, double* y, size_t n);
void ew_add_mul(double* y, const double* a, const double* b, size_t n);
void ew_axpy(double* y, double alpha, const double* x, size_t n);
void ew_scale(const double* x, double alpha, double* y, size_t n);
void ew_sigmoid(const double* x, double* y, size_t n);
void ew_tanh(const double* x, double* y, size_t n);
void ew_relu(const double* x, double* y, size_t n);
void ew_sigmoid_bwd(double* dx, const double* g, const double* y, size_t n);
void ew_tanh_bwd(double* dx, const double* g, const double* y, size_t n);
void ew_relu_bwd(double* dx, const double* g, const double* x, size_t n);

} // namespace glac::kernels
