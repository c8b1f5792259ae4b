#include "glac/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>

namespace glac::kernels {

namespace {

std::atomic<Exec> g_exec{Exec::parallel};

inline double sigmoid_scalar(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Below these sizes the OpenMP variants run the loop without spawning a
// team; spawning costs more than the loop body.
constexpr size_t kEwCutoff = 16384;
constexpr size_t kRowCutoff = 64;

} // namespace

Exec exec_mode() { return g_exec.load(std::memory_order_relaxed); }
void set_exec_mode(Exec e) { g_exec.store(e, std::memory_order_relaxed); }

// ---------------------------------------------------------------- serial

namespace serial {

void gemm_nn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc) {
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
            double s = acc ? c[i * n + j] : 0.0;
            for (size_t p = 0; p < k; ++p) {
                s += a[i * k + p] * b[p * n + j];
            }
            c[i * n + j] = s;
        }
    }
}

void gemm_nt(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc) {
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
            double s = acc ? c[i * n + j] : 0.0;
            for (size_t p = 0; p < k; ++p) {
                s += a[i * k + p] * b[j * k + p];
            }
            c[i * n + j] = s;
        }
    }
}

void gemm_tn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc) {
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
            double s = acc ? c[i * n + j] : 0.0;
            for (size_t p = 0; p < k; ++p) {
                s += a[p * m + i] * b[p * n + j];
            }
            c[i * n + j] = s;
        }
    }
}

void matvec(const double* a, const double* x, double* y,
            size_t m, size_t n, bool acc) {
    for (size_t i = 0; i < m; ++i) {
        double s = acc ? y[i] : 0.0;
        for (size_t j = 0; j < n; ++j) {
            s += a[i * n + j] * x[j];
        }
        y[i] = s;
    }
}

void matvec_t(const double* a, const double* x, double* y,
              size_t m, size_t n, bool acc) {
    for (size_t j = 0; j < n; ++j) {
        double s = acc ? y[j] : 0.0;
        for (size_t i = 0; i < m; ++i) {
            s += a[i * n + j] * x[i];
        }
        y[j] = s;
    }
}

void ger_acc(double* a, const double* x, const double* y, size_t m, size_t n) {
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
            a[i * n + j] += x[i] * y[j];
        }
    }
}

void colsum(const double* x, double* y, size_t rows, size_t cols, bool acc) {
    for (size_t j = 0; j < cols; ++j) {
        double s = acc ? y[j] : 0.0;
        for (size_t i = 0; i < rows; ++i) {
            s += x[i * cols + j];
        }
        y[j] = s;
    }
}

void add_rowvec(const double* x, const double* b, double* y,
                size_t rows, size_t cols) {
    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) {
            y[i * cols + j] = x[i * cols + j] + b[j];
        }
    }
}

void ew_add(const double* a, const double* b, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

void ew_mul(const double* a, const double* b, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void ew_add_mul(double* y, const double* a, const double* b, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

void ew_axpy(double* y, double alpha, const double* x, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void ew_scale(const double* x, double alpha, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

void ew_sigmoid(const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = sigmoid_scalar(x[i]);
}

void ew_tanh(const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void ew_relu(const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void ew_sigmoid_bwd(double* dx, const double* g, const double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) dx[i] += g[i] * y[i] * (1.0 - y[i]);
}

void ew_tanh_bwd(double* dx, const double* g, const double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
}

void ew_relu_bwd(double* dx, const double* g, const double* x, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        if (x[i] > 0.0) dx[i] += g[i];
    }
}

} // namespace serial

// ------------------------------------------------------------------ omp

namespace omp {

void gemm_nn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc) {
#pragma omp parallel for schedule(static) if (m >= kRowCutoff)
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
            double s = acc ? c[i * n + j] : 0.0;
            for (size_t p = 0; p < k; ++p) {
                s += a[i * k + p] * b[p * n + j];
            }
            c[i * n + j] = s;
        }
    }
}

void gemm_nt(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc) {
#pragma omp parallel for schedule(static) if (m >= kRowCutoff)
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
            double s = acc ? c[i * n + j] : 0.0;
            for (size_t p = 0; p < k; ++p) {
                s += a[i * k + p] * b[j * k + p];
            }
            c[i * n + j] = s;
        }
    }
}

void gemm_tn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc) {
#pragma omp parallel for schedule(static) if (m >= kRowCutoff)
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
            double s = acc ? c[i * n + j] : 0.0;
            for (size_t p = 0; p < k; ++p) {
                s += a[p * m + i] * b[p * n + j];
            }
            c[i * n + j] = s;
        }
    }
}

void matvec(const double* a, const double* x, double* y,
            size_t m, size_t n, bool acc) {
#pragma omp parallel for schedule(static) if (m >= kRowCutoff)
    for (size_t i = 0; i < m; ++i) {
        double s = acc ? y[i] : 0.0;
        for (size_t j = 0; j < n; ++j) {
            s += a[i * n + j] * x[j];
        }
        y[i] = s;
    }
}

void matvec_t(const double* a, const double* x, double* y,
              size_t m, size_t n, bool acc) {
#pragma omp parallel for schedule(static) if (n >= kRowCutoff)
    for (size_t j = 0; j < n; ++j) {
        double s = acc ? y[j] : 0.0;
        for (size_t i = 0; i < m; ++i) {
            s += a[i * n + j] * x[i];
        }
        y[j] = s;
    }
}

void ger_acc(double* a, const double* x, const double* y, size_t m, size_t n) {
#pragma omp parallel for schedule(static) if (m >= kRowCutoff)
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
            a[i * n + j] += x[i] * y[j];
        }
    }
}

void colsum(const double* x, double* y, size_t rows, size_t cols, bool acc) {
#pragma omp parallel for schedule(static) if (cols >= kRowCutoff)
    for (size_t j = 0; j < cols; ++j) {
        double s = acc ? y[j] : 0.0;
        for (size_t i = 0; i < rows; ++i) {
            s += x[i * cols + j];
        }
        y[j] = s;
    }
}

void add_rowvec(const double* x, const double* b, double* y,
                size_t rows, size_t cols) {
#pragma omp parallel for schedule(static) if (rows >= kRowCutoff)
    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) {
            y[i * cols + j] = x[i * cols + j] + b[j];
        }
    }
}

void ew_add(const double* a, const double* b, double* y, size_t n) {
#pragma omp parallel for schedule(static) if (n >= kEwCutoff)
    for (size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

void ew_mul(const double* a, const double* b, double* y, size_t n) {
#pragma omp parallel for schedule(static) if (n >= kEwCutoff)
    for (size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void ew_add_mul(double* y, const double* a, const double* b, size_t n) {
#pragma omp parallel for schedule(static) if (n >= kEwCutoff)
    for (size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

void ew_axpy(double* y, double alpha, const double* x, size_t n) {
#pragma omp parallel for schedule(static) if (n >= kEwCutoff)
    for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void ew_scale(const double* x, double alpha, double* y, size_t n) {
#pragma omp parallel for schedule(static) if (n >= kEwCutoff)
    for (size_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

void ew_sigmoid(const double* x, double* y, size_t n) {
#pragma omp parallel for schedule(static) if (n >= kEwCutoff)
    for (size_t i = 0; i < n; ++i) y[i] = sigmoid_scalar(x[i]);
}

void ew_tanh(const double* x, double* y, size_t n) {
#pragma omp parallel for schedule(static) if (n >= kEwCutoff)
    for (size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void ew_relu(const double* x, double* y, size_t n) {
#pragma omp parallel for schedule(static) if (n >= kEwCutoff)
    for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void ew_sigmoid_bwd(double* dx, const double* g, const double* y, size_t n) {
#pragma omp parallel for schedule(static) if (n >= kEwCutoff)
    for (size_t i = 0; i < n; ++i) dx[i] += g[i] * y[i] * (1.0 - y[i]);
}

void ew_tanh_bwd(double* dx, const double* g, const double* y, size_t n) {
#pragma omp parallel for schedule(static) if (n >= kEwCutoff)
    for (size_t i = 0; i < n; ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
}

void ew_relu_bwd(double* dx, const double* g, const double* x, size_t n) {
#pragma omp parallel for schedule(static) if (n >= kEwCutoff)
    for (size_t i = 0; i < n; ++i) {
        if (x[i] > 0.0) dx[i] += g[i];
    }
}

} // namespace omp

// ------------------------------------------------------------- dispatch

#define GLAC_DISPATCH(fn, ...)                       \
    do {                                             \
        if (exec_mode() == Exec::parallel) {         \
            omp::fn(__VA_ARGS__);                    \
        } else {                                     \
            serial::fn(__VA_ARGS__);                 \
        }                                            \
    } while (0)

void gemm_nn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc) {
    GLAC_DISPATCH(gemm_nn, a, b, c, m, k, n, acc);
}
void gemm_nt(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc) {
    GLAC_DISPATCH(gemm_nt, a, b, c, m, k, n, acc);
}
void gemm_tn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n, bool acc) {
    GLAC_DISPATCH(gemm_tn, a, b, c, m, k, n, acc);
}
void matvec(const double* a, const double* x, double* y,
            size_t m, size_t n, bool acc) {
    GLAC_DISPATCH(matvec, a, x, y, m, n, acc);
}
void matvec_t(const double* a, const double* x, double* y,
              size_t m, size_t n, bool acc) {
    GLAC_DISPATCH(matvec_t, a, x, y, m, n, acc);
}
void ger_acc(double* a, const double* x, const double* y, size_t m, size_t n) {
    GLAC_DISPATCH(ger_acc, a, x, y, m, n);
}
void colsum(const double* x, double* y, size_t rows, size_t cols, bool acc) {
    GLAC_DISPATCH(colsum, x, y, rows, cols, acc);
}
void add_rowvec(const double* x, const double* b, double* y,
                size_t rows, size_t cols) {
    GLAC_DISPATCH(add_rowvec, x, b, y, rows, cols);
}
void ew_add(const double* a, const double* b, double* y, size_t n) {
    GLAC_DISPATCH(ew_add, a, b, y, n);
}
void ew_mul(const double* a, const double* b, double* y, size_t n) {
    GLAC_DISPATCH(ew_mul, a, b, y, n);
}
void ew_add_mul(double* y, const double* a, const double* b, size_t n) {
    GLAC_DISPATCH(ew_add_mul, y, a, b, n);
}
void ew_axpy(double* y, double alpha, const double* x, size_t n) {
    GLAC_DISPATCH(ew_axpy, y, alpha, x, n);
}
void ew_scale(const double* x, double alpha, double* y, size_t n) {
    GLAC_DISPATCH(ew_scale, x, alpha, y, n);
}
void ew_sigmoid(const double* x, double* y, size_t n) {
    GLAC_DISPATCH(ew_sigmoid, x, y, n);
}
void ew_tanh(const double* x, double* y, size_t n) {
    GLAC_DISPATCH(ew_tanh, x, y, n);
}
void ew_relu(const double* x, double* y, size_t n) {
    GLAC_DISPATCH(ew_relu, x, y, n);
}
void ew_sigmoid_bwd(double* dx, const double* g, const double* y, size_t n) {
    GLAC_DISPATCH(ew_sigmoid_bwd, dx, g, y, n);
}
void ew_tanh_bwd(double* dx, const double* g, const double* y, size_t n) {
    GLAC_DISPATCH(ew_tanh_bwd, dx, g, y, n);
}
void ew_relu_bwd(double* dx, const double* g, const double* x, size_t n) {
    GLAC_DISPATCH(ew_relu_bwd, dx, g, x, n);
}

#undef GLAC_DISPATCH

} // namespace glac::kernels
