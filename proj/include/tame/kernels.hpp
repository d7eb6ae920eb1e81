#pragma once

#include <cstdint>

namespace tame::kernels {

// Data-parallel inner loops behind the network math. Every kernel exists as a
// scalar reference implementation; on x86-64 an AVX2+FMA variant of each is
// compiled into a second table and selected at runtime. The two variants are
// equivalence-tested against each other (SIMD reductions reorder float adds,
// so agreement is within a small tolerance, not bit-exact).
//
// GEMM shape conventions (all row-major):
//   gemm_nt: C[m,n] = A[m,k] * B[n,k]^T   (dot-product form)
//   gemm_nn: C[m,n] = A[m,k] * B[k,n]
//   gemm_tn: C[m,n] = A[k,m]^T * B[k,n]
// `acc` accumulates into C instead of overwriting it.
struct Ops {
    const char* name;

    void (*gemm_nt)(const float* a, const float* b, float* c, int m, int n, int k, bool acc);
    void (*gemm_nn)(const float* a, const float* b, float* c, int m, int n, int k, bool acc);
    void (*gemm_tn)(const float* a, const float* b, float* c, int m, int n, int k, bool acc);

    void (*relu_fwd)(const float* x, float* y, int64_t n);
    // dx[i] = x[i] > 0 ? dy[i] : 0
    void (*relu_bwd)(const float* x, const float* dy, float* dx, int64_t n);
    void (*sigmoid_fwd)(const float* x, float* y, int64_t n);
    // dx[i] = dy[i] * s[i] * (1 - s[i]) where s is the forward output
    void (*sigmoid_bwd)(const float* s, const float* dy, float* dx, int64_t n);

    // y[r, :] += b for every row r
    void (*add_bias_rows)(float* y, const float* b, int rows, int cols);

    // Momentum SGD step over one flat parameter block, weight decay folded
    // into the gradient before the velocity update:
    //   g' = g + wd * w;  v = momentum * v + g'
    //   w -= lr * (g' + momentum * v)   [nesterov]
    //   w -= lr * v                     [plain]
    // `mask` (optional, one byte per weight) freezes zeroed entries: masked
    // weights see g' = 0 and are pinned to exactly 0 after the step.
    void (*sgd_update)(float* w, const float* g, float* v, const uint8_t* mask, int64_t n,
                       float lr, float momentum, bool nesterov, float wd);
};

enum class Backend { kAuto, kScalar, kAvx2 };

const Ops& scalar_ops();

// True when the running CPU supports the AVX2 kernel table (and it was
// compiled in).
bool avx2_available();
const Ops& avx2_ops();  // throws if unavailable

// Process-wide selection. kAuto picks AVX2 when available.
void select(Backend backend);
const Ops& active();
Backend parse_backend(const char* name);  // "auto" | "scalar" | "avx2"

}  // namespace tame::kernels
