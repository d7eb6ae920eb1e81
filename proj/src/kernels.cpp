#include "tame/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace tame::kernels {

// ---------------------------------------------------------------------------
// Scalar reference kernels
// ---------------------------------------------------------------------------

namespace {

void s_gemm_nt(const float* a, const float* b, float* c, int m, int n, int k, bool acc) {
    for (int i = 0; i < m; ++i) {
        const float* ai = a + static_cast<int64_t>(i) * k;
        for (int j = 0; j < n; ++j) {
            const float* bj = b + static_cast<int64_t>(j) * k;
            float sum = 0.0f;
            for (int p = 0; p < k; ++p) sum += ai[p] * bj[p];
            float* cij = c + static_cast<int64_t>(i) * n + j;
            *cij = acc ? *cij + sum : sum;
        }
    }
}

void s_gemm_nn(const float* a, const float* b, float* c, int m, int n, int k, bool acc) {
    for (int i = 0; i < m; ++i) {
        float* ci = c + static_cast<int64_t>(i) * n;
        if (!acc) std::memset(ci, 0, sizeof(float) * static_cast<size_t>(n));
        const float* ai = a + static_cast<int64_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const float apv = ai[p];
            const float* bp = b + static_cast<int64_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += apv * bp[j];
        }
    }
}

void s_gemm_tn(const float* a, const float* b, float* c, int m, int n, int k, bool acc) {
    if (!acc) std::memset(c, 0, sizeof(float) * static_cast<size_t>(m) * static_cast<size_t>(n));
    for (int p = 0; p < k; ++p) {
        const float* ap = a + static_cast<int64_t>(p) * m;
        const float* bp = b + static_cast<int64_t>(p) * n;
        for (int i = 0; i < m; ++i) {
            const float av = ap[i];
            float* ci = c + static_cast<int64_t>(i) * n;
            for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

void s_relu_fwd(const float* x, float* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void s_relu_bwd(const float* x, const float* dy, float* dx, int64_t n) {
    for (int64_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

void s_sigmoid_fwd(const float* x, float* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = 1.0f / (1.0f + std::exp(-x[i]));
}

void s_sigmoid_bwd(const float* s, const float* dy, float* dx, int64_t n) {
    for (int64_t i = 0; i < n; ++i) dx[i] = dy[i] * s[i] * (1.0f - s[i]);
}

void s_add_bias_rows(float* y, const float* b, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        float* yr = y + static_cast<int64_t>(r) * cols;
        for (int j = 0; j < cols; ++j) yr[j] += b[j];
    }
}

void s_sgd_update(float* w, const float* g, float* v, const uint8_t* mask, int64_t n,
                  float lr, float momentum, bool nesterov, float wd) {
    for (int64_t i = 0; i < n; ++i) {
        if (mask && mask[i] == 0) {
            w[i] = 0.0f;
            continue;
        }
        const float gi = g[i] + wd * w[i];
        const float vi = momentum * v[i] + gi;
        v[i] = vi;
        w[i] -= nesterov ? lr * (gi + momentum * vi) : lr * vi;
    }
}

constexpr Ops kScalarOps = {
    "scalar",     s_gemm_nt,     s_gemm_nn,    s_gemm_tn,       s_relu_fwd,
    s_relu_bwd,   s_sigmoid_fwd, s_sigmoid_bwd, s_add_bias_rows, s_sgd_update,
};

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

bool avx2_available() {
#if defined(TAME_HAVE_AVX2_TU)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

#if !defined(TAME_HAVE_AVX2_TU)
const Ops& avx2_ops() { throw std::runtime_error("avx2 kernels not compiled into this build"); }
#endif

namespace {
std::atomic<const Ops*> g_active{nullptr};
}

void select(Backend backend) {
    switch (backend) {
        case Backend::kScalar:
            g_active.store(&kScalarOps);
            return;
        case Backend::kAvx2:
            if (!avx2_available()) throw std::runtime_error("avx2 kernels unavailable on this cpu");
            g_active.store(&avx2_ops());
            return;
        case Backend::kAuto:
            g_active.store(avx2_available() ? &avx2_ops() : &kScalarOps);
            return;
    }
}

const Ops& active() {
    const Ops* ops = g_active.load();
    if (!ops) {
        select(Backend::kAuto);
        ops = g_active.load();
    }
    return *ops;
}

Backend parse_backend(const char* name) {
    const std::string s(name);
    if (s == "auto") return Backend::kAuto;
    if (s == "scalar") return Backend::kScalar;
    if (s == "avx2") return Backend::kAvx2;
    throw std::invalid_argument("unknown kernel backend: " + s);
}

}  // namespace tame::kernels
