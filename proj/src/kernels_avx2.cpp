// AVX2+FMA variants of the kernel table. This TU is compiled with
// -mavx2 -mfma and must only be entered after the cpuid check in select().

#include "tame/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace tame::kernels {

namespace {

inline float hsum256(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
    lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 0x55));
    return _mm_cvtss_f32(lo);
}

void v_gemm_nt(const float* a, const float* b, float* c, int m, int n, int k, bool acc) {
    for (int i = 0; i < m; ++i) {
        const float* ai = a + static_cast<int64_t>(i) * k;
        int j = 0;
        // Four B rows share each A load.
        for (; j + 4 <= n; j += 4) {
            const float* b0 = b + static_cast<int64_t>(j) * k;
            const float* b1 = b0 + k;
            const float* b2 = b1 + k;
            const float* b3 = b2 + k;
            __m256 s0 = _mm256_setzero_ps(), s1 = _mm256_setzero_ps();
            __m256 s2 = _mm256_setzero_ps(), s3 = _mm256_setzero_ps();
            int p = 0;
            for (; p + 8 <= k; p += 8) {
                const __m256 av = _mm256_loadu_ps(ai + p);
                s0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b0 + p), s0);
                s1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b1 + p), s1);
                s2 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b2 + p), s2);
                s3 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b3 + p), s3);
            }
            float r0 = hsum256(s0), r1 = hsum256(s1), r2 = hsum256(s2), r3 = hsum256(s3);
            for (; p < k; ++p) {
                const float av = ai[p];
                r0 += av * b0[p];
                r1 += av * b1[p];
                r2 += av * b2[p];
                r3 += av * b3[p];
            }
            float* cij = c + static_cast<int64_t>(i) * n + j;
            if (acc) {
                cij[0] += r0;
                cij[1] += r1;
                cij[2] += r2;
                cij[3] += r3;
            } else {
                cij[0] = r0;
                cij[1] = r1;
                cij[2] = r2;
                cij[3] = r3;
            }
        }
        for (; j < n; ++j) {
            const float* bj = b + static_cast<int64_t>(j) * k;
            __m256 s = _mm256_setzero_ps();
            int p = 0;
            for (; p + 8 <= k; p += 8)
                s = _mm256_fmadd_ps(_mm256_loadu_ps(ai + p), _mm256_loadu_ps(bj + p), s);
            float r = hsum256(s);
            for (; p < k; ++p) r += ai[p] * bj[p];
            float* cij = c + static_cast<int64_t>(i) * n + j;
            *cij = acc ? *cij + r : r;
        }
    }
}

inline void axpy_row(float av, const float* bp, float* ci, int n) {
    const __m256 avv = _mm256_set1_ps(av);
    int j = 0;
    for (; j + 8 <= n; j += 8) {
        __m256 cv = _mm256_loadu_ps(ci + j);
        cv = _mm256_fmadd_ps(avv, _mm256_loadu_ps(bp + j), cv);
        _mm256_storeu_ps(ci + j, cv);
    }
    for (; j < n; ++j) ci[j] += av * bp[j];
}

void v_gemm_nn(const float* a, const float* b, float* c, int m, int n, int k, bool acc) {
    for (int i = 0; i < m; ++i) {
        float* ci = c + static_cast<int64_t>(i) * n;
        if (!acc) std::memset(ci, 0, sizeof(float) * static_cast<size_t>(n));
        const float* ai = a + static_cast<int64_t>(i) * k;
        for (int p = 0; p < k; ++p) axpy_row(ai[p], b + static_cast<int64_t>(p) * n, ci, n);
    }
}

void v_gemm_tn(const float* a, const float* b, float* c, int m, int n, int k, bool acc) {
    if (!acc) std::memset(c, 0, sizeof(float) * static_cast<size_t>(m) * static_cast<size_t>(n));
    for (int p = 0; p < k; ++p) {
        const float* ap = a + static_cast<int64_t>(p) * m;
        const float* bp = b + static_cast<int64_t>(p) * n;
        for (int i = 0; i < m; ++i) axpy_row(ap[i], bp, c + static_cast<int64_t>(i) * n, n);
    }
}

void v_relu_fwd(const float* x, float* y, int64_t n) {
    const __m256 zero = _mm256_setzero_ps();
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void v_relu_bwd(const float* x, const float* dy, float* dx, int64_t n) {
    const __m256 zero = _mm256_setzero_ps();
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 keep = _mm256_cmp_ps(_mm256_loadu_ps(x + i), zero, _CMP_GT_OQ);
        _mm256_storeu_ps(dx + i, _mm256_and_ps(_mm256_loadu_ps(dy + i), keep));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

// exp() stays scalar; the sigmoid head is a few hundred values per batch and
// a polynomial vector exp is not worth the accuracy bookkeeping here.
void v_sigmoid_fwd(const float* x, float* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = 1.0f / (1.0f + std::exp(-x[i]));
}

void v_sigmoid_bwd(const float* s, const float* dy, float* dx, int64_t n) {
    const __m256 one = _mm256_set1_ps(1.0f);
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 sv = _mm256_loadu_ps(s + i);
        const __m256 g = _mm256_mul_ps(sv, _mm256_sub_ps(one, sv));
        _mm256_storeu_ps(dx + i, _mm256_mul_ps(_mm256_loadu_ps(dy + i), g));
    }
    for (; i < n; ++i) dx[i] = dy[i] * s[i] * (1.0f - s[i]);
}

void v_add_bias_rows(float* y, const float* b, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        float* yr = y + static_cast<int64_t>(r) * cols;
        int j = 0;
        for (; j + 8 <= cols; j += 8)
            _mm256_storeu_ps(yr + j, _mm256_add_ps(_mm256_loadu_ps(yr + j), _mm256_loadu_ps(b + j)));
        for (; j < cols; ++j) yr[j] += b[j];
    }
}

void v_sgd_update(float* w, const float* g, float* v, const uint8_t* mask, int64_t n,
                  float lr, float momentum, bool nesterov, float wd) {
    if (mask) {
        // Masked blocks are sparse and branchy; the scalar path is fine here.
        for (int64_t i = 0; i < n; ++i) {
            if (mask[i] == 0) {
                w[i] = 0.0f;
                continue;
            }
            const float gi = g[i] + wd * w[i];
            const float vi = momentum * v[i] + gi;
            v[i] = vi;
            w[i] -= nesterov ? lr * (gi + momentum * vi) : lr * vi;
        }
        return;
    }
    const __m256 lrv = _mm256_set1_ps(lr);
    const __m256 mom = _mm256_set1_ps(momentum);
    const __m256 wdv = _mm256_set1_ps(wd);
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 wv = _mm256_loadu_ps(w + i);
        const __m256 gv = _mm256_fmadd_ps(wdv, wv, _mm256_loadu_ps(g + i));
        const __m256 vv = _mm256_fmadd_ps(mom, _mm256_loadu_ps(v + i), gv);
        _mm256_storeu_ps(v + i, vv);
        const __m256 step = nesterov ? _mm256_fmadd_ps(mom, vv, gv) : vv;
        _mm256_storeu_ps(w + i, _mm256_fnmadd_ps(lrv, step, wv));
    }
    for (; i < n; ++i) {
        const float gi = g[i] + wd * w[i];
        const float vi = momentum * v[i] + gi;
        v[i] = vi;
        w[i] -= nesterov ? lr * (gi + momentum * vi) : lr * vi;
    }
}

constexpr Ops kAvx2Ops = {
    "avx2",       v_gemm_nt,     v_gemm_nn,     v_gemm_tn,       v_relu_fwd,
    v_relu_bwd,   v_sigmoid_fwd, v_sigmoid_bwd, v_add_bias_rows, v_sgd_update,
};

}  // namespace

const Ops& avx2_ops() { return kAvx2Ops; }

}  // namespace tame::kernels
