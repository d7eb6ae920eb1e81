#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "tame/kernels.hpp"

using namespace tame;

namespace {

std::vector<float> random_vec(size_t n, std::mt19937& rng) {
    std::uniform_real_distribution<float> d(-1.0f, 1.0f);
    std::vector<float> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

// Double-precision reference, independent of both kernel tables.
void ref_gemm(const std::vector<float>& a, const std::vector<float>& b, std::vector<double>& c,
              int m, int n, int k, char mode) {
    c.assign(static_cast<size_t>(m) * n, 0.0);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int p = 0; p < k; ++p) {
                double av, bv;
                if (mode == 't') {  // nt: A[m,k], B[n,k]
                    av = a[static_cast<size_t>(i) * k + p];
                    bv = b[static_cast<size_t>(j) * k + p];
                } else if (mode == 'n') {  // nn: A[m,k], B[k,n]
                    av = a[static_cast<size_t>(i) * k + p];
                    bv = b[static_cast<size_t>(p) * n + j];
                } else {  // tn: A[k,m], B[k,n]
                    av = a[static_cast<size_t>(p) * m + i];
                    bv = b[static_cast<size_t>(p) * n + j];
                }
                s += av * bv;
            }
            c[static_cast<size_t>(i) * n + j] = s;
        }
    }
}

void check_close(const std::vector<float>& got, const std::vector<double>& want, double tol) {
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) {
        const double scale = std::max({1.0, std::fabs(want[i]), std::fabs(double(got[i]))});
        CHECK(std::fabs(got[i] - want[i]) <= tol * scale);
    }
}

}  // namespace

TEST_CASE("gemm variants match a double-precision reference") {
    std::mt19937 rng(7);
    const int sizes[][3] = {{1, 1, 1}, {3, 5, 7}, {16, 121, 144}, {33, 9, 65}, {128, 100, 800}};
    for (auto& tbl : {kernels::scalar_ops(), kernels::active()}) {
        for (const auto& s : sizes) {
            const int m = s[0], n = s[1], k = s[2];
            for (char mode : {'t', 'n', 'x'}) {
                const auto a = random_vec(static_cast<size_t>(m) * k, rng);
                const auto b = random_vec(static_cast<size_t>(k) * n, rng);
                std::vector<float> c(static_cast<size_t>(m) * n, 0.0f);
                std::vector<double> want;
                if (mode == 't') {
                    const auto bt = random_vec(static_cast<size_t>(n) * k, rng);
                    ref_gemm(a, bt, want, m, n, k, 't');
                    tbl.gemm_nt(a.data(), bt.data(), c.data(), m, n, k, false);
                } else if (mode == 'n') {
                    ref_gemm(a, b, want, m, n, k, 'n');
                    tbl.gemm_nn(a.data(), b.data(), c.data(), m, n, k, false);
                } else {
                    const auto at = random_vec(static_cast<size_t>(k) * m, rng);
                    ref_gemm(at, b, want, m, n, k, 'x');
                    tbl.gemm_tn(at.data(), b.data(), c.data(), m, n, k, false);
                }
                check_close(c, want, 1e-4);
            }
        }
    }
}

TEST_CASE("gemm accumulate adds onto existing output") {
    std::mt19937 rng(11);
    const int m = 7, n = 13, k = 21;
    const auto a = random_vec(static_cast<size_t>(m) * k, rng);
    const auto b = random_vec(static_cast<size_t>(n) * k, rng);
    for (auto& tbl : {kernels::scalar_ops(), kernels::active()}) {
        std::vector<float> once(static_cast<size_t>(m) * n, 0.0f);
        tbl.gemm_nt(a.data(), b.data(), once.data(), m, n, k, false);
        std::vector<float> twice = once;
        tbl.gemm_nt(a.data(), b.data(), twice.data(), m, n, k, true);
        for (size_t i = 0; i < once.size(); ++i)
            CHECK(twice[i] == doctest::Approx(2.0f * once[i]).epsilon(1e-5));
    }
}

TEST_CASE("avx2 table agrees with the scalar reference on every kernel") {
    if (!kernels::avx2_available()) {
        MESSAGE("avx2 unavailable, dispatch equivalence skipped");
        return;
    }
    const auto& sc = kernels::scalar_ops();
    const auto& vx = kernels::avx2_ops();
    std::mt19937 rng(23);

    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> dim(1, 90);
        const int m = dim(rng), n = dim(rng), k = dim(rng);
        const auto a = random_vec(static_cast<size_t>(m) * k, rng);
        const auto bt = random_vec(static_cast<size_t>(n) * k, rng);
        std::vector<float> c0(static_cast<size_t>(m) * n), c1(c0.size());
        sc.gemm_nt(a.data(), bt.data(), c0.data(), m, n, k, false);
        vx.gemm_nt(a.data(), bt.data(), c1.data(), m, n, k, false);
        for (size_t i = 0; i < c0.size(); ++i)
            CHECK(c1[i] == doctest::Approx(c0[i]).epsilon(1e-5));
    }

    const int n = 1003;  // odd length exercises the tails
    const auto x = random_vec(static_cast<size_t>(n), rng);
    const auto dy = random_vec(static_cast<size_t>(n), rng);
    std::vector<float> y0(n), y1(n);

    sc.relu_fwd(x.data(), y0.data(), n);
    vx.relu_fwd(x.data(), y1.data(), n);
    CHECK(y0 == y1);

    sc.relu_bwd(x.data(), dy.data(), y0.data(), n);
    vx.relu_bwd(x.data(), dy.data(), y1.data(), n);
    CHECK(y0 == y1);

    sc.sigmoid_fwd(x.data(), y0.data(), n);
    vx.sigmoid_fwd(x.data(), y1.data(), n);
    for (int i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y0[i]).epsilon(1e-6));

    sc.sigmoid_bwd(y0.data(), dy.data(), y0.data(), n);
    vx.sigmoid_bwd(y1.data(), dy.data(), y1.data(), n);
    for (int i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y0[i]).epsilon(1e-5));

    std::vector<float> rows0 = random_vec(static_cast<size_t>(7) * 33, rng), rows1 = rows0;
    const auto bias = random_vec(33, rng);
    sc.add_bias_rows(rows0.data(), bias.data(), 7, 33);
    vx.add_bias_rows(rows1.data(), bias.data(), 7, 33);
    CHECK(rows0 == rows1);

    // SGD update: several steps with shared inputs stay within float noise.
    std::vector<float> w0 = random_vec(static_cast<size_t>(n), rng), w1 = w0;
    std::vector<float> v0(n, 0.0f), v1(n, 0.0f);
    for (int s = 0; s < 5; ++s) {
        const auto g = random_vec(static_cast<size_t>(n), rng);
        sc.sgd_update(w0.data(), g.data(), v0.data(), nullptr, n, 0.1f, 0.9f, true, 5e-4f);
        vx.sgd_update(w1.data(), g.data(), v1.data(), nullptr, n, 0.1f, 0.9f, true, 5e-4f);
    }
    for (int i = 0; i < n; ++i) CHECK(w1[i] == doctest::Approx(w0[i]).epsilon(1e-4));
}

TEST_CASE("masked sgd update pins weights to zero and skips their state") {
    for (auto& tbl : {kernels::scalar_ops(), kernels::active()}) {
        std::vector<float> w{1.0f, -2.0f, 3.0f, -4.0f};
        std::vector<float> g{0.5f, 0.5f, 0.5f, 0.5f};
        std::vector<float> v(4, 0.0f);
        std::vector<uint8_t> mask{1, 0, 1, 0};
        w[1] = w[3] = 0.0f;
        for (int s = 0; s < 3; ++s)
            tbl.sgd_update(w.data(), g.data(), v.data(), mask.data(), 4, 0.1f, 0.9f, true, 1e-4f);
        CHECK(w[1] == 0.0f);
        CHECK(w[3] == 0.0f);
        CHECK(v[1] == 0.0f);
        CHECK(v[3] == 0.0f);
        CHECK(w[0] != 1.0f);
        CHECK(w[2] != 3.0f);
    }
}

TEST_CASE("backend selection") {
    CHECK(std::string(kernels::scalar_ops().name) == "scalar");
    kernels::select(kernels::Backend::kScalar);
    CHECK(std::string(kernels::active().name) == "scalar");
    kernels::select(kernels::Backend::kAuto);
    if (kernels::avx2_available()) CHECK(std::string(kernels::active().name) == "avx2");
    CHECK_THROWS(kernels::parse_backend("neon"));
}
