#include "stm/simd/kernels.hpp"

#include <immintrin.h>

#include <array>

namespace stm::simd::avx2 {

namespace {

// e^x for |x| <= ~708: x = n ln2 + r, |r| <= ln2/2, Taylor polynomial of
// degree 13 in r, then scale by 2^n through the exponent field.
inline __m256d exp_pd(__m256d x)
{
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
    const __m256d magic = _mm256_set1_pd(6755399441055744.0); // 1.5 * 2^52

    const __m256d t = _mm256_fmadd_pd(x, log2e, magic);
    const __m256d n = _mm256_sub_pd(t, magic);
    __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
    r = _mm256_fnmadd_pd(n, ln2_lo, r);

    static constexpr std::array<double, 14> c = {
        1.0,
        1.0,
        1.0 / 2,
        1.0 / 6,
        1.0 / 24,
        1.0 / 120,
        1.0 / 720,
        1.0 / 5040,
        1.0 / 40320,
        1.0 / 362880,
        1.0 / 3628800,
        1.0 / 39916800,
        1.0 / 479001600,
        1.0 / 6227020800,
    };
    __m256d p = _mm256_set1_pd(c[13]);
    for (int k = 12; k >= 0; --k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[static_cast<std::size_t>(k)]));

    const __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(t), _mm256_castpd_si256(magic));
    const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

inline double hsum(__m256d v)
{
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

} // namespace

ExpMoments exp_moments(std::span<const double> m, std::span<const double> u, double gamma, double cap,
                       std::span<double> load)
{
    const std::size_t n = m.size();
    const bool want_load = !load.empty();
    const __m256d g = _mm256_set1_pd(gamma);
    const __m256d capv = _mm256_set1_pd(cap);
    __m256d acc_e = _mm256_setzero_pd();
    __m256d acc_u2e = _mm256_setzero_pd();
    __m256i acc_cap = _mm256_setzero_si256();

    auto block = [&](__m256d mv, __m256d uv, double* load_out) {
        const __m256d u2 = _mm256_mul_pd(uv, uv);
        const __m256d x = _mm256_mul_pd(g, u2);
        const __m256d over = _mm256_cmp_pd(x, capv, _CMP_GT_OQ);
        acc_cap = _mm256_sub_epi64(acc_cap, _mm256_castpd_si256(over)); // mask lanes are -1
        const __m256d e = _mm256_mul_pd(mv, exp_pd(_mm256_min_pd(x, capv)));
        acc_e = _mm256_add_pd(acc_e, e);
        acc_u2e = _mm256_fmadd_pd(e, u2, acc_u2e);
        if (load_out) _mm256_storeu_pd(load_out, _mm256_mul_pd(e, uv));
    };

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        block(_mm256_loadu_pd(m.data() + i), _mm256_loadu_pd(u.data() + i), want_load ? load.data() + i : nullptr);
    if (i < n) {
        // Zero-weight padding contributes nothing and never exceeds the cap.
        alignas(32) std::array<double, 4> mt{}, ut{}, lt{};
        for (std::size_t k = 0; i + k < n; ++k) {
            mt[k] = m[i + k];
            ut[k] = u[i + k];
        }
        block(_mm256_load_pd(mt.data()), _mm256_load_pd(ut.data()), lt.data());
        if (want_load)
            for (std::size_t k = 0; i + k < n; ++k) load[i + k] = lt[k];
    }

    alignas(32) std::array<long long, 4> caps{};
    _mm256_store_si256(reinterpret_cast<__m256i*>(caps.data()), acc_cap);
    ExpMoments out;
    out.sum_exp = hsum(acc_e);
    out.sum_u2exp = hsum(acc_u2e);
    out.capped = static_cast<std::size_t>(caps[0] + caps[1] + caps[2] + caps[3]);
    return out;
}

double dot(std::span<const double> a, std::span<const double> b)
{
    const std::size_t n = a.size();
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

} // namespace stm::simd::avx2
