#include "stm/simd/kernels.hpp"

#include <cmath>

namespace stm::simd::scalar {

ExpMoments exp_moments(std::span<const double> m, std::span<const double> u, double gamma, double cap,
                       std::span<double> load)
{
    ExpMoments out;
    const bool want_load = !load.empty();
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double u2 = u[i] * u[i];
        double x = gamma * u2;
        if (x > cap) {
            x = cap;
            ++out.capped;
        }
        const double e = m[i] * std::exp(x);
        out.sum_exp += e;
        out.sum_u2exp += e * u2;
        if (want_load) load[i] = e * u[i];
    }
    return out;
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace stm::simd::scalar
