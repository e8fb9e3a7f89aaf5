#include <algorithm>
#include <cmath>
#include <numeric>

#include "bsde/errors.hpp"
#include "bsde/expectation.hpp"

namespace bsde {

// Newton iteration on normalized physicists' Hermite polynomials, then rescaled
// to the standard normal weight.
GaussHermiteRule gauss_hermite(int n) {
    if (n < 1 || n > 200) throw InvalidArgument("Gauss-Hermite order must be in [1, 200]");
    const double pim4 = 0.7511255444649425;  // pi^{-1/4}
    std::vector<double> x(n), w(n);
    const int m = (n + 1) / 2;
    double z = 0.0, pp = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1) - 1.85575 * std::pow(2.0 * n + 1, -0.16667);
        } else if (i == 1) {
            z -= 1.14 * std::pow(n, 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * x[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * x[1];
        } else {
            z = 2.0 * z - x[i - 2];
        }
        int it = 0;
        for (; it < 100; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * (1.0 + std::abs(z))) break;
        }
        if (it == 100) throw NumericalError("Gauss-Hermite Newton iteration did not converge");
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = w[n - 1 - i] = 2.0 / (pp * pp);
    }
    if (n % 2 == 1) x[m - 1] = 0.0;
    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double s2 = std::sqrt(2.0), spi = std::sqrt(M_PI);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = -s2 * x[i];
        rule.weights[i] = w[i] / spi;
    }
    double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
    for (auto& v : rule.weights) v /= total;
    return rule;
}

}  // namespace bsde
