#include <cmath>
#include <random>

#include "bsde/errors.hpp"
#include "bsde/harness.hpp"

namespace bsde {

McEstimate nested_mc_oracle(const FbsdeProblem& p, const Partition& pi, std::size_t paths, std::uint64_t seed) {
    if (paths < 10'000) throw InvalidArgument("nested Monte Carlo oracle needs at least 10^4 paths");
    double rate;
    switch (p.driver_class) {
        case DriverClass::zero: rate = 0.0; break;
        case DriverClass::linear_discount: rate = p.discount_rate; break;
        default: throw UnsupportedProblem("nested Monte Carlo oracle needs a zero or linear discount driver");
    }
    if (std::abs(pi.T() - p.T) > 1e-12 * p.T) throw InvalidArgument("partition horizon differs from the problem's");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    const std::size_t n = pi.n();
    double s = 0, s2 = 0;
    for (std::size_t k = 0; k < paths; ++k) {
        double x = p.x0;
        for (std::size_t i = 1; i <= n; ++i) {
            double delta = pi.delta(i);
            x = exact_transition(p, x, delta, std::sqrt(delta) * normal(gen));
        }
        double v = p.terminal(x);
        s += v;
        s2 += v * v;
    }
    const double M = static_cast<double>(paths);
    double mean = s / M;
    double se = std::sqrt(std::max(0.0, s2 / M - mean * mean) / (M - 1));
    double disc = std::exp(-rate * p.T);
    return {disc * mean, disc * se};
}

}  // namespace bsde
