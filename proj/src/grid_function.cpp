#include <algorithm>
#include <cmath>

#include "bsde/errors.hpp"
#include "bsde/expectation.hpp"

namespace bsde {

GridFunction::GridFunction(std::vector<double> nodes, std::vector<double> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
    const std::size_t n = nodes_.size();
    if (n < 2 || values_.size() != n) throw InvalidArgument("grid function needs >= 2 nodes and matching values");
    for (std::size_t i = 1; i < n; ++i)
        if (!(nodes_[i] > nodes_[i - 1])) throw InvalidArgument("grid nodes must be strictly increasing");
    // Natural end conditions; tridiagonal system for the interior second derivatives.
    m_.assign(n, 0.0);
    if (n == 2) return;
    std::vector<double> c(n, 0.0), r(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double h0 = nodes_[i] - nodes_[i - 1];
        double h1 = nodes_[i + 1] - nodes_[i];
        double a = h0 / 6.0, b = (h0 + h1) / 3.0, cc = h1 / 6.0;
        double rhs = (values_[i + 1] - values_[i]) / h1 - (values_[i] - values_[i - 1]) / h0;
        double denom = b - a * c[i - 1];
        c[i] = cc / denom;
        r[i] = (rhs - a * r[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 1;) m_[i] = r[i] - c[i] * m_[i + 1];
}

double GridFunction::operator()(double x) const {
    if (!(x > nodes_.front())) return values_.front();
    if (!(x < nodes_.back())) return values_.back();
    std::size_t k = static_cast<std::size_t>(std::upper_bound(nodes_.begin(), nodes_.end(), x) - nodes_.begin());
    std::size_t lo = k - 1;
    double h = nodes_[k] - nodes_[lo];
    double a = (nodes_[k] - x) / h;
    double b = 1.0 - a;
    return a * values_[lo] + b * values_[k] +
           ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[k]) * h * h / 6.0;
}

}  // namespace bsde
