#include "bsde/strat.hpp"

#include <cmath>
#include <limits>

#include "bsde/errors.hpp"

namespace bsde {

Norms norms(const MultiIndex& a) {
    int zeros = 0;
    for (int letter : a) zeros += (letter == 0);
    return {static_cast<int>(a.size()), static_cast<int>(a.size()) + zeros};
}

MultiIndex left_remove(const MultiIndex& a) {
    if (a.empty()) throw InvalidArgument("left_remove of the empty word");
    return MultiIndex(a.begin() + 1, a.end());
}

MultiIndex right_remove(const MultiIndex& a) {
    if (a.empty()) throw InvalidArgument("right_remove of the empty word");
    return MultiIndex(a.begin(), a.end() - 1);
}

std::string to_string(const MultiIndex& a) {
    std::string s = "(";
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (k) s += ",";
        s += std::to_string(a[k]);
    }
    return s + ")";
}

IndexSet hierarchical_set(int m, int d) {
    if (m < 0 || d < 1) throw InvalidArgument("hierarchical_set needs m >= 0 and d >= 1");
    if (m > kMaxEnumWeight || d > kMaxEnumDim)
        throw InvalidArgument("hierarchical_set is limited to weight <= 8 and d <= 2");
    IndexSet out{MultiIndex{}};
    std::vector<MultiIndex> frontier{MultiIndex{}};
    while (!frontier.empty()) {
        std::vector<MultiIndex> next;
        for (const auto& w : frontier) {
            for (int letter = 0; letter <= d; ++letter) {
                MultiIndex v = w;
                v.push_back(letter);
                if (weight(v) <= m) {
                    out.insert(v);
                    next.push_back(std::move(v));
                }
            }
        }
        frontier = std::move(next);
    }
    return out;
}

IndexSet remainder_set(const IndexSet& G, int d) {
    IndexSet out;
    for (const auto& a : G) {
        for (int letter = 0; letter <= d; ++letter) {
            MultiIndex b{letter};
            b.insert(b.end(), a.begin(), a.end());
            if (!G.count(b)) out.insert(std::move(b));
        }
    }
    return out;
}

bool is_hierarchical(const IndexSet& G) {
    for (const auto& a : G) {
        if (a.empty()) continue;
        if (!G.count(left_remove(a))) return false;
    }
    return true;
}

bool block_decomposable(const MultiIndex& a) {
    std::size_t i = 0;
    while (i < a.size()) {
        if (a[i] == 0) {
            ++i;
        } else if (i + 1 < a.size() && a[i + 1] == a[i]) {
            i += 2;
        } else {
            return false;
        }
    }
    return true;
}

double expected_iterated_integral(const MultiIndex& a, double t) {
    if (t < 0.0) throw InvalidArgument("expected_iterated_integral needs t >= 0");
    auto [r, m] = norms(a);
    if (m % 2 != 0 || !block_decomposable(a)) return 0.0;
    int half = m / 2;
    // 2^{r - m/2} (m/2)! is an integer; build it exactly before the single division.
    double denom = std::ldexp(1.0, r - half);
    for (int k = 2; k <= half; ++k) denom *= k;
    return std::pow(t, half) / denom;
}

PiecewiseLinearPath PiecewiseLinearPath::straight(double t0, double delta, std::vector<double> endpoint) {
    PiecewiseLinearPath p;
    p.d = static_cast<int>(endpoint.size());
    p.times = {t0, t0 + delta};
    p.values = {std::vector<double>(endpoint.size(), 0.0), std::move(endpoint)};
    return p;
}

PiecewiseLinearPath PiecewiseLinearPath::through(double t0, const std::vector<double>& knot_times,
                                                 const std::vector<std::vector<double>>& knot_values) {
    if (knot_times.size() != knot_values.size() || knot_times.empty())
        throw InvalidArgument("path knots and values differ in size");
    PiecewiseLinearPath p;
    p.d = static_cast<int>(knot_values.front().size());
    p.times.push_back(t0);
    p.values.push_back(std::vector<double>(p.d, 0.0));
    for (std::size_t k = 0; k < knot_times.size(); ++k) {
        p.times.push_back(t0 + knot_times[k]);
        p.values.push_back(knot_values[k]);
    }
    return p;
}

IncrementSampler::IncrementSampler(IncrementLaw law, std::uint64_t seed)
    : law_(law), gen_(seed), normal_(0.0, 1.0) {
    if (!(law.delta > 0.0)) throw InvalidArgument("increment law needs delta > 0");
}

void IncrementSampler::draw(std::span<double> dw, std::span<double> j) {
    const double sd = std::sqrt(law_.delta);
    const double sj = law_.delta * sd;
    const double c = 0.5 / std::sqrt(3.0);
    for (int l = 0; l < law_.d; ++l) {
        double z1 = normal_(gen_);
        double z2 = normal_(gen_);
        dw[l] = sd * z1;
        j[l] = sj * (0.5 * z1 + c * z2);
    }
}

IncrementSamples sample_increments(const IncrementLaw& law, std::uint64_t seed, std::size_t count) {
    IncrementSampler sampler(law, seed);
    IncrementSamples out;
    out.d = law.d;
    out.count = count;
    out.dw.resize(count * law.d);
    out.j.resize(count * law.d);
    for (std::size_t k = 0; k < count; ++k) {
        sampler.draw(std::span<double>(out.dw.data() + k * law.d, law.d),
                     std::span<double>(out.j.data() + k * law.d, law.d));
    }
    return out;
}

namespace {

double fd_step(double arg) {
    static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
    return h0 * (1.0 + std::abs(arg));
}

ScalarField apply_letter(int letter, ScalarField g, const VectorFields& V) {
    if (letter < 0 || letter >= static_cast<int>(V.v.size()))
        throw InvalidArgument("letter exceeds the number of vector fields");
    auto field = V.v[letter];
    if (letter == 0) {
        return [g, field](double t, double x) {
            double ht = fd_step(t), hx = fd_step(x);
            double gt = (g(t + ht, x) - g(t - ht, x)) / (2.0 * ht);
            double gx = (g(t, x + hx) - g(t, x - hx)) / (2.0 * hx);
            return gt + field(x) * gx;
        };
    }
    return [g, field](double t, double x) {
        double hx = fd_step(x);
        return field(x) * (g(t, x + hx) - g(t, x - hx)) / (2.0 * hx);
    };
}

}  // namespace

ScalarField apply_l_operator(const MultiIndex& a, ScalarField g, const VectorFields& V) {
    ScalarField out = std::move(g);
    for (auto it = a.rbegin(); it != a.rend(); ++it) out = apply_letter(*it, out, V);
    return out;
}

}  // namespace bsde
