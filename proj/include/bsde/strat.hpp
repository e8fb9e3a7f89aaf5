#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace bsde {

/// Word over {0, 1, ..., d}; letter 0 stands for the time integral.
using MultiIndex = std::vector<int>;
using IndexSet = std::set<MultiIndex>;

struct Norms {
    int length;
    int weight;
};

Norms norms(const MultiIndex& a);
inline int weight(const MultiIndex& a) { return norms(a).weight; }
MultiIndex left_remove(const MultiIndex& a);
MultiIndex right_remove(const MultiIndex& a);
std::string to_string(const MultiIndex& a);

constexpr int kMaxEnumWeight = 8;
constexpr int kMaxEnumDim = 2;

/// All words with weight <= m over {0..d}.
IndexSet hierarchical_set(int m, int d);
/// {b not in G : -b in G}, straight from the definition.
IndexSet remainder_set(const IndexSet& G, int d);
bool is_hierarchical(const IndexSet& G);

/// True when the word splits into blocks (0) and (j,j), j >= 1.
bool block_decomposable(const MultiIndex& a);
/// E[J_a[1]_{0,t}] for the Stratonovich/Lebesgue iterated integral.
double expected_iterated_integral(const MultiIndex& a, double t);

/// Continuous piecewise-linear path in R^d, started at 0. Coordinate 0 is time.
struct PiecewiseLinearPath {
    int d = 1;
    std::vector<double> times;                ///< breakpoints, increasing
    std::vector<std::vector<double>> values;  ///< values[k][l-1] = omega^l(times[k])

    std::size_t segments() const { return times.empty() ? 0 : times.size() - 1; }
    double end_value(int l) const { return values.back()[l - 1]; }

    static PiecewiseLinearPath straight(double t0, double delta, std::vector<double> endpoint);
    /// Path through the given interior knots (times relative to t0), ending at endpoint.
    static PiecewiseLinearPath through(double t0, const std::vector<double>& knot_times,
                                       const std::vector<std::vector<double>>& knot_values);
};

/// Iterated integrals of a fixed word list along concatenated linear segments
/// (Chen's relation). Prefixes of every word are tracked internally.
class SignatureAccumulator {
public:
    SignatureAccumulator(const std::vector<MultiIndex>& words, int d);

    void reset();
    /// increments[0] = dt, increments[l] = d omega^l.
    void add_segment(std::span<const double> increments);
    void add_path(const PiecewiseLinearPath& path, double s, double t);
    double value(std::size_t word) const { return values_[word_slot_[word]]; }

private:
    struct Entry {
        MultiIndex letters;
        std::vector<std::size_t> prefix;  ///< slot of letters[:k], k = 0..len-1
    };
    int d_;
    std::vector<Entry> entries_;  ///< sorted by decreasing length
    std::vector<double> values_;
    std::vector<std::size_t> word_slot_;
    std::vector<double> suffix_;
};

double pathwise_integral(const MultiIndex& a, const PiecewiseLinearPath& path, double s, double t);
inline double pathwise_integral(const MultiIndex& a, const PiecewiseLinearPath& path) {
    return pathwise_integral(a, path, path.times.front(), path.times.back());
}

/// Joint law of (dW^l, J^{(0,l)}) over one step, J^{(0,l)} = int (s - t_i) dW^l_s.
struct IncrementLaw {
    double delta;
    int d = 1;

    double var_dw() const { return delta; }
    double cov_dw_j() const { return 0.5 * delta * delta; }
    double var_j() const { return delta * delta * delta / 3.0; }
};

struct IncrementSamples {
    int d = 1;
    std::size_t count = 0;
    std::vector<double> dw;  ///< count x d, row major
    std::vector<double> j;
    double dw_at(std::size_t k, int l) const { return dw[k * d + l]; }
    double j_at(std::size_t k, int l) const { return j[k * d + l]; }
};

class IncrementSampler {
public:
    IncrementSampler(IncrementLaw law, std::uint64_t seed);
    /// Fills dw[0..d) and j[0..d).
    void draw(std::span<double> dw, std::span<double> j);
    const IncrementLaw& law() const { return law_; }

private:
    IncrementLaw law_;
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_;
};

IncrementSamples sample_increments(const IncrementLaw& law, std::uint64_t seed, std::size_t count);

using ScalarField = std::function<double(double t, double x)>;

/// V[0] is the drift V_0, V[l] the l-th diffusion field; scalar state.
struct VectorFields {
    std::vector<std::function<double(double)>> v;
};

/// L^a g by nested central differences, h = eps^{1/3} (1 + |arg|).
ScalarField apply_l_operator(const MultiIndex& a, ScalarField g, const VectorFields& V);

}  // namespace bsde
