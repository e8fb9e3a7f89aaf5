#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bsde/mesh.hpp"
#include "bsde/problem.hpp"
#include "bsde/strat.hpp"

namespace bsde {

/// Natural cubic spline on sorted nodes, clamped to the boundary values outside.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(std::vector<double> nodes, std::vector<double> values);

    double operator()(double x) const;
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> nodes_;
    std::vector<double> values_;
    std::vector<double> m_;  ///< second derivatives
};

/// Gauss-Hermite rule for the standard normal law.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussHermiteRule gauss_hermite(int order);

struct StepExpectations {
    double plain = 0.0;
    double euler_weighted = 0.0;         ///< E[F dW] / delta
    double second_order_weighted = 0.0;  ///< E[F (4 dW/delta - 6 J/delta^2)]
};

using StateFunctional = std::function<double(double)>;

StepExpectations grid_quadrature_step(const FbsdeProblem& p, const StateFunctional& F, double x, double delta,
                                      const GaussHermiteRule& rule);
StepExpectations grid_quadrature_step(const FbsdeProblem& p, const StateFunctional& F, double x, double delta,
                                      int order);

struct WeightMoments {
    double zw = 0.0;  ///< E[Z dW]
    double zj = 0.0;  ///< E[Z J]
};

/// E[Z dW] and E[Z J] under the grid backend's model: Gauss-Hermite over dW with J
/// integrated through its conditional law given dW.
WeightMoments grid_weight_moments(double delta, int order);

// ---------------------------------------------------------------- cubature

struct PathVariant {
    double weight;  ///< share within the child, shares sum to 1
    PiecewiseLinearPath path;
};

struct CubatureChild {
    double weight;
    double increment;  ///< common endpoint of all variants
    std::vector<PathVariant> paths;
};

struct CubatureFormula {
    int degree = 5;
    double delta = 0.0;
    std::string construction;
    std::vector<CubatureChild> children;
};

struct CertificationResult {
    bool passed = true;
    double max_error = 0.0;
    std::vector<MultiIndex> failures;
};

/// One-step E_cub[J_a] against the exact expectation for every |a|_w <= max_weight.
CertificationResult certify(const CubatureFormula& f, int max_weight, double tol = 1e-12);
WeightMoments cubature_weight_moments(const CubatureFormula& f);

/// Candidate constructions in order of simplicity, without gating.
std::vector<CubatureFormula> cubature_candidates(int degree, double delta);
/// First candidate passing certification and the weight identities.
CubatureFormula cubature_formula(int degree, double delta);

struct CubatureNode {
    double state;
    double weight;
    int rank;  ///< index of the formula child leading here, -1 at the root
};

/// Complete (non-recombining) tree over a partition; children of node j at
/// level i are nodes j*b .. j*b+b-1 at level i+1.
class CubatureTree {
public:
    static constexpr std::size_t kDefaultBudget = 1'000'000;

    CubatureTree(const FbsdeProblem& p, const Partition& pi, int degree,
                 std::size_t budget = kDefaultBudget);

    int degree() const { return degree_; }
    int branching() const { return branching_; }
    const Partition& partition() const { return pi_; }
    std::size_t level_size(std::size_t i) const { return levels_[i].size(); }
    const CubatureNode& node(std::size_t i, std::size_t j) const { return levels_[i][j]; }
    const std::vector<CubatureNode>& level(std::size_t i) const { return levels_[i]; }
    /// Formula used on [t_i, t_{i+1}].
    const CubatureFormula& formula(std::size_t i) const { return formulas_[i]; }
    /// Path over the last interval leading to node (i, j), i >= 1.
    const std::vector<PathVariant>& path_segment(std::size_t i, std::size_t j) const;
    std::size_t total_nodes() const;

    /// Per-child (dW/delta, Z) weights on step i, from the pathwise integrals.
    struct ChildWeights {
        double euler;
        double second_order;
    };
    const std::vector<ChildWeights>& child_weights(std::size_t i) const { return weights_[i]; }

private:
    Partition pi_;
    int degree_;
    int branching_;
    std::vector<CubatureFormula> formulas_;
    std::vector<std::vector<ChildWeights>> weights_;
    std::vector<std::vector<CubatureNode>> levels_;
};

/// F evaluated on the children of node (i, j).
StepExpectations tree_step_expectations(const CubatureTree& tree, std::size_t i, std::size_t j,
                                        const StateFunctional& F);

// ---------------------------------------------------------------- Monte Carlo

struct McStepExpectations {
    StepExpectations mean;
    StepExpectations std_error;
};

McStepExpectations mc_step_expectations(const FbsdeProblem& p, const StateFunctional& F, double x,
                                        double delta, std::size_t samples, std::uint64_t seed);

/// Sample means of Z^l dW^q and Z^l J^q for l, q < d, with standard errors.
struct McWeightMoments {
    int d = 1;
    std::vector<double> zw, zw_se, zj, zj_se;  ///< d x d, row l
};

McWeightMoments mc_weight_moments(const IncrementLaw& law, std::size_t samples, std::uint64_t seed);

}  // namespace bsde
