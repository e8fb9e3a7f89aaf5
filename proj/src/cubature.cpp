#include <cmath>
#include <map>

#include "bsde/errors.hpp"
#include "bsde/expectation.hpp"

namespace bsde {

namespace {

constexpr double kWeightTol = 1e-10;

PathVariant straight(double theta, double delta) {
    return {1.0, PiecewiseLinearPath::straight(0.0, delta, {theta})};
}

CubatureChild child(double weight, double theta, std::vector<PathVariant> paths) {
    return {weight, theta, std::move(paths)};
}

// Loop returning to 0: up to h at fraction a of the step, back to 0 at fraction b.
PathVariant loop(double share, double h, double a, double b, double delta) {
    std::vector<double> times{a * delta, b * delta};
    std::vector<std::vector<double>> vals{{h}, {0.0}};
    if (b < 1.0) {
        times.push_back(delta);
        vals.push_back({0.0});
    }
    return {share, PiecewiseLinearPath::through(0.0, times, vals)};
}

}  // namespace

CertificationResult certify(const CubatureFormula& f, int max_weight, double tol) {
    CertificationResult res;
    auto words = hierarchical_set(max_weight, 1);
    std::vector<MultiIndex> list(words.begin(), words.end());
    std::vector<double> acc(list.size(), 0.0);
    SignatureAccumulator sig(list, 1);
    for (const auto& c : f.children) {
        for (const auto& v : c.paths) {
            sig.reset();
            sig.add_path(v.path, v.path.times.front(), v.path.times.back());
            for (std::size_t k = 0; k < list.size(); ++k) acc[k] += c.weight * v.weight * sig.value(k);
        }
    }
    for (std::size_t k = 0; k < list.size(); ++k) {
        double err = std::abs(acc[k] - expected_iterated_integral(list[k], f.delta));
        res.max_error = std::max(res.max_error, err);
        if (err > tol) {
            res.passed = false;
            res.failures.push_back(list[k]);
        }
    }
    return res;
}

WeightMoments cubature_weight_moments(const CubatureFormula& f) {
    WeightMoments m;
    const double d = f.delta;
    for (const auto& c : f.children) {
        for (const auto& v : c.paths) {
            double w1 = pathwise_integral({1}, v.path);
            double j01 = pathwise_integral({0, 1}, v.path);
            double z = 4.0 * w1 / d - 6.0 * j01 / (d * d);
            m.zw += c.weight * v.weight * z * w1;
            m.zj += c.weight * v.weight * z * j01;
        }
    }
    return m;
}

std::vector<CubatureFormula> cubature_candidates(int degree, double delta) {
    if (!(delta > 0.0)) throw InvalidArgument("cubature needs delta > 0");
    std::vector<CubatureFormula> out;
    if (degree == 3) {
        const double s = std::sqrt(delta);
        out.push_back({3, delta, "straight two-point",
                       {child(0.5, -s, {straight(-s, delta)}), child(0.5, s, {straight(s, delta)})}});
        // Early and late rises keep E[J^(0,1) dW] = delta^2/2 and lift E[(J^(0,1))^2] to delta^3/3.
        const double tau = 1.0 - 1.0 / std::sqrt(3.0);
        auto bent = [&](double theta) {
            std::vector<PathVariant> v;
            v.push_back({0.5, PiecewiseLinearPath::through(0.0, {tau * delta, delta}, {{theta}, {theta}})});
            v.push_back({0.5, PiecewiseLinearPath::through(0.0, {(1.0 - tau) * delta, delta}, {{0.0}, {theta}})});
            return v;
        };
        out.push_back({3, delta, "two-point, early/late rise", {child(0.5, -s, bent(-s)), child(0.5, s, bent(s))}});
    } else if (degree == 5) {
        const double s = std::sqrt(3.0 * delta);
        out.push_back({5, delta, "straight three-point",
                       {child(1.0 / 6, -s, {straight(-s, delta)}), child(2.0 / 3, 0.0, {straight(0.0, delta)}),
                        child(1.0 / 6, s, {straight(s, delta)})}});
        const double a = 0.5 * std::sqrt(3.0 * delta);
        out.push_back({5, delta, "three-point, symmetric tent loops",
                       {child(1.0 / 6, -s, {straight(-s, delta)}),
                        child(2.0 / 3, 0.0, {loop(0.5, -a, 0.5, 1.0, delta), loop(0.5, a, 0.5, 1.0, delta)}),
                        child(1.0 / 6, s, {straight(s, delta)})}});
        const double h = std::sqrt(9.0 * delta / 8.0);
        out.push_back({5, delta, "three-point, early loops",
                       {child(1.0 / 6, -s, {straight(-s, delta)}),
                        child(2.0 / 3, 0.0,
                              {loop(0.5, -h, 1.0 / 3, 2.0 / 3, delta), loop(0.5, h, 1.0 / 3, 2.0 / 3, delta)}),
                        child(1.0 / 6, s, {straight(s, delta)})}});
    } else {
        throw InvalidArgument("cubature degree must be 3 or 5");
    }
    return out;
}

CubatureFormula cubature_formula(int degree, double delta) {
    for (auto& f : cubature_candidates(degree, delta)) {
        if (!certify(f, degree).passed) continue;
        auto m = cubature_weight_moments(f);
        if (std::abs(m.zw - 1.0) > kWeightTol || std::abs(m.zj) > kWeightTol) continue;
        return f;
    }
    throw NumericalError("no cubature construction passed certification");
}

CubatureTree::CubatureTree(const FbsdeProblem& p, const Partition& pi, int degree, std::size_t budget)
    : pi_(pi), degree_(degree) {
    if (p.d != 1) throw InvalidArgument("cubature tree supports d = 1 only");
    if (degree != 3 && degree != 5) throw InvalidArgument("cubature degree must be 3 or 5");
    branching_ = degree == 3 ? 2 : 3;
    const std::size_t n = pi.n();
    std::size_t total = 0, width = 1;
    for (std::size_t i = 0; i <= n; ++i) {
        total += width;
        if (total > budget)
            throw ResourceError("cubature tree with n = " + std::to_string(n) + " exceeds the node budget",
                                static_cast<int>(n));
        width *= branching_;
    }
    std::map<double, std::size_t> by_delta;
    for (std::size_t i = 0; i < n; ++i) {
        double delta = pi.delta(i + 1);
        auto it = by_delta.find(delta);
        if (it != by_delta.end()) {
            formulas_.push_back(formulas_[it->second]);
            weights_.push_back(weights_[it->second]);
            continue;
        }
        by_delta[delta] = i;
        formulas_.push_back(cubature_formula(degree, delta));
        std::vector<ChildWeights> cw;
        for (const auto& c : formulas_.back().children) {
            double z = 0.0;
            for (const auto& v : c.paths) {
                double w1 = pathwise_integral({1}, v.path);
                double j01 = pathwise_integral({0, 1}, v.path);
                z += v.weight * (4.0 * w1 / delta - 6.0 * j01 / (delta * delta));
            }
            cw.push_back({c.increment / delta, z});
        }
        weights_.push_back(std::move(cw));
    }
    levels_.resize(n + 1);
    levels_[0].push_back({p.x0, 1.0, -1});
    for (std::size_t i = 0; i < n; ++i) {
        const auto& f = formulas_[i];
        auto& next = levels_[i + 1];
        next.reserve(levels_[i].size() * branching_);
        for (const auto& parent : levels_[i]) {
            for (int c = 0; c < branching_; ++c) {
                const auto& ch = f.children[c];
                next.push_back({exact_transition(p, parent.state, f.delta, ch.increment), parent.weight * ch.weight, c});
            }
        }
    }
}

const std::vector<PathVariant>& CubatureTree::path_segment(std::size_t i, std::size_t j) const {
    if (i == 0) throw InvalidArgument("the root has no incoming path");
    return formulas_[i - 1].children[levels_[i][j].rank].paths;
}

std::size_t CubatureTree::total_nodes() const {
    std::size_t total = 0;
    for (const auto& l : levels_) total += l.size();
    return total;
}

StepExpectations tree_step_expectations(const CubatureTree& tree, std::size_t i, std::size_t j,
                                        const StateFunctional& F) {
    if (i >= tree.partition().n()) throw InvalidArgument("leaf nodes have no children");
    const auto& f = tree.formula(i);
    const auto& cw = tree.child_weights(i);
    const std::size_t b = tree.branching();
    StepExpectations out;
    for (std::size_t c = 0; c < b; ++c) {
        double v = F(tree.node(i + 1, j * b + c).state);
        double w = f.children[c].weight;
        out.plain += w * v;
        out.euler_weighted += w * v * cw[c].euler;
        out.second_order_weighted += w * v * cw[c].second_order;
    }
    return out;
}

}  // namespace bsde
