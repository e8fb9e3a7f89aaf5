#include <cmath>

#include "bsde/errors.hpp"
#include "bsde/schemes.hpp"

namespace bsde {

namespace {

// Grid in chart coordinates at time t. Problems with terminal kinks get a
// sinh-stretched grid around the kink while the smoothing width
// noise_scale * sqrt(T - t) is below a few grid spacings.
std::vector<double> chart_grid(const FbsdeProblem& p, const BackendConfig& cfg, double t) {
    const int N = cfg.grid_nodes;
    if (N < 5) throw InvalidArgument("grid needs at least 5 nodes");
    if (!(cfg.grid_width > 0.0)) throw InvalidArgument("grid width must be positive");
    const double center = p.chart.to(p.x0);
    const double L = cfg.grid_width * p.noise_scale * std::sqrt(p.T);
    const double h = 2.0 * L / (N - 1);
    std::vector<double> xi(N);
    for (int k = 0; k < N; ++k) xi[k] = -L + k * h;
    if (cfg.kink_adapted && !p.terminal_kinks.empty() && t < p.T) {
        double w = p.noise_scale * std::sqrt(p.T - t);
        double kink = p.chart.to(p.terminal_kinks.front()) - center;
        if (w < 8.0 * h && std::abs(kink) < L) {
            double a = std::asinh((-L - kink) / w), b = std::asinh((L - kink) / w);
            for (int k = 1; k < N - 1; ++k) xi[k] = kink + w * std::sinh(a + (b - a) * k / (N - 1));
        }
    }
    xi.front() = -L;
    xi.back() = L;
    for (auto& v : xi) v += center;
    return xi;
}

class GridBackend : public StepBackend {
public:
    GridBackend(const FbsdeProblem& p, const Partition& pi, const BackendConfig& cfg)
        : p_(p), pi_(pi), cfg_(cfg), rule_(gauss_hermite(cfg.quad_order)) {
        if (cfg.quad_order < 2) throw InvalidArgument("quadrature order must be >= 2");
        if (!p.transition_increment_only)
            throw InvalidArgument("grid backend needs a transition driven by the increment only");
    }

    std::vector<double> states(std::size_t i) const override {
        auto xi = chart_grid(p_, cfg_, pi_.t(i));
        for (auto& v : xi) v = p_.chart.from(v);
        return xi;
    }

    void step(std::size_t i, const Next& next, const Functional& G,
              std::vector<StepExpectations>& out) const override {
        auto xs = states(i);
        const double delta = pi_.delta(i + 1);
        out.resize(xs.size());
        auto F = [&](double xp) { return G(xp, next.y(xp), next.z(xp)); };
        for (std::size_t k = 0; k < xs.size(); ++k) out[k] = grid_quadrature_step(p_, F, xs[k], delta, rule_);
    }

protected:
    const FbsdeProblem& p_;
    Partition pi_;
    BackendConfig cfg_;
    GaussHermiteRule rule_;
};

// Grid representation with Monte Carlo increments shared across a slice.
// Antithetic pairs, then a linear map so the sample second moments of
// (dW, J) equal the exact ones.
class McBackend : public GridBackend {
public:
    McBackend(const FbsdeProblem& p, const Partition& pi, const BackendConfig& cfg) : GridBackend(p, pi, cfg) {
        if (cfg.mc_samples < 2) throw InvalidArgument("mc backend needs at least 2 samples");
    }

    void step(std::size_t i, const Next& next, const Functional& G,
              std::vector<StepExpectations>& out) const override {
        const double delta = pi_.delta(i + 1);
        std::vector<double> dw, j;
        samples(i, delta, dw, j);
        auto xs = states(i);
        out.resize(xs.size());
        const std::size_t M = dw.size();
        for (std::size_t k = 0; k < xs.size(); ++k) {
            double plain = 0, ew = 0, so = 0;
            for (std::size_t s = 0; s < M; s += 2) {
                double v[2];
                for (int a = 0; a < 2; ++a) {
                    double xp = exact_transition(p_, xs[k], delta, dw[s + a]);
                    v[a] = G(xp, next.y(xp), next.z(xp));
                    if (!std::isfinite(v[a])) throw NumericalError("non-finite value in Monte Carlo step");
                }
                plain += v[0] + v[1];
                ew += v[0] * dw[s] + v[1] * dw[s + 1];
                so += v[0] * (4.0 * dw[s] / delta - 6.0 * j[s] / (delta * delta)) +
                      v[1] * (4.0 * dw[s + 1] / delta - 6.0 * j[s + 1] / (delta * delta));
            }
            out[k] = {plain / M, ew / (M * delta), so / M};
        }
    }

private:
    void samples(std::size_t i, double delta, std::vector<double>& dw, std::vector<double>& j) const {
        const std::size_t half = (cfg_.mc_samples + 1) / 2;
        IncrementSampler sampler({delta, 1}, cfg_.seed + 0x9E3779B97F4A7C15ULL * (i + 1));
        dw.resize(2 * half);
        j.resize(2 * half);
        double s11 = 0, s12 = 0, s22 = 0;
        for (std::size_t s = 0; s < half; ++s) {
            sampler.draw({&dw[2 * s], 1}, {&j[2 * s], 1});
            dw[2 * s + 1] = -dw[2 * s];
            j[2 * s + 1] = -j[2 * s];
            s11 += 2 * dw[2 * s] * dw[2 * s];
            s12 += 2 * dw[2 * s] * j[2 * s];
            s22 += 2 * j[2 * s] * j[2 * s];
        }
        const double M = static_cast<double>(dw.size());
        s11 /= M;
        s12 /= M;
        s22 /= M;
        // A = chol(C) chol(S)^{-1}
        IncrementLaw law{delta, 1};
        double c11 = std::sqrt(law.var_dw()), c21 = law.cov_dw_j() / c11;
        double c22 = std::sqrt(law.var_j() - c21 * c21);
        double l11 = std::sqrt(s11), l21 = s12 / l11, l22 = std::sqrt(s22 - l21 * l21);
        double i11 = 1.0 / l11, i21 = -l21 / (l11 * l22), i22 = 1.0 / l22;
        double a11 = c11 * i11, a21 = c21 * i11 + c22 * i21, a22 = c22 * i22;
        for (std::size_t s = 0; s < dw.size(); ++s) {
            double w = dw[s], q = j[s];
            dw[s] = a11 * w;
            j[s] = a21 * w + a22 * q;
        }
    }
};

class TreeBackend : public StepBackend {
public:
    TreeBackend(const FbsdeProblem& p, const Partition& pi, const BackendConfig& cfg)
        : tree_(p, pi, cfg.kind == BackendKind::cubature3 ? 3 : 5, cfg.tree_budget) {}

    std::vector<double> states(std::size_t i) const override {
        std::vector<double> xs;
        xs.reserve(tree_.level_size(i));
        for (const auto& n : tree_.level(i)) xs.push_back(n.state);
        return xs;
    }

    void step(std::size_t i, const Next& next, const Functional& G,
              std::vector<StepExpectations>& out) const override {
        const std::size_t b = tree_.branching();
        const auto& f = tree_.formula(i);
        const auto& cw = tree_.child_weights(i);
        const auto& children = tree_.level(i + 1);
        out.resize(tree_.level_size(i));
        for (std::size_t j = 0; j < out.size(); ++j) {
            StepExpectations e;
            for (std::size_t c = 0; c < b; ++c) {
                std::size_t idx = j * b + c;
                double xp = children[idx].state;
                double y = next.y_values ? (*next.y_values)[idx] : next.y(xp);
                double z = next.z_values ? (*next.z_values)[idx] : next.z(xp);
                double v = G(xp, y, z);
                double w = f.children[c].weight;
                e.plain += w * v;
                e.euler_weighted += w * v * cw[c].euler;
                e.second_order_weighted += w * v * cw[c].second_order;
            }
            out[j] = e;
        }
    }

private:
    CubatureTree tree_;
};

}  // namespace

std::unique_ptr<StepBackend> make_backend(const FbsdeProblem& p, const Partition& pi, const BackendConfig& cfg) {
    switch (cfg.kind) {
        case BackendKind::grid:
            return std::make_unique<GridBackend>(p, pi, cfg);
        case BackendKind::mc:
            return std::make_unique<McBackend>(p, pi, cfg);
        case BackendKind::cubature3:
        case BackendKind::cubature5:
            return std::make_unique<TreeBackend>(p, pi, cfg);
    }
    throw InvalidArgument("unknown backend");
}

std::vector<double> default_probes(const FbsdeProblem& p, const BackendConfig& cfg, int count) {
    const double center = p.chart.to(p.x0);
    const double half = 0.5 * cfg.grid_width * p.noise_scale * std::sqrt(p.T);
    std::vector<double> out(count);
    for (int k = 0; k < count; ++k) {
        double xi = count == 1 ? center : center - half + 2.0 * half * k / (count - 1);
        out[k] = p.chart.from(xi);
    }
    return out;
}

}  // namespace bsde
