#include <cmath>

#include "bsde/errors.hpp"
#include "bsde/expectation.hpp"

namespace bsde {

StepExpectations grid_quadrature_step(const FbsdeProblem& p, const StateFunctional& F, double x, double delta,
                                      const GaussHermiteRule& rule) {
    if (!p.transition_increment_only)
        throw InvalidArgument("grid backend needs a transition driven by the increment only");
    if (!(delta > 0.0)) throw InvalidArgument("grid step needs delta > 0");
    const std::size_t n = rule.nodes.size();
    const double sd = std::sqrt(delta);
    auto eval = [&](std::size_t k) {
        double v = F(exact_transition(p, x, delta, sd * rule.nodes[k]));
        if (!std::isfinite(v)) throw NumericalError("non-finite value at a quadrature node");
        return v;
    };
    // Mirror pairs are summed together so odd moments of constants cancel exactly.
    double plain = 0.0, weighted = 0.0;
    for (std::size_t k = 0; k < n / 2; ++k) {
        std::size_t kk = n - 1 - k;
        double a = eval(k), b = eval(kk);
        plain += rule.weights[k] * (a + b);
        weighted += rule.weights[k] * (a * rule.nodes[k] + b * rule.nodes[kk]);
    }
    if (n % 2 == 1) plain += rule.weights[n / 2] * eval(n / 2);
    StepExpectations out;
    out.plain = plain;
    out.euler_weighted = weighted / sd;
    // E[J | dW] = (delta/2) dW collapses Z to dW/delta.
    out.second_order_weighted = out.euler_weighted;
    return out;
}

StepExpectations grid_quadrature_step(const FbsdeProblem& p, const StateFunctional& F, double x, double delta,
                                      int order) {
    if (order < 2) throw InvalidArgument("quadrature order must be >= 2");
    return grid_quadrature_step(p, F, x, delta, gauss_hermite(order));
}

WeightMoments grid_weight_moments(double delta, int order) {
    if (!(delta > 0.0)) throw InvalidArgument("weight moments need delta > 0");
    auto rule = gauss_hermite(order);
    WeightMoments m;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        double dw = std::sqrt(delta) * rule.nodes[k];
        // E[Z dW | dW] = dW^2/delta,  E[Z J | dW] = dW^2/2 - delta/2
        m.zw += rule.weights[k] * dw * dw / delta;
        m.zj += rule.weights[k] * (0.5 * dw * dw - 0.5 * delta);
    }
    return m;
}

McStepExpectations mc_step_expectations(const FbsdeProblem& p, const StateFunctional& F, double x,
                                        double delta, std::size_t samples, std::uint64_t seed) {
    if (samples < 1000) throw InvalidArgument("Monte Carlo step needs at least 1000 samples");
    IncrementSampler sampler({delta, 1}, seed);
    double s[3] = {0, 0, 0}, ss[3] = {0, 0, 0};
    double dw, j;
    for (std::size_t k = 0; k < samples; ++k) {
        sampler.draw({&dw, 1}, {&j, 1});
        double v = F(exact_transition(p, x, delta, dw));
        if (!std::isfinite(v)) throw NumericalError("non-finite value in Monte Carlo step");
        double terms[3] = {v, v * dw / delta, v * (4.0 * dw / delta - 6.0 * j / (delta * delta))};
        for (int c = 0; c < 3; ++c) {
            s[c] += terms[c];
            ss[c] += terms[c] * terms[c];
        }
    }
    double N = static_cast<double>(samples);
    double mean[3], se[3];
    for (int c = 0; c < 3; ++c) {
        mean[c] = s[c] / N;
        double var = std::max(0.0, (ss[c] - N * mean[c] * mean[c]) / (N - 1.0));
        se[c] = std::sqrt(var / N);
    }
    return {{mean[0], mean[1], mean[2]}, {se[0], se[1], se[2]}};
}

McWeightMoments mc_weight_moments(const IncrementLaw& law, std::size_t samples, std::uint64_t seed) {
    const int d = law.d;
    const double delta = law.delta;
    IncrementSampler sampler(law, seed);
    std::vector<double> dw(d), j(d), z(d);
    std::vector<double> s1(d * d, 0.0), q1(d * d, 0.0), s2(d * d, 0.0), q2(d * d, 0.0);
    for (std::size_t k = 0; k < samples; ++k) {
        sampler.draw(dw, j);
        for (int l = 0; l < d; ++l) z[l] = 4.0 * dw[l] / delta - 6.0 * j[l] / (delta * delta);
        for (int l = 0; l < d; ++l) {
            for (int q = 0; q < d; ++q) {
                double a = z[l] * dw[q], b = z[l] * j[q];
                s1[l * d + q] += a;
                q1[l * d + q] += a * a;
                s2[l * d + q] += b;
                q2[l * d + q] += b * b;
            }
        }
    }
    McWeightMoments out;
    out.d = d;
    const double N = static_cast<double>(samples);
    auto fin = [N](double s, double q, double& mean, double& se) {
        mean = s / N;
        se = std::sqrt(std::max(0.0, (q - N * mean * mean) / (N - 1.0)) / N);
    };
    out.zw.resize(d * d);
    out.zw_se.resize(d * d);
    out.zj.resize(d * d);
    out.zj_se.resize(d * d);
    for (int c = 0; c < d * d; ++c) {
        fin(s1[c], q1[c], out.zw[c], out.zw_se[c]);
        fin(s2[c], q2[c], out.zj[c], out.zj_se[c]);
    }
    return out;
}

}  // namespace bsde
