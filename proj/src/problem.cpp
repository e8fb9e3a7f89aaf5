#include "bsde/problem.hpp"

#include <cmath>
#include <limits>

#include "bsde/errors.hpp"

namespace bsde {

const char* to_string(CorrectionSign s) { return s == CorrectionSign::plus ? "plus" : "minus"; }

double Chart::to(double x) const {
    if (kind == ChartKind::identity) return x;
    if (!(x > 0.0)) throw InvalidArgument("log chart needs positive states");
    return std::log(x);
}

double Chart::from(double xi) const { return kind == ChartKind::identity ? xi : std::exp(xi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ito_drift(const FbsdeProblem& p, double x, CorrectionSign sign) {
    double corr = 0.0;
    for (int j = 1; j <= p.d; ++j) {
        double dv;
        if (j < static_cast<int>(p.jacobians.size()) && p.jacobians[j]) {
            dv = p.jacobians[j](x);
        } else {
            double h = std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + std::abs(x));
            dv = (p.fields.v[j](x + h) - p.fields.v[j](x - h)) / (2.0 * h);
        }
        corr += dv * p.fields.v[j](x);
    }
    double s = sign == CorrectionSign::plus ? 0.5 : -0.5;
    return p.fields.v[0](x) + s * corr;
}

double exact_transition(const FbsdeProblem& p, double x, double delta, double dw) {
    if (delta < 0.0) throw InvalidArgument("transition needs delta >= 0");
    if (delta == 0.0) return x;
    return p.transition(x, delta, dw);
}

namespace {

using Params = std::map<std::string, double>;

double take(Params& left, const std::string& key, double fallback) {
    auto it = left.find(key);
    if (it == left.end()) return fallback;
    double v = it->second;
    left.erase(it);
    return v;
}

void common(FbsdeProblem& p, Params& left, double x0_default) {
    p.x0 = take(left, "x0", x0_default);
    p.T = take(left, "T", 1.0);
    if (!(p.T > 0.0)) throw InvalidArgument("T must be positive");
}

void brownian(FbsdeProblem& p) {
    p.fields.v = {[](double) { return 0.0; }, [](double) { return 1.0; }};
    p.jacobians = {[](double) { return 0.0; }, [](double) { return 0.0; }};
    p.transition = [](double x, double, double dw) { return x + dw; };
    p.chart = {ChartKind::identity};
    p.noise_scale = 1.0;
}

FbsdeProblem bm_linear(Params& left) {
    FbsdeProblem p;
    p.name = "bm_linear";
    common(p, left, 0.0);
    brownian(p);
    p.driver = [](double, double, double, double) { return 0.0; };
    p.lipschitz = 0.0;
    p.driver_class = DriverClass::zero;
    p.terminal = [](double x) { return x; };
    p.terminal_gradient = [](double) { return 1.0; };
    p.smoothness = Smoothness::C2_smooth;
    p.reference = Reference{[](double, double x) { return x; }, [](double, double) { return 1.0; }};
    return p;
}

FbsdeProblem manufactured_sin(Params& left) {
    FbsdeProblem p;
    p.name = "manufactured_sin";
    double a = take(left, "a", 1.0);
    double b = take(left, "b", 1.0);
    common(p, left, 1.0);
    brownian(p);
    const double T = p.T;
    p.params["a"] = a;
    p.params["b"] = b;
    p.driver = [a, b, T](double t, double x, double y, double z) {
        double h = -std::exp(t - T) * ((0.5 + a) * std::sin(x) + b * std::cos(x));
        return a * y + b * z + h;
    };
    p.lipschitz = std::max(std::abs(a), std::abs(b));
    p.driver_class = DriverClass::general;
    p.terminal = [](double x) { return std::sin(x); };
    p.terminal_gradient = [](double x) { return std::cos(x); };
    p.smoothness = Smoothness::C2_smooth;
    p.reference = Reference{[T](double t, double x) { return std::exp(t - T) * std::sin(x); },
                            [T](double t, double x) { return std::exp(t - T) * std::cos(x); }};
    return p;
}

FbsdeProblem call_lipschitz(Params& left) {
    FbsdeProblem p;
    p.name = "call_lipschitz";
    double sigma = take(left, "sigma", 0.2);
    double r = take(left, "r", 0.05);
    double K = take(left, "K", 1.0);
    common(p, left, 1.0);
    if (!(sigma > 0.0) || !(K > 0.0) || !(p.x0 > 0.0))
        throw InvalidArgument("call_lipschitz needs sigma, K, x0 > 0");
    if (r < 0.0) throw InvalidArgument("call_lipschitz needs r >= 0");
    p.params["sigma"] = sigma;
    p.params["r"] = r;
    p.params["K"] = K;
    const double T = p.T;
    p.fields.v = {[](double) { return 0.0; }, [sigma](double x) { return sigma * x; }};
    p.jacobians = {[](double) { return 0.0; }, [sigma](double) { return sigma; }};
    p.transition = [sigma](double x, double, double dw) { return x * std::exp(sigma * dw); };
    p.chart = {ChartKind::log};
    p.noise_scale = sigma;
    p.driver = [r](double, double, double y, double) { return -r * y; };
    p.lipschitz = r;
    p.driver_class = DriverClass::linear_discount;
    p.discount_rate = r;
    p.terminal = [K](double x) { return std::max(x - K, 0.0); };
    p.smoothness = Smoothness::C1_lipschitz;
    p.terminal_kinks = {K};
    // X_T = x exp(sigma (W_T - W_t)): lognormal with forward x exp(sigma^2 tau / 2).
    auto u = [sigma, r, K, T](double t, double x) {
        double tau = T - t;
        if (tau <= 0.0) return std::max(x - K, 0.0);
        double s = sigma * std::sqrt(tau);
        double F = x * std::exp(0.5 * s * s);
        double d1 = (std::log(F / K) + 0.5 * s * s) / s;
        return std::exp(-r * tau) * (F * normal_cdf(d1) - K * normal_cdf(d1 - s));
    };
    auto z = [sigma, r, K, T](double t, double x) {
        double tau = T - t;
        if (tau <= 0.0) return x > K ? sigma * x : 0.0;
        double s = sigma * std::sqrt(tau);
        double F = x * std::exp(0.5 * s * s);
        double d1 = (std::log(F / K) + 0.5 * s * s) / s;
        return std::exp(-r * tau) * sigma * F * normal_cdf(d1);
    };
    p.reference = Reference{u, z};
    return p;
}

}  // namespace

std::vector<std::string> builtin_names() { return {"bm_linear", "manufactured_sin", "call_lipschitz"}; }

FbsdeProblem builtin(const std::string& name, const std::map<std::string, double>& params) {
    Params left = params;
    FbsdeProblem p;
    if (name == "bm_linear") {
        p = bm_linear(left);
    } else if (name == "manufactured_sin") {
        p = manufactured_sin(left);
    } else if (name == "call_lipschitz") {
        p = call_lipschitz(left);
    } else {
        throw InvalidArgument("unknown problem: " + name);
    }
    if (!left.empty()) throw InvalidArgument("unknown parameter for " + name + ": " + left.begin()->first);
    p.params["x0"] = p.x0;
    p.params["T"] = p.T;
    return p;
}

}  // namespace bsde
