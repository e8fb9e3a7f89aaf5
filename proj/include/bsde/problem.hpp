#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bsde/strat.hpp"

namespace bsde {

enum class Smoothness { C1_lipschitz, C2_smooth };

/// Drivers the nested Monte Carlo oracle can reduce in closed form.
enum class DriverClass { zero, linear_discount, general };

/// Sign in front of the 1/2 sum_j grad(V_j) V_j correction of the Ito drift.
enum class CorrectionSign { plus, minus };

const char* to_string(CorrectionSign s);

/// Coordinate in which grids are laid out: identity or log for positive states.
enum class ChartKind { identity, log };

struct Chart {
    ChartKind kind = ChartKind::identity;
    double to(double x) const;
    double from(double xi) const;
};

struct Reference {
    std::function<double(double t, double x)> u;
    /// grad u(t,x) V(x), the Z component.
    std::function<double(double t, double x)> z;
};

using Driver = std::function<double(double t, double x, double y, double z)>;

struct FbsdeProblem {
    std::string name;
    std::map<std::string, double> params;

    int d = 1;
    int q = 1;
    VectorFields fields;                                ///< V_0, V_1, ... V_d
    std::vector<std::function<double(double)>> jacobians;  ///< dV_k/dx, may be empty

    Driver driver;
    double lipschitz = 0.0;
    DriverClass driver_class = DriverClass::general;
    double discount_rate = 0.0;

    std::function<double(double)> terminal;
    std::function<double(double)> terminal_gradient;  ///< may be empty
    Smoothness smoothness = Smoothness::C2_smooth;
    std::vector<double> terminal_kinks;               ///< states where Phi is not differentiable

    double x0 = 0.0;
    double T = 1.0;

    std::function<double(double x, double delta, double dw)> transition;
    bool transition_increment_only = true;

    std::optional<Reference> reference;

    Chart chart;
    /// Diffusion scale per sqrt(time) in chart coordinates.
    double noise_scale = 1.0;

    double f(double t, double x, double y, double z) const { return driver(t, x, y, z); }
    double diffusion(double x) const { return fields.v[1](x); }
};

double ito_drift(const FbsdeProblem& p, double x, CorrectionSign sign);

double exact_transition(const FbsdeProblem& p, double x, double delta, double dw);

/// bm_linear, manufactured_sin (a, b), call_lipschitz (sigma, r, K).
/// Common parameters: x0, T.
FbsdeProblem builtin(const std::string& name, const std::map<std::string, double>& params = {});

std::vector<std::string> builtin_names();

double normal_cdf(double x);

}  // namespace bsde
