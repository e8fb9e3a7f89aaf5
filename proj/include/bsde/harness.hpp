#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bsde/schemes.hpp"

namespace bsde {

// ---------------------------------------------------------------- PDE oracle

struct FdOracleConfig {
    int nodes = 2001;
    int steps = 4000;
    double padding = 8.0;  ///< half-width in units of noise_scale * sqrt(T), chart coordinates
    int rannacher_steps = 2;
    double fp_tol = 1e-13;
    int fp_max_iter = 100;
    /// Unset: use the calibrated sign.
    std::optional<CorrectionSign> sign;
};

/// Crank-Nicolson finite differences for u_t + b u_x + a/2 u_xx + f(t, x, u, u_x V) = 0
/// on a uniform grid in x, backward from u(T) = Phi, b the Ito drift.
struct FdOracleResult {
    std::vector<double> times;  ///< snapshot times, increasing
    std::vector<double> x;
    std::vector<std::vector<double>> u, z;  ///< per snapshot

    double u_at(double t, double x) const;
    double z_at(double t, double x) const;
    /// Snapshot lookup needs an exact time match (to 1e-12 T).
    Reference as_reference() const;

private:
    friend FdOracleResult pde_fd_oracle(const FbsdeProblem&, const FdOracleConfig&, std::vector<double>);
    std::size_t slot(double t) const;
    std::vector<GridFunction> uf_, zf_;
};

FdOracleResult pde_fd_oracle(const FbsdeProblem& p, const FdOracleConfig& cfg = {},
                             std::vector<double> snapshot_times = {0.0});

struct SignCalibration {
    CorrectionSign sign;
    double mc_mean;
    double mc_std_error;
    double oracle_plus;
    double oracle_minus;
    bool plus_passes;
    bool minus_passes;
};

/// Oracle with f = 0 on call_lipschitz against 10^6 exact-transition samples of
/// E[Phi(X_T)], tolerance max(3 sigma, 1e-3). Computed once per process.
const SignCalibration& calibrate_correction_sign();

// ---------------------------------------------------------------- Monte Carlo oracle

struct McEstimate {
    double mean;
    double std_error;
};

/// Y_0 at x0 for zero or linear-discount drivers: exp(-r T) E[Phi(X_T)] with
/// X propagated over the partition by exact transitions.
McEstimate nested_mc_oracle(const FbsdeProblem& p, const Partition& pi, std::size_t paths, std::uint64_t seed);

// ---------------------------------------------------------------- local defects

/// |E int_t^{t+delta} fbar ds - delta/2 (fbar(t) + E fbar(t+delta))| at x along the
/// exact solution, fbar(s) = f(s, X_s, u(s, X_s), z(s, X_s)).
double cn_quadrature_defect(const FbsdeProblem& p, double t, double x, double delta, int panels = 64,
                            int quad_order = 40);

/// |z(t, x) - E[Psi Z]| with Psi = u(t+delta, X') + w delta f(t+delta, X', u, z).
double z_weight_defect(const FbsdeProblem& p, double t, double x, double delta, PsiWeight w = PsiWeight::full,
                       int quad_order = 40);

// ---------------------------------------------------------------- studies

/// Least-squares slope of log(err) against log(n).
double fit_slope(const std::vector<double>& n, const std::vector<double>& err);

struct ReportRow {
    std::string problem;
    std::string scheme;
    std::string backend;
    std::string mesh;
    double beta = 1.0;
    int n = 0;
    double err_y = 0.0;
    double err_z = 0.0;
    double metric_t2 = 0.0;
    double runtime_ms = 0.0;
    std::vector<IndexError> per_index;
};

struct ConvergenceReport {
    std::vector<ReportRow> rows;  ///< sorted by n
    double fitted_slope = 0.0;    ///< NaN when fewer than 3 rows enter the fit
    double floor = 0.0;
    std::vector<int> excluded;    ///< n left out of the fit, sqrt(metric) <= 10 floor
    std::map<std::string, std::string> config;
};

struct StudyConfig {
    SchemeConfig scheme;
    BackendConfig backend;
    MeshKind mesh = MeshKind::uniform;
    double beta = 5.0;
    std::vector<int> ns;
    std::vector<double> probes;     ///< empty: default_probes
    std::optional<double> floor;    ///< empty: per-backend default
    FdOracleConfig oracle;          ///< used when the problem has no closed form
};

double default_floor(const BackendConfig& b);

ConvergenceReport convergence_study(const FbsdeProblem& p, const StudyConfig& cfg);

/// Recomputes the slope and exclusions of a report from its rows.
void refit(ConvergenceReport& r);

// ---------------------------------------------------------------- serialization

void write_csv(std::ostream& os, const ConvergenceReport& r);
void write_json(std::ostream& os, const ConvergenceReport& r);
ConvergenceReport read_csv(std::istream& is);
ConvergenceReport read_json(std::istream& is);

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bsde
