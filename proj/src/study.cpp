#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "bsde/errors.hpp"
#include "bsde/harness.hpp"

namespace bsde {

namespace {

const Reference& need_reference(const FbsdeProblem& p) {
    if (!p.reference) throw InvalidArgument(p.name + " has no closed-form reference");
    return *p.reference;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

double cn_quadrature_defect(const FbsdeProblem& p, double t, double x, double delta, int panels, int quad_order) {
    const Reference& ref = need_reference(p);
    if (panels < 2 || panels % 2) throw InvalidArgument("Simpson rule needs an even panel count");
    auto rule = gauss_hermite(quad_order);
    auto fbar = [&](double s) {
        double sd = std::sqrt(s - t), acc = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            double xs = exact_transition(p, x, s - t, sd * rule.nodes[k]);
            acc += rule.weights[k] * p.f(s, xs, ref.u(s, xs), ref.z(s, xs));
        }
        return acc;
    };
    const double h = delta / panels;
    double integral = fbar(t) + fbar(t + delta);
    for (int k = 1; k < panels; ++k) integral += (k % 2 ? 4.0 : 2.0) * fbar(t + k * h);
    integral *= h / 3.0;
    return std::abs(integral - 0.5 * delta * (fbar(t) + fbar(t + delta)));
}

double z_weight_defect(const FbsdeProblem& p, double t, double x, double delta, PsiWeight w, int quad_order) {
    const Reference& ref = need_reference(p);
    const double t1 = t + delta, share = w == PsiWeight::full ? 1.0 : 0.5;
    auto psi = [&](double xp) {
        double u = ref.u(t1, xp);
        return u + share * delta * p.f(t1, xp, u, ref.z(t1, xp));
    };
    auto e = grid_quadrature_step(p, psi, x, delta, quad_order);
    return std::abs(ref.z(t, x) - e.second_order_weighted);
}

double fit_slope(const std::vector<double>& n, const std::vector<double>& err) {
    if (n.size() != err.size() || n.size() < 2) throw InvalidArgument("slope fit needs matching data, >= 2 points");
    double sx = 0, sy = 0;
    for (std::size_t k = 0; k < n.size(); ++k) {
        sx += std::log(n[k]);
        sy += std::log(err[k]);
    }
    const double mx = sx / n.size(), my = sy / n.size();
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n.size(); ++k) {
        double dx = std::log(n[k]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(err[k]) - my);
    }
    return sxy / sxx;
}

double default_floor(const BackendConfig& b) {
    switch (b.kind) {
        case BackendKind::grid: return 1e-9;
        case BackendKind::mc: return 1.0 / std::sqrt(static_cast<double>(b.mc_samples));
        default: return 1e-12;
    }
}

void refit(ConvergenceReport& r) {
    std::vector<double> n, e;
    r.excluded.clear();
    for (const auto& row : r.rows) {
        double err = std::sqrt(row.metric_t2);
        if (err <= 10.0 * r.floor) {
            r.excluded.push_back(row.n);
        } else {
            n.push_back(row.n);
            e.push_back(err);
        }
    }
    r.fitted_slope = n.size() >= 3 ? fit_slope(n, e) : std::numeric_limits<double>::quiet_NaN();
}

ConvergenceReport convergence_study(const FbsdeProblem& p, const StudyConfig& cfg) {
    std::vector<int> ns = cfg.ns;
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    if (ns.size() < 3) throw InvalidArgument("convergence study needs at least 3 distinct n");
    auto probes = cfg.probes.empty() ? default_probes(p, cfg.backend) : cfg.probes;

    ConvergenceReport r;
    r.floor = cfg.floor ? *cfg.floor : default_floor(cfg.backend);
    auto& c = r.config;
    c["problem"] = p.name;
    for (const auto& [k, v] : p.params) c["param." + k] = fmt(v);
    c["scheme"] = to_string(cfg.scheme.scheme);
    c["terminal_mode"] = to_string(cfg.scheme.terminal);
    c["psi_weight"] = to_string(cfg.scheme.psi);
    c["fp_tol"] = fmt(cfg.scheme.fp_tol);
    c["fp_max_iter"] = std::to_string(cfg.scheme.fp_max_iter);
    c["backend"] = to_string(cfg.backend.kind);
    c["grid_nodes"] = std::to_string(cfg.backend.grid_nodes);
    c["grid_width"] = fmt(cfg.backend.grid_width);
    c["quad_order"] = std::to_string(cfg.backend.quad_order);
    c["mc_samples"] = std::to_string(cfg.backend.mc_samples);
    c["seed"] = std::to_string(cfg.backend.seed);
    c["mesh"] = to_string(cfg.mesh);
    c["beta"] = fmt(cfg.mesh == MeshKind::graded ? cfg.beta : 1.0);
    c["probes"] = std::to_string(probes.size());
    c["reference"] = p.reference ? "closed_form" : "pde_oracle";
    std::string list;
    for (int n : ns) list += (list.empty() ? "" : ",") + std::to_string(n);
    c["n"] = list;

    // The oracle's boundary rows assume u_xx = 0; keep them 6 scale units beyond the probes.
    FdOracleConfig oracle = cfg.oracle;
    double reach = 0.0;
    const double c0 = p.chart.to(p.x0), scale = p.noise_scale * std::sqrt(p.T);
    for (double x : probes) reach = std::max(reach, std::abs(p.chart.to(x) - c0) / scale);
    if (reach + 6.0 > oracle.padding) {
        double grow = (reach + 6.0) / oracle.padding;
        oracle.nodes = static_cast<int>(std::ceil((oracle.nodes - 1) * grow)) + 1;
        oracle.padding = reach + 6.0;
    }

    for (int n : ns) {
        Partition pi = cfg.mesh == MeshKind::uniform ? Partition::uniform(n, p.T) : Partition::graded(n, p.T, cfg.beta);
        auto start = std::chrono::steady_clock::now();
        ValueFields f = run_scheme(p, pi, cfg.backend, cfg.scheme);
        auto stop = std::chrono::steady_clock::now();
        Reference ref = p.reference ? *p.reference : pde_fd_oracle(p, oracle, pi.points()).as_reference();
        ErrorSummary e = error_metric(f, ref, probes);
        ReportRow row;
        row.problem = p.name;
        row.scheme = to_string(cfg.scheme.scheme);
        row.backend = to_string(cfg.backend.kind);
        row.mesh = to_string(cfg.mesh);
        row.beta = cfg.mesh == MeshKind::graded ? cfg.beta : 1.0;
        row.n = n;
        row.err_y = e.err_y;
        row.err_z = e.err_z;
        row.metric_t2 = e.metric;
        row.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        row.per_index = std::move(e.per_index);
        r.rows.push_back(std::move(row));
    }
    refit(r);
    return r;
}

}  // namespace bsde
