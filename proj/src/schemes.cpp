#include "bsde/schemes.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bsde/errors.hpp"

namespace bsde {

const char* to_string(SchemeKind s) { return s == SchemeKind::euler ? "euler" : "cn2"; }

const char* to_string(BackendKind b) {
    switch (b) {
        case BackendKind::grid: return "grid";
        case BackendKind::cubature3: return "cubature3";
        case BackendKind::cubature5: return "cubature5";
        case BackendKind::mc: return "mc";
    }
    return "?";
}

const char* to_string(TerminalMode m) {
    switch (m) {
        case TerminalMode::automatic: return "auto";
        case TerminalMode::c1: return "c1";
        case TerminalMode::c2: return "c2";
    }
    return "?";
}

const char* to_string(PsiWeight w) { return w == PsiWeight::full ? "full" : "half"; }

SchemeKind scheme_from_string(const std::string& s) {
    if (s == "euler") return SchemeKind::euler;
    if (s == "cn2") return SchemeKind::cn2;
    throw InvalidArgument("unknown scheme: " + s);
}

BackendKind backend_from_string(const std::string& s) {
    if (s == "grid") return BackendKind::grid;
    if (s == "cubature3") return BackendKind::cubature3;
    if (s == "cubature5") return BackendKind::cubature5;
    if (s == "mc") return BackendKind::mc;
    throw InvalidArgument("unknown backend: " + s);
}

TerminalMode terminal_mode_from_string(const std::string& s) {
    if (s == "auto") return TerminalMode::automatic;
    if (s == "c1") return TerminalMode::c1;
    if (s == "c2") return TerminalMode::c2;
    throw InvalidArgument("unknown terminal mode: " + s);
}

PsiWeight psi_weight_from_string(const std::string& s) {
    if (s == "full") return PsiWeight::full;
    if (s == "half") return PsiWeight::half;
    throw InvalidArgument("unknown psi weight: " + s);
}

void ValueFields::build_interpolants() {
    yf_.clear();
    zf_.clear();
    if (is_tree()) return;
    for (const auto& s : slices) {
        std::vector<double> xi(s.states.size());
        for (std::size_t k = 0; k < xi.size(); ++k) xi[k] = chart.to(s.states[k]);
        yf_.emplace_back(xi, s.y);
        zf_.emplace_back(xi, s.z);
    }
}

double ValueFields::y_at(std::size_t i, double x) const {
    if (i >= yf_.size()) throw InvalidArgument("no interpolant for this slice");
    return yf_[i](chart.to(x));
}

double ValueFields::z_at(std::size_t i, double x) const {
    if (i >= zf_.size()) throw InvalidArgument("no interpolant for this slice");
    return zf_[i](chart.to(x));
}

double implicit_solve(double c, double z, double t, double x, const Driver& f, double theta_delta,
                      double lipschitz, double tol, int max_iter) {
    if (theta_delta * lipschitz >= 1.0) {
        std::ostringstream os;
        os << "implicit step is not a contraction: theta*delta*K = " << theta_delta * lipschitz;
        throw StepSizeError(os.str(), theta_delta * lipschitz);
    }
    double y = c;
    double residual = 0.0;
    for (int k = 0; k < max_iter; ++k) {
        double next = c + theta_delta * f(t, x, y, z);
        residual = std::abs(next - y);
        y = next;
        if (!std::isfinite(y)) break;
        if (residual <= tol + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(y)) return y;
    }
    throw NumericalError("fixed-point iteration did not converge", residual);
}

namespace {

TerminalMode resolve(const FbsdeProblem& p, TerminalMode m) {
    if (m != TerminalMode::automatic) return m;
    return p.smoothness == Smoothness::C2_smooth ? TerminalMode::c2 : TerminalMode::c1;
}

void check_contraction(const Partition& pi, double K, double theta, std::size_t first, std::size_t last) {
    for (std::size_t i = first; i <= last; ++i) {
        double dk = theta * pi.delta(i) * K;
        if (dk >= 1.0) {
            std::ostringstream os;
            os << "step " << i << " violates the contraction condition: theta*delta*K = " << dk;
            throw StepSizeError(os.str(), dk);
        }
    }
}

class Solver {
public:
    Solver(const FbsdeProblem& p, const Partition& pi, const BackendConfig& bc, const SchemeConfig& sc,
           SchemeKind scheme, TerminalMode mode)
        : p_(p), pi_(pi), sc_(sc), backend_(make_backend(p, pi, bc)) {
        fields_.partition = pi;
        fields_.scheme = scheme;
        fields_.backend = bc.kind;
        fields_.terminal = mode;
        fields_.chart = p.chart;
        fields_.slices.resize(pi.n() + 1);
        tree_ = fields_.is_tree();
    }

    void terminal() {
        const std::size_t n = pi_.n();
        Slice& s = fields_.slices[n];
        s.t = pi_.t(n);
        s.states = backend_->states(n);
        for (double x : s.states) {
            s.y.push_back(p_.terminal(x));
            s.z.push_back(terminal_z(x));
        }
    }

    void euler_step(std::size_t i) {
        const double delta = pi_.delta(i + 1);
        const double t = pi_.t(i);
        auto next = next_of(i);
        std::vector<StepExpectations> e;
        backend_->step(i, next, [](double, double y, double) { return y; }, e);
        Slice& s = begin(i);
        for (std::size_t k = 0; k < e.size(); ++k) {
            double z = e[k].euler_weighted;
            s.z[k] = z;
            s.y[k] = implicit_solve(e[k].plain, z, t, s.states[k], p_.driver, delta, p_.lipschitz, sc_.fp_tol,
                                    sc_.fp_max_iter);
        }
    }

    void cn_step(std::size_t i) {
        const double delta = pi_.delta(i + 1);
        const double t = pi_.t(i), t1 = pi_.t(i + 1);
        const double w = sc_.psi == PsiWeight::full ? 1.0 : 0.5;
        auto next = next_of(i);
        std::vector<StepExpectations> ez, ey;
        const auto& f = p_.driver;
        backend_->step(i, next, [&](double x, double y, double z) { return y + w * delta * f(t1, x, y, z); }, ez);
        backend_->step(i, next, [&](double x, double y, double z) { return y + 0.5 * delta * f(t1, x, y, z); }, ey);
        Slice& s = begin(i);
        for (std::size_t k = 0; k < ez.size(); ++k) {
            double z = ez[k].second_order_weighted;
            s.z[k] = z;
            s.y[k] = implicit_solve(ey[k].plain, z, t, s.states[k], f, 0.5 * delta, p_.lipschitz, sc_.fp_tol,
                                    sc_.fp_max_iter);
        }
    }

    ValueFields finish() {
        fields_.build_interpolants();
        return std::move(fields_);
    }

private:
    double terminal_z(double x) const {
        if (fields_.terminal == TerminalMode::c1) return 0.0;
        return p_.terminal_gradient(x) * p_.diffusion(x);
    }

    Slice& begin(std::size_t i) {
        Slice& s = fields_.slices[i];
        s.t = pi_.t(i);
        s.states = backend_->states(i);
        s.y.assign(s.states.size(), 0.0);
        s.z.assign(s.states.size(), 0.0);
        return s;
    }

    StepBackend::Next next_of(std::size_t i) {
        StepBackend::Next next;
        const std::size_t n = pi_.n();
        if (i + 1 == n) {
            next.y = p_.terminal;
            next.z = [this](double x) { return terminal_z(x); };
            return next;
        }
        const Slice& s = fields_.slices[i + 1];
        if (tree_) {
            next.y_values = &s.y;
            next.z_values = &s.z;
            return next;
        }
        std::vector<double> xi(s.states.size());
        for (std::size_t k = 0; k < xi.size(); ++k) xi[k] = p_.chart.to(s.states[k]);
        auto yf = std::make_shared<GridFunction>(xi, s.y);
        auto zf = std::make_shared<GridFunction>(xi, s.z);
        Chart chart = p_.chart;
        next.y = [yf, chart](double x) { return (*yf)(chart.to(x)); };
        next.z = [zf, chart](double x) { return (*zf)(chart.to(x)); };
        return next;
    }

    const FbsdeProblem& p_;
    const Partition& pi_;
    SchemeConfig sc_;
    std::unique_ptr<StepBackend> backend_;
    ValueFields fields_;
    bool tree_ = false;
};

}  // namespace

ValueFields euler_backward(const FbsdeProblem& p, const Partition& pi, const BackendConfig& backend,
                           const SchemeConfig& cfg) {
    check_contraction(pi, p.lipschitz, 1.0, 1, pi.n());
    Solver s(p, pi, backend, cfg, SchemeKind::euler, TerminalMode::c1);
    s.terminal();
    for (std::size_t i = pi.n(); i-- > 0;) s.euler_step(i);
    return s.finish();
}

ValueFields second_order_backward(const FbsdeProblem& p, const Partition& pi, const BackendConfig& backend,
                                  const SchemeConfig& cfg) {
    TerminalMode mode = resolve(p, cfg.terminal);
    const std::size_t n = pi.n();
    if (mode == TerminalMode::c2 && !p.terminal_gradient)
        throw InvalidArgument("terminal mode c2 needs the gradient of the terminal condition");
    if (mode == TerminalMode::c1) {
        if (n < 2) throw InvalidArgument("second-order scheme with c1 start needs n >= 2");
        check_contraction(pi, p.lipschitz, 0.5, 1, n - 1);
        check_contraction(pi, p.lipschitz, 1.0, n, n);
    } else {
        check_contraction(pi, p.lipschitz, 0.5, 1, n);
    }
    Solver s(p, pi, backend, cfg, SchemeKind::cn2, mode);
    s.terminal();
    std::size_t i = n;
    if (mode == TerminalMode::c1) s.euler_step(--i);
    while (i-- > 0) s.cn_step(i);
    return s.finish();
}

ValueFields run_scheme(const FbsdeProblem& p, const Partition& pi, const BackendConfig& backend,
                       const SchemeConfig& cfg) {
    return cfg.scheme == SchemeKind::euler ? euler_backward(p, pi, backend, cfg)
                                           : second_order_backward(p, pi, backend, cfg);
}

ErrorSummary error_metric(const ValueFields& fields, const Reference& ref, const std::vector<double>& probes,
                          int d) {
    const std::size_t n = fields.partition.n();
    if (n < 2) throw InvalidArgument("error metric needs n >= 2");
    ErrorSummary out;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = fields.partition.t(i);
        const double w = fields.partition.delta(i + 1) / (4.0 * d);
        IndexError e{i, t, 0.0, 0.0, 0.0};
        auto account = [&](double x, double y, double z) {
            double dy = std::abs(y - ref.u(t, x));
            double dz = std::abs(z - ref.z(t, x));
            e.err_y = std::max(e.err_y, dy);
            e.err_z = std::max(e.err_z, dz);
            e.metric = std::max(e.metric, dy * dy + w * dz * dz);
        };
        if (fields.is_tree()) {
            const Slice& s = fields.slices[i];
            for (std::size_t k = 0; k < s.states.size(); ++k) account(s.states[k], s.y[k], s.z[k]);
        } else {
            for (double x : probes) account(x, fields.y_at(i, x), fields.z_at(i, x));
        }
        out.per_index.push_back(e);
        if (i + 2 <= n) {
            out.err_y = std::max(out.err_y, e.err_y);
            out.err_z = std::max(out.err_z, e.err_z);
            out.metric = std::max(out.metric, e.metric);
        }
    }
    return out;
}

}  // namespace bsde
