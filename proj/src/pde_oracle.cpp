#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include "bsde/errors.hpp"
#include "bsde/harness.hpp"

namespace bsde {

namespace {

void thomas(std::vector<double> a, std::vector<double> b, std::vector<double> c, std::vector<double>& rhs) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - c[i] * rhs[i + 1]) / b[i];
}

std::vector<double> gradient(const std::vector<double>& u, double h) {
    const std::size_t n = u.size();
    std::vector<double> g(n);
    for (std::size_t j = 1; j + 1 < n; ++j) g[j] = (u[j + 1] - u[j - 1]) / (2.0 * h);
    g[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    g[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
    return g;
}

}  // namespace

std::size_t FdOracleResult::slot(double t) const {
    const double tol = 1e-12 * std::max(1.0, times.empty() ? 1.0 : std::abs(times.back()));
    for (std::size_t k = 0; k < times.size(); ++k)
        if (std::abs(times[k] - t) <= tol) return k;
    throw InvalidArgument("oracle has no snapshot at t = " + std::to_string(t));
}

double FdOracleResult::u_at(double t, double xv) const { return uf_[slot(t)](xv); }
double FdOracleResult::z_at(double t, double xv) const { return zf_[slot(t)](xv); }

Reference FdOracleResult::as_reference() const {
    auto self = std::make_shared<FdOracleResult>(*this);
    return Reference{[self](double t, double xv) { return self->u_at(t, xv); },
                     [self](double t, double xv) { return self->z_at(t, xv); }};
}

FdOracleResult pde_fd_oracle(const FbsdeProblem& p, const FdOracleConfig& cfg, std::vector<double> snapshot_times) {
    if (p.q != 1 || p.d != 1) throw InvalidArgument("finite-difference oracle handles q = d = 1");
    if (cfg.nodes < 5 || cfg.steps < 1) throw InvalidArgument("oracle needs >= 5 nodes and >= 1 step");
    const CorrectionSign sign = cfg.sign ? *cfg.sign : calibrate_correction_sign().sign;
    const double T = p.T;
    for (double t : snapshot_times)
        if (t < 0.0 || t > T) throw InvalidArgument("snapshot time outside [0, T]");
    std::sort(snapshot_times.begin(), snapshot_times.end());
    snapshot_times.erase(std::unique(snapshot_times.begin(), snapshot_times.end()), snapshot_times.end());

    const int N = cfg.nodes;
    const double c0 = p.chart.to(p.x0), L = cfg.padding * p.noise_scale * std::sqrt(T);
    const double lo = p.chart.from(c0 - L), hi = p.chart.from(c0 + L);
    const double h = (hi - lo) / (N - 1);
    std::vector<double> x(N), b(N), a(N), vol(N);
    for (int j = 0; j < N; ++j) {
        x[j] = lo + j * h;
        b[j] = ito_drift(p, x[j], sign);
        vol[j] = p.diffusion(x[j]);
        a[j] = vol[j] * vol[j];
    }
    // L as tridiagonal (l, m, r); rows 0 and N-1 assume u_xx = 0.
    std::vector<double> l(N, 0.0), m(N, 0.0), r(N, 0.0);
    for (int j = 1; j < N - 1; ++j) {
        double conv = b[j] / (2.0 * h), diff = 0.5 * a[j] / (h * h);
        l[j] = diff - conv;
        m[j] = -2.0 * diff;
        r[j] = diff + conv;
    }
    m[0] = -b[0] / h;
    r[0] = b[0] / h;
    l[N - 1] = -b[N - 1] / h;
    m[N - 1] = b[N - 1] / h;

    // Time levels from T down to 0: uniform steps plus the snapshots.
    std::vector<double> ts;
    for (int s = 0; s <= cfg.steps; ++s) ts.push_back(T * (cfg.steps - s) / cfg.steps);
    const double snap = 1e-9 * T / cfg.steps;
    for (double t : snapshot_times) {
        auto it = std::lower_bound(ts.begin(), ts.end(), t + snap, std::greater<double>());
        if (it != ts.end() && std::abs(*it - t) <= snap) *it = t;
        else ts.insert(it, t);
    }
    ts.front() = T;
    ts.back() = 0.0;

    FdOracleResult out;
    out.times = snapshot_times;
    out.x = x;
    out.u.resize(snapshot_times.size());
    out.z.resize(snapshot_times.size());

    auto forcing = [&](double t, const std::vector<double>& u) {
        std::vector<double> F(N, 0.0);
        if (p.driver_class == DriverClass::zero) return F;
        auto g = gradient(u, h);
        for (int j = 0; j < N; ++j) F[j] = p.f(t, x[j], u[j], g[j] * vol[j]);
        return F;
    };
    auto record = [&](double t, const std::vector<double>& u) {
        for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
            if (snapshot_times[k] != t) continue;
            out.u[k] = u;
            auto g = gradient(u, h);
            for (int j = 0; j < N; ++j) g[j] *= vol[j];
            out.z[k] = g;
        }
    };
    auto theta_step = [&](std::vector<double>& u, double t_old, double t_new, double theta) {
        const double k = t_old - t_new;
        auto F_old = forcing(t_old, u);
        std::vector<double> base(N);
        for (int j = 0; j < N; ++j) {
            double Lu = m[j] * u[j] + (j > 0 ? l[j] * u[j - 1] : 0.0) + (j + 1 < N ? r[j] * u[j + 1] : 0.0);
            base[j] = u[j] + (1.0 - theta) * k * (Lu + F_old[j]);
        }
        std::vector<double> A(N), B(N), C(N);
        for (int j = 0; j < N; ++j) {
            A[j] = -theta * k * l[j];
            B[j] = 1.0 - theta * k * m[j];
            C[j] = -theta * k * r[j];
        }
        std::vector<double> guess = u, next;
        double change = 0.0;
        for (int it = 0; it < cfg.fp_max_iter; ++it) {
            auto F = forcing(t_new, guess);
            next = base;
            for (int j = 0; j < N; ++j) next[j] += theta * k * F[j];
            thomas(A, B, C, next);
            change = 0.0;
            double scale = 1.0;
            for (int j = 0; j < N; ++j) {
                change = std::max(change, std::abs(next[j] - guess[j]));
                scale = std::max(scale, std::abs(next[j]));
            }
            guess.swap(next);
            if (!std::isfinite(change)) break;
            if (p.driver_class == DriverClass::zero || change <= cfg.fp_tol * scale) {
                u.swap(guess);
                return;
            }
        }
        throw NumericalError("oracle fixed-point iteration diverged", change);
    };

    std::vector<double> u(N);
    for (int j = 0; j < N; ++j) u[j] = p.terminal(x[j]);
    record(T, u);
    for (std::size_t s = 1; s < ts.size(); ++s) {
        double t_old = ts[s - 1], t_new = ts[s];
        if (static_cast<int>(s) <= cfg.rannacher_steps) {
            double t_mid = 0.5 * (t_old + t_new);
            theta_step(u, t_old, t_mid, 1.0);
            theta_step(u, t_mid, t_new, 1.0);
        } else {
            theta_step(u, t_old, t_new, 0.5);
        }
        record(t_new, u);
    }
    for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
        out.uf_.emplace_back(x, out.u[k]);
        out.zf_.emplace_back(x, out.z[k]);
    }
    return out;
}

const SignCalibration& calibrate_correction_sign() {
    static const SignCalibration cached = [] {
        auto p = builtin("call_lipschitz");
        p.driver = [](double, double, double, double) { return 0.0; };
        p.lipschitz = 0.0;
        p.driver_class = DriverClass::zero;
        p.discount_rate = 0.0;

        std::mt19937_64 gen(7);
        std::normal_distribution<double> normal;
        const std::size_t M = 1'000'000;
        const double sd = std::sqrt(p.T);
        double s = 0, s2 = 0;
        for (std::size_t k = 0; k < M; ++k) {
            double v = p.terminal(exact_transition(p, p.x0, p.T, sd * normal(gen)));
            s += v;
            s2 += v * v;
        }
        SignCalibration c{};
        c.mc_mean = s / M;
        c.mc_std_error = std::sqrt(std::max(0.0, s2 / M - c.mc_mean * c.mc_mean) / (M - 1));
        const double tol = std::max(3.0 * c.mc_std_error, 1e-3);
        FdOracleConfig cfg;
        cfg.sign = CorrectionSign::plus;
        c.oracle_plus = pde_fd_oracle(p, cfg).u_at(0.0, p.x0);
        cfg.sign = CorrectionSign::minus;
        c.oracle_minus = pde_fd_oracle(p, cfg).u_at(0.0, p.x0);
        c.plus_passes = std::abs(c.oracle_plus - c.mc_mean) <= tol;
        c.minus_passes = std::abs(c.oracle_minus - c.mc_mean) <= tol;
        if (c.plus_passes == c.minus_passes)
            throw NumericalError("drift sign calibration is ambiguous", c.oracle_plus - c.oracle_minus);
        c.sign = c.plus_passes ? CorrectionSign::plus : CorrectionSign::minus;
        return c;
    }();
    return cached;
}

}  // namespace bsde
