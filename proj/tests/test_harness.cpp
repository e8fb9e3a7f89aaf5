#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bsde/errors.hpp"
#include "bsde/harness.hpp"

using namespace bsde;

namespace {

FbsdeProblem without_driver(FbsdeProblem p) {
    p.driver = [](double, double, double, double) { return 0.0; };
    p.lipschitz = 0.0;
    p.driver_class = DriverClass::zero;
    p.reference.reset();
    return p;
}

int run_cli(std::vector<const char*> args, std::string& out, std::string& err) {
    args.insert(args.begin(), "bsde-lab");
    std::ostringstream o, e;
    int rc = cli_main(static_cast<int>(args.size()), args.data(), o, e);
    out = o.str();
    err = e.str();
    return rc;
}

}  // namespace

TEST(PdeOracle, HeatLinearAndManufactured) {
    auto heat = without_driver(builtin("manufactured_sin"));
    auto o = pde_fd_oracle(heat);
    for (double x = -1.0; x <= 3.0; x += 0.25) EXPECT_NEAR(o.u_at(0.0, x), std::exp(-0.5) * std::sin(x), 1e-5);

    auto lin = pde_fd_oracle(builtin("bm_linear"));
    for (double x = -1.0; x <= 1.0; x += 0.25) EXPECT_NEAR(lin.u_at(0.0, x), x, 1e-8);

    auto ms = builtin("manufactured_sin");
    auto m = pde_fd_oracle(ms, {}, {0.0, 0.5});
    for (double x = -1.0; x <= 3.0; x += 0.25) {
        EXPECT_NEAR(m.u_at(0.0, x), std::exp(-1.0) * std::sin(x), 1e-5);
        EXPECT_NEAR(m.z_at(0.5, x), std::exp(-0.5) * std::cos(x), 1e-5);
    }
    EXPECT_THROW(m.u_at(0.25, 0.0), InvalidArgument);
}

TEST(PdeOracle, CallAgainstClosedForm) {
    auto call = builtin("call_lipschitz");
    auto o = pde_fd_oracle(call, {}, {0.0, 0.9});
    for (double x = 0.6; x <= 1.6; x += 0.1) {
        EXPECT_NEAR(o.u_at(0.0, x), call.reference->u(0.0, x), 1e-5);
        EXPECT_NEAR(o.z_at(0.9, x), call.reference->z(0.9, x), 1e-4);
    }
}

TEST(PdeOracle, SignCalibration) {
    const auto& c = calibrate_correction_sign();
    EXPECT_NE(c.plus_passes, c.minus_passes);
    EXPECT_EQ(c.sign, CorrectionSign::plus);
    EXPECT_EQ(&c, &calibrate_correction_sign());
}

TEST(McOracle, Examples) {
    auto bm = builtin("bm_linear");
    auto e = nested_mc_oracle(bm, Partition::uniform(4, 1.0), 20000, 3);
    EXPECT_LE(std::abs(e.mean), 3.0 * e.std_error);

    auto call = builtin("call_lipschitz");
    auto mc = nested_mc_oracle(call, Partition::uniform(2, 1.0), 200000, 5);
    double pde = pde_fd_oracle(call).u_at(0.0, call.x0);
    EXPECT_LE(std::abs(mc.mean - pde), std::max(3.0 * mc.std_error, 1e-3));

    EXPECT_THROW(nested_mc_oracle(builtin("manufactured_sin"), Partition::uniform(2, 1.0), 20000, 1),
                 UnsupportedProblem);
    EXPECT_THROW(nested_mc_oracle(bm, Partition::uniform(2, 1.0), 100, 1), InvalidArgument);
}

TEST(LocalDefects, Orders) {
    auto p = builtin("manufactured_sin");
    std::vector<double> inv, cn, z;
    for (int k = 4; k <= 9; ++k) {
        double d = std::ldexp(1.0, -k);
        inv.push_back(1.0 / d);
        cn.push_back(cn_quadrature_defect(p, 0.0, p.x0, d));
        z.push_back(z_weight_defect(p, 0.0, p.x0, d));
    }
    EXPECT_NEAR(-fit_slope(inv, cn), 3.0, 0.2);
    EXPECT_GE(-fit_slope(inv, z), 1.9);
    EXPECT_THROW(cn_quadrature_defect(without_driver(p), 0.0, 0.0, 0.1), InvalidArgument);
}

TEST(Study, SlopeFit) {
    std::vector<double> n{4, 8, 16, 32, 64}, e;
    for (double v : n) e.push_back(7.0 / (v * v));
    EXPECT_NEAR(fit_slope(n, e), -2.0, 1e-9);
    std::vector<double> scaled;
    for (double v : e) scaled.push_back(1e-3 * v * (1.0 + 0.1 * std::sin(v)));
    std::vector<double> noisy;
    for (double v : e) noisy.push_back(v * (1.0 + 0.1 * std::sin(v)));
    EXPECT_NEAR(fit_slope(n, scaled), fit_slope(n, noisy), 1e-12);

    ConvergenceReport r;
    r.floor = 3e-4;
    for (int k = 0; k < 5; ++k) {
        ReportRow row;
        row.n = static_cast<int>(n[k]);
        row.metric_t2 = e[k] * e[k];
        r.rows.push_back(row);
    }
    refit(r);
    EXPECT_EQ(r.excluded, std::vector<int>{64});
    EXPECT_NEAR(r.fitted_slope, -2.0, 1e-9);
    r.floor = 3e-3;
    refit(r);
    EXPECT_TRUE(std::isnan(r.fitted_slope));
}

TEST(Study, RunsAndEchoes) {
    auto p = builtin("manufactured_sin");
    StudyConfig cfg;
    cfg.scheme.scheme = SchemeKind::euler;
    cfg.ns = {16, 4, 8, 8};
    auto r = convergence_study(p, cfg);
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_EQ(r.rows[0].n, 4);
    EXPECT_EQ(r.rows[2].n, 16);
    EXPECT_EQ(r.rows[1].per_index.size(), 8u);
    EXPECT_EQ(r.config.at("scheme"), "euler");
    EXPECT_EQ(r.config.at("param.a"), "1");
    EXPECT_LT(r.fitted_slope, -0.7);
    for (const auto& row : r.rows) EXPECT_GE(row.runtime_ms, 0.0);

    cfg.ns = {4, 8};
    EXPECT_THROW(convergence_study(p, cfg), InvalidArgument);
}

TEST(Study, OracleReferenceStandsInForClosedForm) {
    auto p = builtin("manufactured_sin");
    auto q = p;
    q.reference.reset();
    StudyConfig cfg;
    cfg.ns = {4, 8, 16};
    auto a = convergence_study(p, cfg);
    auto b = convergence_study(q, cfg);
    EXPECT_EQ(b.config.at("reference"), "pde_oracle");
    for (std::size_t k = 0; k < 3; ++k)
        EXPECT_NEAR(std::sqrt(b.rows[k].metric_t2), std::sqrt(a.rows[k].metric_t2),
                    0.05 * std::sqrt(a.rows[k].metric_t2));
}

TEST(Report, RoundTrip) {
    auto p = builtin("call_lipschitz");
    StudyConfig cfg;
    cfg.mesh = MeshKind::graded;
    cfg.ns = {4, 6, 8};
    auto r = convergence_study(p, cfg);
    r.rows[1].runtime_ms = 1.0 / 3.0;

    std::stringstream csv;
    write_csv(csv, r);
    auto c = read_csv(csv);
    ASSERT_EQ(c.rows.size(), r.rows.size());
    EXPECT_EQ(c.fitted_slope, r.fitted_slope);
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
        EXPECT_EQ(c.rows[k].problem, r.rows[k].problem);
        EXPECT_EQ(c.rows[k].mesh, "graded");
        EXPECT_EQ(c.rows[k].beta, r.rows[k].beta);
        EXPECT_EQ(c.rows[k].n, r.rows[k].n);
        EXPECT_EQ(c.rows[k].err_y, r.rows[k].err_y);
        EXPECT_EQ(c.rows[k].err_z, r.rows[k].err_z);
        EXPECT_EQ(c.rows[k].metric_t2, r.rows[k].metric_t2);
        EXPECT_EQ(c.rows[k].runtime_ms, r.rows[k].runtime_ms);
    }

    std::stringstream js;
    write_json(js, r);
    auto j = read_json(js);
    EXPECT_EQ(j.config, r.config);
    EXPECT_EQ(j.fitted_slope, r.fitted_slope);
    EXPECT_EQ(j.floor, r.floor);
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
        EXPECT_EQ(j.rows[k].metric_t2, r.rows[k].metric_t2);
        EXPECT_EQ(j.rows[k].runtime_ms, r.rows[k].runtime_ms);
        ASSERT_EQ(j.rows[k].per_index.size(), r.rows[k].per_index.size());
        for (std::size_t i = 0; i < r.rows[k].per_index.size(); ++i) {
            EXPECT_EQ(j.rows[k].per_index[i].t, r.rows[k].per_index[i].t);
            EXPECT_EQ(j.rows[k].per_index[i].metric, r.rows[k].per_index[i].metric);
        }
    }

    ConvergenceReport nan;
    nan.fitted_slope = std::nan("");
    std::stringstream n1, n2;
    write_csv(n1, nan);
    write_json(n2, nan);
    EXPECT_TRUE(std::isnan(read_csv(n1).fitted_slope));
    EXPECT_TRUE(std::isnan(read_json(n2).fitted_slope));

    std::stringstream bad("problem,n\n");
    EXPECT_THROW(read_csv(bad), InvalidArgument);
}

TEST(Cli, ExitCodes) {
    std::string out, err;
    EXPECT_EQ(run_cli({"--problem", "bm_linear", "--n", "4,8,16"}, out, err), 0);
    EXPECT_EQ(out.rfind("problem,scheme,backend,mesh,beta,n,err_y,err_z,metric_t2,runtime_ms\n", 0), 0u);
    EXPECT_NE(out.find("\nfitted_slope,"), std::string::npos);

    EXPECT_EQ(run_cli({"--problem", "bm_linear", "--n", "4,8,16", "--format", "json", "--backend", "cubature3"},
                      out, err),
              0);
    std::stringstream js(out);
    EXPECT_EQ(read_json(js).rows.size(), 3u);

    EXPECT_EQ(run_cli({"--n", "4,8,16"}, out, err), 1);
    EXPECT_NE(err.find("--problem"), std::string::npos);
    EXPECT_EQ(run_cli({"--problem", "bm_linear", "--n", "4,8,16", "--bogus"}, out, err), 1);
    EXPECT_EQ(run_cli({"--problem", "heston", "--n", "4,8,16"}, out, err), 1);
    EXPECT_EQ(run_cli({"--problem", "bm_linear", "--param", "q=1", "--n", "4,8,16"}, out, err), 1);
    EXPECT_EQ(run_cli({"--problem", "bm_linear", "--param", "x0", "--n", "4,8,16"}, out, err), 1);
    EXPECT_EQ(run_cli({"--problem", "bm_linear", "--n", "4,8"}, out, err), 1);
    EXPECT_EQ(run_cli({"--problem", "manufactured_sin", "--param", "a=3", "--scheme", "euler", "--n", "1,2,3"},
                      out, err),
              2);
    EXPECT_EQ(run_cli({"--help"}, out, err), 0);
    EXPECT_NE(out.find("--terminal-mode"), std::string::npos);
}
