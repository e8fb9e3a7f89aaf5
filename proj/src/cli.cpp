#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "bsde/errors.hpp"
#include "bsde/harness.hpp"

namespace bsde {

namespace {

std::map<std::string, double> parse_params(const std::vector<std::string>& raw) {
    std::map<std::string, double> out;
    for (const auto& kv : raw) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw InvalidArgument("--param expects k=v, got " + kv);
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(kv.substr(eq + 1), &used);
        } catch (const std::exception&) {
            throw InvalidArgument("--param value is not a number: " + kv);
        }
        if (used != kv.size() - eq - 1) throw InvalidArgument("--param value is not a number: " + kv);
        out[kv.substr(0, eq)] = v;
    }
    return out;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Convergence studies for backward schemes on decoupled FBSDEs."};
    app.name("bsde-lab");

    std::string problem, scheme = "cn2", backend = "grid", mesh = "uniform", terminal = "auto", psi = "full";
    std::string out_path = "-", format = "csv";
    std::vector<std::string> params;
    std::vector<int> ns;
    double beta = 5.0;
    StudyConfig cfg;
    int probes = 21;

    app.add_option("--problem", problem, "Builtin problem")
        ->required()
        ->check(CLI::IsMember(builtin_names()));
    app.add_option("--param", params, "Problem parameter k=v, repeatable");
    app.add_option("--scheme", scheme, "euler or cn2")->check(CLI::IsMember({"euler", "cn2"}));
    app.add_option("--backend", backend, "grid, cubature3, cubature5 or mc")
        ->check(CLI::IsMember({"grid", "cubature3", "cubature5", "mc"}));
    app.add_option("--mesh", mesh, "uniform or graded")->check(CLI::IsMember({"uniform", "graded"}));
    app.add_option("--beta", beta, "Grading exponent")->check(CLI::Range(1.0, 1e6));
    app.add_option("--n", ns, "Comma separated step counts")->required()->delimiter(',');
    app.add_option("--terminal-mode", terminal, "auto, c1 or c2")->check(CLI::IsMember({"auto", "c1", "c2"}));
    app.add_option("--psi-weight", psi, "Driver share inside the Z functional: full or half")
        ->check(CLI::IsMember({"full", "half"}));
    app.add_option("--grid-nodes", cfg.backend.grid_nodes, "Spatial nodes of the grid backend")
        ->check(CLI::Range(5, 1 << 22));
    app.add_option("--quad-order", cfg.backend.quad_order, "Gauss-Hermite order")->check(CLI::Range(2, 200));
    app.add_option("--mc-samples", cfg.backend.mc_samples, "Samples per slice for the mc backend")
        ->check(CLI::Range(std::size_t{1000}, std::size_t{1} << 30));
    app.add_option("--seed", cfg.backend.seed, "Seed for the mc backend");
    app.add_option("--probes", probes, "Number of probe states")->check(CLI::Range(1, 100000));
    app.add_option("--fp-tol", cfg.scheme.fp_tol, "Fixed-point tolerance")->check(CLI::PositiveNumber);
    app.add_option("--fp-max-iter", cfg.scheme.fp_max_iter, "Fixed-point iteration cap")->check(CLI::Range(1, 100000));
    app.add_option("--out", out_path, "Output file, - for stdout");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "bsde-lab: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        auto p = builtin(problem, parse_params(params));
        cfg.scheme.scheme = scheme_from_string(scheme);
        cfg.scheme.terminal = terminal_mode_from_string(terminal);
        cfg.scheme.psi = psi_weight_from_string(psi);
        cfg.backend.kind = backend_from_string(backend);
        cfg.mesh = mesh_kind_from_string(mesh);
        cfg.beta = beta;
        cfg.ns = ns;
        cfg.probes = default_probes(p, cfg.backend, probes);
        auto report = convergence_study(p, cfg);

        std::ofstream file;
        std::ostream* os = &out;
        if (out_path != "-") {
            file.open(out_path);
            if (!file) throw InvalidArgument("cannot open " + out_path);
            os = &file;
        }
        if (format == "json") write_json(*os, report);
        else write_csv(*os, report);
        return 0;
    } catch (const InvalidArgument& e) {
        err << "bsde-lab: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        err << "bsde-lab: numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const ResourceError& e) {
        err << "bsde-lab: " << e.what() << '\n';
        return 2;
    } catch (const UnsupportedProblem& e) {
        err << "bsde-lab: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace bsde
