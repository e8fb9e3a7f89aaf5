#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bsde/expectation.hpp"
#include "bsde/mesh.hpp"
#include "bsde/problem.hpp"

namespace bsde {

enum class SchemeKind { euler, cn2 };
enum class BackendKind { grid, cubature3, cubature5, mc };
enum class TerminalMode { automatic, c1, c2 };
/// Share of the step used for the driver inside the Z-step functional
/// Psi = y' + w * delta * f(t_{i+1}, x', y', z').
enum class PsiWeight { full, half };

const char* to_string(SchemeKind s);
const char* to_string(BackendKind b);
const char* to_string(TerminalMode m);
const char* to_string(PsiWeight w);
SchemeKind scheme_from_string(const std::string& s);
BackendKind backend_from_string(const std::string& s);
TerminalMode terminal_mode_from_string(const std::string& s);
PsiWeight psi_weight_from_string(const std::string& s);

struct BackendConfig {
    BackendKind kind = BackendKind::grid;
    int grid_nodes = 801;
    double grid_width = 12.0;  ///< half-width of the grid in units of the diffusion scale over [0,T]
    int quad_order = 20;
    bool kink_adapted = true;
    std::size_t mc_samples = 2000;
    std::uint64_t seed = 20240611;
    std::size_t tree_budget = CubatureTree::kDefaultBudget;
};

struct SchemeConfig {
    SchemeKind scheme = SchemeKind::cn2;
    TerminalMode terminal = TerminalMode::automatic;
    PsiWeight psi = PsiWeight::full;
    double fp_tol = 1e-12;
    int fp_max_iter = 50;
};

struct Slice {
    double t = 0.0;
    std::vector<double> states;
    std::vector<double> y;
    std::vector<double> z;
};

struct ValueFields {
    Partition partition = Partition::uniform(1, 1.0);
    SchemeKind scheme = SchemeKind::euler;
    BackendKind backend = BackendKind::grid;
    TerminalMode terminal = TerminalMode::c2;  ///< resolved, never automatic
    Chart chart;
    std::vector<Slice> slices;                 ///< index 0..n

    bool is_tree() const { return backend == BackendKind::cubature3 || backend == BackendKind::cubature5; }
    /// Builds the spline representations of grid slices; call after filling slices.
    void build_interpolants();
    double y_at(std::size_t i, double x) const;
    double z_at(std::size_t i, double x) const;

private:
    std::vector<GridFunction> yf_, zf_;
};

double implicit_solve(double c, double z, double t, double x, const Driver& f, double theta_delta,
                      double lipschitz, double tol = 1e-12, int max_iter = 50);

/// Representative states and conditional expectations per time slice.
class StepBackend {
public:
    /// Next-slice values seen from a successor: functions of the state, or per-node
    /// values of level i+1 when the backend is a tree.
    struct Next {
        std::function<double(double)> y, z;
        const std::vector<double>* y_values = nullptr;
        const std::vector<double>* z_values = nullptr;
    };
    using Functional = std::function<double(double x, double y, double z)>;

    virtual ~StepBackend() = default;
    virtual std::vector<double> states(std::size_t i) const = 0;
    virtual void step(std::size_t i, const Next& next, const Functional& G, std::vector<StepExpectations>& out) const = 0;
};

std::unique_ptr<StepBackend> make_backend(const FbsdeProblem& p, const Partition& pi, const BackendConfig& cfg);

/// 21 equally spaced states over the central half of the grid backend's domain.
std::vector<double> default_probes(const FbsdeProblem& p, const BackendConfig& cfg, int count = 21);

ValueFields euler_backward(const FbsdeProblem& p, const Partition& pi, const BackendConfig& backend,
                           const SchemeConfig& cfg = {SchemeKind::euler});
ValueFields second_order_backward(const FbsdeProblem& p, const Partition& pi, const BackendConfig& backend,
                                  const SchemeConfig& cfg = {});
ValueFields run_scheme(const FbsdeProblem& p, const Partition& pi, const BackendConfig& backend,
                       const SchemeConfig& cfg);

struct IndexError {
    std::size_t i;
    double t;
    double err_y;
    double err_z;
    double metric;  ///< max over states of |dy|^2 + delta_{i+1}/(4d) |dz|^2
};

struct ErrorSummary {
    std::vector<IndexError> per_index;  ///< i = 0..n-1
    double err_y = 0.0;                 ///< max over i <= n-2
    double err_z = 0.0;
    double metric = 0.0;
};

/// Grid fields are compared at the probes; tree fields at every node of each level.
ErrorSummary error_metric(const ValueFields& fields, const Reference& ref, const std::vector<double>& probes,
                          int d = 1);

}  // namespace bsde
