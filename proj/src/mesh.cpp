#include "bsde/mesh.hpp"

#include <cmath>
#include <string>

#include "bsde/errors.hpp"

namespace bsde {

const char* to_string(MeshKind kind) {
    return kind == MeshKind::uniform ? "uniform" : "graded";
}

MeshKind mesh_kind_from_string(const std::string_view& s) {
    if (s == "uniform") return MeshKind::uniform;
    if (s == "graded") return MeshKind::graded;
    throw InvalidArgument("unknown mesh kind: " + std::string(s));
}

Partition Partition::uniform(int n, double T) {
    if (n < 1) throw InvalidArgument("uniform mesh needs n >= 1");
    if (!(T > 0.0)) throw InvalidArgument("horizon T must be positive");
    std::vector<double> pts(n + 1);
    for (int i = 0; i < n; ++i) pts[i] = T * i / n;
    pts[n] = T;
    return Partition(std::move(pts), MeshKind::uniform, 1.0);
}

Partition Partition::graded(int n, double T, double beta) {
    if (n < 2) throw InvalidArgument("graded mesh needs n >= 2");
    if (!(T > 0.0)) throw InvalidArgument("horizon T must be positive");
    if (!(beta >= 1.0)) throw InvalidArgument("grading exponent beta must be >= 1");
    if (beta == 1.0) {
        Partition p = uniform(n, T);
        p.kind_ = MeshKind::graded;
        return p;
    }
    std::vector<double> pts(n + 1);
    for (int i = 0; i < n; ++i) {
        double s = 1.0 - static_cast<double>(i) / n;
        pts[i] = T * (1.0 - std::pow(s, beta));
    }
    pts[n] = T;
    for (int i = 1; i <= n; ++i)
        if (!(pts[i] > pts[i - 1]))
            throw InvalidArgument("graded mesh steps underflow near T; reduce n or beta");
    return Partition(std::move(pts), MeshKind::graded, beta);
}

}  // namespace bsde
