#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace bsde {

enum class MeshKind { uniform, graded };

const char* to_string(MeshKind kind);
MeshKind mesh_kind_from_string(const std::string_view& s);

class Partition {
public:
    const std::vector<double>& points() const { return points_; }
    double t(std::size_t i) const { return points_[i]; }
    /// Step ending at t_i, i = 1..n.
    double delta(std::size_t i) const { return points_[i] - points_[i - 1]; }
    std::size_t n() const { return points_.size() - 1; }
    double T() const { return points_.back(); }
    MeshKind kind() const { return kind_; }
    double beta() const { return beta_; }

    static Partition uniform(int n, double T);
    static Partition graded(int n, double T, double beta = 5.0);

private:
    Partition(std::vector<double> points, MeshKind kind, double beta)
        : points_(std::move(points)), kind_(kind), beta_(beta) {}

    std::vector<double> points_;
    MeshKind kind_;
    double beta_;
};

}  // namespace bsde
