#pragma once

#include "stm/geometry.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace stm {

// One-dimensional Gauss rules on [0, 1] (Golub-Welsch).
struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

Rule1D gauss_legendre(int n);
// Gauss rule for the weight s^power on [0, 1], power > -1.
Rule1D gauss_jacobi_left(int n, double power);

struct TriangleRulePoint {
    std::array<double, 3> bary;
    double weight; // sums to 1 over the rule
};
// Symmetric rules of degree 1, 2, 4 or 5 on the reference triangle.
std::vector<TriangleRulePoint> triangle_rule(int degree);

struct QuadratureOptions {
    int far_degree = 4;
    // Geometric radial levels on triangles incident to the origin.
    int polar_depth = 30;
    int radial_points = 6;
    int angular_points = 8;
    // Uniform subdivision levels for triangles close to (not touching) the origin.
    int near_levels = 2;
    double near_factor = 2.0;
};

// Quadrature for integrands carrying the weight |x|^{-2 beta}. Triangles
// incident to the origin are integrated in polar coordinates around the
// origin, with a Gauss-Jacobi rule absorbing rho^{1-2beta} on the innermost
// radial interval and geometric radial refinement outside it.
class SingularQuadrature {
public:
    struct Point {
        Vec2 x;
        std::array<double, 3> bary; // w.r.t. the owning triangle's vertices
        double weight;              // includes |x|^{-2beta} and the area element
    };

    SingularQuadrature(const Mesh& mesh, double beta, QuadratureOptions options = {});

    double beta() const { return beta_; }
    const QuadratureOptions& options() const { return options_; }
    std::span<const Point> points(std::size_t triangle) const;
    std::size_t triangle_count() const { return offsets_.size() - 1; }
    const Mesh& mesh() const { return *mesh_; }

    // m_i = integral of |x|^{-2beta} phi_i over the domain, all nodes.
    const std::vector<double>& node_weights() const { return node_weights_; }
    // Integral of |x|^{-2beta} times the P1 interpolant of nodal values.
    double integrate_nodal(std::span<const double> nodal) const;
    // Integral of |x|^{-2beta} f(x).
    double integrate(const std::function<double(Vec2)>& f) const;
    // Integral of |x|^{-2beta} f(point, triangle); gives access to barycentrics.
    double integrate(const std::function<double(const Point&, std::size_t)>& f) const;
    // Load vector b_i = integral of |x|^{-2beta} f phi_i, all nodes.
    std::vector<double> load_vector(const std::function<double(const Point&, std::size_t)>& f) const;

private:
    const Mesh* mesh_;
    double beta_;
    QuadratureOptions options_;
    std::vector<std::size_t> offsets_;
    std::vector<Point> points_;
    std::vector<double> node_weights_;
};

// Convenience wrappers building a SingularQuadrature internally.
double integrate_singular(const Mesh& mesh, std::span<const double> nodal, double beta,
                          const QuadratureOptions& options = {});
double integrate_singular(const Mesh& mesh, const std::function<double(Vec2)>& f, double beta,
                          const QuadratureOptions& options = {});

} // namespace stm
