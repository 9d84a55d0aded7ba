#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace stm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Disk {
    double radius = 1.0;
    Vec2 center{};
};

// Simple counterclockwise polygon. The mesher additionally requires it to be
// strictly star-shaped with respect to the origin.
struct Polygon {
    std::vector<Vec2> vertices;
};

class DomainSpec {
public:
    using Shape = std::variant<Disk, Polygon>;

    static DomainSpec disk(double radius, Vec2 center = {});
    static DomainSpec polygon(std::vector<Vec2> vertices);
    // Axis-aligned square [-half, half]^2.
    static DomainSpec square(double half_width);

    const Shape& shape() const { return shape_; }
    bool is_disk() const { return std::holds_alternative<Disk>(shape_); }
    // True for a disk whose center is the origin.
    bool is_centered_disk() const;

    double diameter() const;
    // Distance from the origin to the boundary.
    double inradius_at_origin() const;
    bool contains(Vec2 p) const;
    std::string describe() const;

private:
    explicit DomainSpec(Shape shape) : shape_(std::move(shape)) {}
    void validate() const;

    Shape shape_;
};

struct MeshOptions {
    // Radial spacing of the innermost ring. Zero disables grading; otherwise
    // rings grow geometrically by `core_ratio` until the spacing reaches h.
    double core_size = 0.0;
    double core_ratio = 1.15;
    // Absolute radii that must appear as mesh rings. Only honoured on disks
    // centered at the origin.
    std::vector<double> snap_radii;
};

// Conforming P1 triangulation. Node 0 is the origin.
class Mesh {
public:
    using Triangle = std::array<int, 3>;

    Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles, std::vector<bool> boundary);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t triangle_count() const { return triangles_.size(); }
    std::size_t dof_count() const { return dof_nodes_.size(); }

    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    Vec2 node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    bool is_boundary(int i) const { return boundary_[static_cast<std::size_t>(i)]; }
    const std::vector<bool>& boundary_flags() const { return boundary_; }

    // Interior-DOF numbering: node -> dof (or -1 on the boundary) and back.
    int dof_of(int node) const { return node_dof_[static_cast<std::size_t>(node)]; }
    int node_of(int dof) const { return dof_nodes_[static_cast<std::size_t>(dof)]; }
    const std::vector<int>& dof_nodes() const { return dof_nodes_; }

    int origin_node() const { return 0; }
    double max_edge() const { return max_edge_; }
    double min_edge() const { return min_edge_; }
    double area() const;
    double triangle_area(std::size_t t) const;
    // Radii of the rings the mesh was generated from (empty for meshes read from file).
    const std::vector<double>& ring_radii() const { return ring_radii_; }
    void set_ring_radii(std::vector<double> radii) { ring_radii_ = std::move(radii); }

    // Nodal vector (all nodes) from interior coefficients, zero on the boundary.
    std::vector<double> expand(std::span<const double> interior) const;
    std::vector<double> restrict_to_dofs(std::span<const double> nodal) const;

private:
    std::vector<Vec2> nodes_;
    std::vector<Triangle> triangles_;
    std::vector<bool> boundary_;
    std::vector<int> node_dof_;
    std::vector<int> dof_nodes_;
    std::vector<double> ring_radii_;
    double max_edge_ = 0.0;
    double min_edge_ = 0.0;
};

Mesh build_mesh(const DomainSpec& spec, double h, const MeshOptions& options = {});

// Point location with barycentric coordinates, backed by a uniform bucket grid.
class MeshLocator {
public:
    struct Hit {
        std::size_t triangle;
        std::array<double, 3> bary;
    };

    explicit MeshLocator(std::shared_ptr<const Mesh> mesh);

    std::optional<Hit> locate(Vec2 p) const;
    // P1 interpolation of a nodal vector; nullopt outside the mesh.
    std::optional<double> interpolate(std::span<const double> nodal, Vec2 p) const;
    const Mesh& mesh() const { return *mesh_; }

private:
    std::shared_ptr<const Mesh> mesh_;
    Vec2 lo_{};
    double cell_ = 1.0;
    int nx_ = 1;
    int ny_ = 1;
    std::vector<std::vector<std::size_t>> buckets_;
};

// Text serialization. Format:
//   # stm-mesh v1
//   nodes <N> fields <F> [names...]
//   <id> <x> <y> <boundary 0|1> [field values...]
//   triangles <T>
//   <id> <a> <b> <c>
struct NamedField {
    std::string name;
    std::vector<double> nodal;
};

void write_mesh(std::ostream& out, const Mesh& mesh, std::span<const NamedField> fields = {});
Mesh read_mesh(std::istream& in, std::vector<NamedField>* fields = nullptr);

} // namespace stm
