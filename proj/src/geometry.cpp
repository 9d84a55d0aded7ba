#include "stm/geometry.hpp"

#include "stm/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace stm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double polygon_signed_area(const std::vector<Vec2>& v)
{
    double a = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) a += cross(v[i], v[(i + 1) % v.size()]);
    return 0.5 * a;
}

// Winding angle of the polygon around the origin.
double winding_angle(const std::vector<Vec2>& v)
{
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 a = v[i];
        const Vec2 b = v[(i + 1) % v.size()];
        total += std::atan2(cross(a, b), dot(a, b));
    }
    return total;
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b)
{
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (a + t * ab));
}

} // namespace

// ---------------------------------------------------------------------------
// DomainSpec

DomainSpec DomainSpec::disk(double radius, Vec2 center)
{
    DomainSpec spec(Disk{radius, center});
    spec.validate();
    return spec;
}

DomainSpec DomainSpec::polygon(std::vector<Vec2> vertices)
{
    DomainSpec spec(Polygon{std::move(vertices)});
    spec.validate();
    return spec;
}

DomainSpec DomainSpec::square(double half_width)
{
    const double a = half_width;
    return polygon({{-a, -a}, {a, -a}, {a, a}, {-a, a}});
}

void DomainSpec::validate() const
{
    if (const auto* d = std::get_if<Disk>(&shape_)) {
        STM_REQUIRE(std::isfinite(d->radius) && d->radius > 0.0, GeometryError,
                    "disk radius must be positive");
        STM_REQUIRE(norm(d->center) < d->radius, GeometryError,
                    "origin must lie strictly inside the disk");
        return;
    }
    const auto& v = std::get<Polygon>(shape_).vertices;
    STM_REQUIRE(v.size() >= 3, GeometryError, "degenerate polygon: fewer than 3 vertices");
    for (std::size_t i = 0; i < v.size(); ++i) {
        STM_REQUIRE(norm(v[(i + 1) % v.size()] - v[i]) > 0.0, GeometryError,
                    "degenerate polygon: repeated vertex");
    }
    const double area = polygon_signed_area(v);
    STM_REQUIRE(std::abs(area) > 0.0, GeometryError, "degenerate polygon: zero area");
    STM_REQUIRE(area > 0.0, GeometryError, "polygon must be counterclockwise");
    const double wind = winding_angle(v);
    STM_REQUIRE(std::abs(wind - kTwoPi) < 1e-6, GeometryError, "origin outside domain");
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 a = v[i];
        const Vec2 b = v[(i + 1) % v.size()];
        STM_REQUIRE(segment_distance({}, a, b) > 0.0, GeometryError,
                    "origin lies on the polygon boundary");
        STM_REQUIRE(cross(a, b) > 0.0, GeometryError,
                    "polygon is not star-shaped with respect to the origin");
    }
}

bool DomainSpec::is_centered_disk() const
{
    const auto* d = std::get_if<Disk>(&shape_);
    return d != nullptr && d->center.x == 0.0 && d->center.y == 0.0;
}

double DomainSpec::diameter() const
{
    if (const auto* d = std::get_if<Disk>(&shape_)) return 2.0 * d->radius;
    const auto& v = std::get<Polygon>(shape_).vertices;
    double diam = 0.0;
    for (const auto& a : v)
        for (const auto& b : v) diam = std::max(diam, norm(a - b));
    return diam;
}

double DomainSpec::inradius_at_origin() const
{
    if (const auto* d = std::get_if<Disk>(&shape_)) return d->radius - norm(d->center);
    const auto& v = std::get<Polygon>(shape_).vertices;
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) r = std::min(r, segment_distance({}, v[i], v[(i + 1) % v.size()]));
    return r;
}

bool DomainSpec::contains(Vec2 p) const
{
    if (const auto* d = std::get_if<Disk>(&shape_)) return norm(p - d->center) < d->radius;
    const auto& v = std::get<Polygon>(shape_).vertices;
    bool inside = false;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if ((v[i].y > p.y) != (v[j].y > p.y) &&
            p.x < (v[j].x - v[i].x) * (p.y - v[i].y) / (v[j].y - v[i].y) + v[i].x)
            inside = !inside;
    }
    return inside;
}

std::string DomainSpec::describe() const
{
    std::ostringstream os;
    os << std::setprecision(17);
    if (const auto* d = std::get_if<Disk>(&shape_)) {
        os << "disk(radius=" << d->radius << ", center=" << d->center.x << "," << d->center.y << ")";
    } else {
        os << "polygon(";
        const auto& v = std::get<Polygon>(shape_).vertices;
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ";" : "") << v[i].x << "," << v[i].y;
        os << ")";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Mesh

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles, std::vector<bool> boundary)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), boundary_(std::move(boundary))
{
    STM_REQUIRE(!nodes_.empty() && nodes_.size() == boundary_.size(), GeometryError,
                "mesh node/boundary arrays mismatch");
    STM_REQUIRE(nodes_[0] == Vec2{}, GeometryError, "node 0 must be the origin");
    STM_REQUIRE(!boundary_[0], GeometryError, "origin must be an interior node");
    node_dof_.assign(nodes_.size(), -1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!boundary_[i]) {
            node_dof_[i] = static_cast<int>(dof_nodes_.size());
            dof_nodes_.push_back(static_cast<int>(i));
        }
    }
    max_edge_ = 0.0;
    min_edge_ = std::numeric_limits<double>::infinity();
    for (const auto& t : triangles_) {
        for (int k = 0; k < 3; ++k) {
            STM_REQUIRE(t[k] >= 0 && static_cast<std::size_t>(t[k]) < nodes_.size(), GeometryError,
                        "triangle references a missing node");
            const double e = norm(node(t[k]) - node(t[(k + 1) % 3]));
            max_edge_ = std::max(max_edge_, e);
            min_edge_ = std::min(min_edge_, e);
        }
    }
}

double Mesh::triangle_area(std::size_t t) const
{
    const auto& tri = triangles_[t];
    return 0.5 * cross(node(tri[1]) - node(tri[0]), node(tri[2]) - node(tri[0]));
}

double Mesh::area() const
{
    double a = 0.0;
    for (std::size_t t = 0; t < triangles_.size(); ++t) a += triangle_area(t);
    return a;
}

std::vector<double> Mesh::expand(std::span<const double> interior) const
{
    STM_REQUIRE(interior.size() == dof_count(), ConfigError, "interior vector has wrong length");
    std::vector<double> out(node_count(), 0.0);
    for (std::size_t d = 0; d < dof_nodes_.size(); ++d) out[static_cast<std::size_t>(dof_nodes_[d])] = interior[d];
    return out;
}

std::vector<double> Mesh::restrict_to_dofs(std::span<const double> nodal) const
{
    STM_REQUIRE(nodal.size() == node_count(), ConfigError, "nodal vector has wrong length");
    std::vector<double> out(dof_count());
    for (std::size_t d = 0; d < dof_nodes_.size(); ++d) out[d] = nodal[static_cast<std::size_t>(dof_nodes_[d])];
    return out;
}

// ---------------------------------------------------------------------------
// Ring mesher for domains star-shaped with respect to the origin.

namespace {

struct Ring {
    std::vector<int> ids;       // node ids, ascending polar angle
    std::vector<double> angles; // in [0, 2pi), ascending
};

double local_spacing(double r, double h, const MeshOptions& opt)
{
    if (opt.core_size <= 0.0 || opt.core_size >= h) return h;
    return std::clamp(r * (opt.core_ratio - 1.0), opt.core_size, h);
}

std::vector<double> ring_radii(double r_max, double h, const MeshOptions& opt, bool snap)
{
    std::vector<double> radii{0.0};
    double r = 0.0;
    for (;;) {
        const double s = local_spacing(r, h, opt);
        if (r + s > r_max - 0.5 * local_spacing(r + s, h, opt) - 1e-12 * r_max) break;
        r += s;
        radii.push_back(r);
    }
    radii.push_back(r_max);

    if (snap && !opt.snap_radii.empty()) {
        std::vector<std::pair<double, bool>> rings;
        for (double q : radii) rings.emplace_back(q, false);
        for (double q : opt.snap_radii) {
            STM_REQUIRE(q > 0.0 && q < r_max, GeometryError, "snap radius outside the domain");
            rings.emplace_back(q, true);
        }
        std::sort(rings.begin(), rings.end());
        // Drop unsnapped rings crowding a snapped one.
        std::vector<std::pair<double, bool>> kept;
        for (std::size_t i = 0; i < rings.size(); ++i) {
            const auto [q, snapped] = rings[i];
            const bool is_end = (i == 0) || (i + 1 == rings.size());
            if (!snapped && !is_end) {
                const double s = local_spacing(q, std::numeric_limits<double>::max(), opt);
                const double tol = 0.4 * std::min(s, r_max);
                bool crowded = false;
                for (std::size_t j = 0; j < rings.size(); ++j) {
                    if (rings[j].second && std::abs(rings[j].first - q) < tol) crowded = true;
                }
                if (crowded) continue;
            }
            if (!kept.empty() && std::abs(kept.back().first - q) <= 1e-14 * r_max) {
                kept.back().second = kept.back().second || snapped;
                continue;
            }
            kept.push_back(rings[i]);
        }
        radii.clear();
        for (const auto& [q, s] : kept) radii.push_back(q);
        radii.back() = r_max;
        radii.front() = 0.0;
    }
    return radii;
}

// Samples `n` points on the boundary curve (counterclockwise).
std::vector<Vec2> sample_boundary(const DomainSpec& spec, int n, bool half_offset)
{
    std::vector<Vec2> pts;
    if (const auto* d = std::get_if<Disk>(&spec.shape())) {
        pts.reserve(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            const double phi = kTwoPi * (j + (half_offset ? 0.5 : 0.0)) / n;
            pts.push_back({d->center.x + d->radius * std::cos(phi), d->center.y + d->radius * std::sin(phi)});
        }
        return pts;
    }
    const auto& v = std::get<Polygon>(spec.shape()).vertices;
    double perimeter = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) perimeter += norm(v[(i + 1) % v.size()] - v[i]);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 a = v[i];
        const Vec2 b = v[(i + 1) % v.size()];
        const int ne = std::max(1, static_cast<int>(std::lround(n * norm(b - a) / perimeter)));
        for (int j = 0; j < ne; ++j) pts.push_back(a + (static_cast<double>(j) / ne) * (b - a));
    }
    return pts;
}

double boundary_perimeter(const DomainSpec& spec)
{
    if (const auto* d = std::get_if<Disk>(&spec.shape())) return kTwoPi * d->radius;
    const auto& v = std::get<Polygon>(spec.shape()).vertices;
    double p = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) p += norm(v[(i + 1) % v.size()] - v[i]);
    return p;
}

double boundary_max_radius(const DomainSpec& spec)
{
    if (const auto* d = std::get_if<Disk>(&spec.shape())) return norm(d->center) + d->radius;
    double r = 0.0;
    for (const auto& p : std::get<Polygon>(spec.shape()).vertices) r = std::max(r, norm(p));
    return r;
}

Ring make_ring(std::vector<Vec2>& nodes, const std::vector<Vec2>& pts)
{
    Ring ring;
    std::vector<std::pair<double, int>> order;
    for (const auto& p : pts) {
        double a = std::atan2(p.y, p.x);
        if (a < 0.0) a += kTwoPi;
        if (a >= kTwoPi) a -= kTwoPi;
        order.emplace_back(a, static_cast<int>(nodes.size()));
        nodes.push_back(p);
    }
    std::sort(order.begin(), order.end());
    for (const auto& [a, id] : order) {
        ring.angles.push_back(a);
        ring.ids.push_back(id);
    }
    return ring;
}

void stitch(const Ring& a, const Ring& b, std::vector<Mesh::Triangle>& tris)
{
    constexpr double tie = 1e-9;
    const std::size_t na = a.ids.size();
    const std::size_t nb = b.ids.size();
    // b index whose angle is the largest one not exceeding a.angles[0]
    std::size_t j0 = nb - 1;
    double shift = -kTwoPi;
    for (std::size_t j = 0; j < nb; ++j) {
        if (b.angles[j] <= a.angles[0] + tie) {
            j0 = j;
            shift = 0.0;
        }
    }
    auto a_angle = [&](std::size_t i) { return i < na ? a.angles[i] : a.angles[0] + kTwoPi; };
    auto b_angle = [&](std::size_t k) {
        const std::size_t idx = (j0 + k) % nb;
        const double wraps = static_cast<double>((j0 + k) / nb);
        return b.angles[idx] + kTwoPi * wraps + shift;
    };
    auto a_id = [&](std::size_t i) { return a.ids[i % na]; };
    auto b_id = [&](std::size_t k) { return b.ids[(j0 + k) % nb]; };

    std::size_t i = 0;
    std::size_t k = 0;
    while (i < na || k < nb) {
        const bool advance_a = (k == nb) || (i < na && a_angle(i + 1) <= b_angle(k + 1) + tie);
        if (advance_a) {
            tris.push_back({a_id(i), b_id(k), a_id(i + 1)});
            ++i;
        } else {
            tris.push_back({a_id(i), b_id(k), b_id(k + 1)});
            ++k;
        }
    }
}

int round_to_multiple(double x, int m)
{
    return std::max(m, m * static_cast<int>(std::lround(x / m)));
}

} // namespace

Mesh build_mesh(const DomainSpec& spec, double h, const MeshOptions& options)
{
    STM_REQUIRE(std::isfinite(h) && h > 0.0, ConfigError, "mesh size must be positive");
    STM_REQUIRE(h < spec.diameter(), ConfigError, "mesh size must be smaller than the domain diameter");
    STM_REQUIRE(options.core_ratio > 1.0, ConfigError, "core_ratio must exceed 1");

    const bool centered = spec.is_centered_disk();
    const double r_max = boundary_max_radius(spec);
    const double perimeter = boundary_perimeter(spec);
    const std::vector<double> radii = ring_radii(r_max, h, options, centered);

    std::vector<Vec2> nodes{{0.0, 0.0}};
    std::vector<Mesh::Triangle> tris;
    Ring previous;
    int prev_count = 0;
    for (std::size_t k = 1; k < radii.size(); ++k) {
        const double t = radii[k] / r_max;
        const double spacing = std::min(local_spacing(radii[k], h, options), radii[k] - radii[k - 1]);
        double desired = t * perimeter / std::max(spacing, 1e-300);
        int n = centered ? round_to_multiple(desired, 6) : std::max(3, static_cast<int>(std::lround(desired)));
        n = std::max(n, prev_count);
        if (prev_count > 0) n = std::min(n, 2 * prev_count);
        std::vector<Vec2> pts = sample_boundary(spec, n, centered && (k % 2 == 1));
        for (auto& p : pts) p = t * p;
        if (k + 1 == radii.size() && centered) {
            // exact boundary radius
            for (auto& p : pts) p = (r_max / norm(p)) * p;
        }
        Ring ring = make_ring(nodes, pts);
        if (k == 1) {
            for (std::size_t j = 0; j < ring.ids.size(); ++j)
                tris.push_back({0, ring.ids[j], ring.ids[(j + 1) % ring.ids.size()]});
        } else {
            stitch(previous, ring, tris);
        }
        prev_count = static_cast<int>(ring.ids.size());
        previous = std::move(ring);
    }

    std::vector<bool> boundary(nodes.size(), false);
    for (int id : previous.ids) boundary[static_cast<std::size_t>(id)] = true;

    Mesh mesh(std::move(nodes), std::move(tris), std::move(boundary));
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const double scale = std::max({norm(mesh.node(tri[0]) - mesh.node(tri[1])),
                                       norm(mesh.node(tri[1]) - mesh.node(tri[2])),
                                       norm(mesh.node(tri[2]) - mesh.node(tri[0]))});
        if (!(mesh.triangle_area(t) > 1e-12 * scale * scale))
            throw GeometryError("ring triangulation produced an inverted element; refine h");
    }
    mesh.set_ring_radii(radii);
    return mesh;
}

// ---------------------------------------------------------------------------
// MeshLocator

MeshLocator::MeshLocator(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh))
{
    double xmin = 1e300, ymin = 1e300, xmax = -1e300, ymax = -1e300;
    for (const auto& p : mesh_->nodes()) {
        xmin = std::min(xmin, p.x);
        ymin = std::min(ymin, p.y);
        xmax = std::max(xmax, p.x);
        ymax = std::max(ymax, p.y);
    }
    const double w = std::max(xmax - xmin, 1e-300);
    const double hgt = std::max(ymax - ymin, 1e-300);
    const double n = std::max<double>(1.0, static_cast<double>(mesh_->triangle_count()));
    cell_ = std::sqrt(w * hgt / n) * 1.5;
    nx_ = std::max(1, static_cast<int>(std::ceil(w / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil(hgt / cell_)));
    lo_ = {xmin, ymin};
    buckets_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), {});
    for (std::size_t t = 0; t < mesh_->triangle_count(); ++t) {
        const auto& tri = mesh_->triangles()[t];
        double bx0 = 1e300, by0 = 1e300, bx1 = -1e300, by1 = -1e300;
        for (int v : tri) {
            const Vec2 p = mesh_->node(v);
            bx0 = std::min(bx0, p.x);
            by0 = std::min(by0, p.y);
            bx1 = std::max(bx1, p.x);
            by1 = std::max(by1, p.y);
        }
        const int i0 = std::clamp(static_cast<int>((bx0 - lo_.x) / cell_), 0, nx_ - 1);
        const int i1 = std::clamp(static_cast<int>((bx1 - lo_.x) / cell_), 0, nx_ - 1);
        const int j0 = std::clamp(static_cast<int>((by0 - lo_.y) / cell_), 0, ny_ - 1);
        const int j1 = std::clamp(static_cast<int>((by1 - lo_.y) / cell_), 0, ny_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                buckets_[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i)].push_back(t);
    }
}

std::optional<MeshLocator::Hit> MeshLocator::locate(Vec2 p) const
{
    const int i = static_cast<int>(std::floor((p.x - lo_.x) / cell_));
    const int j = static_cast<int>(std::floor((p.y - lo_.y) / cell_));
    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return std::nullopt;
    const auto& bucket = buckets_[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i)];
    std::optional<Hit> best;
    double best_min = -1e300;
    for (std::size_t t : bucket) {
        const auto& tri = mesh_->triangles()[t];
        const Vec2 a = mesh_->node(tri[0]);
        const Vec2 b = mesh_->node(tri[1]);
        const Vec2 c = mesh_->node(tri[2]);
        const double det = cross(b - a, c - a);
        const double l1 = cross(p - a, c - a) / det;
        const double l2 = cross(b - a, p - a) / det;
        const double l0 = 1.0 - l1 - l2;
        const double m = std::min({l0, l1, l2});
        if (m >= 0.0) return Hit{t, {l0, l1, l2}};
        if (m > best_min) {
            best_min = m;
            best = Hit{t, {l0, l1, l2}};
        }
    }
    // accept points on edges up to round-off
    if (best && best_min > -1e-10) return best;
    return std::nullopt;
}

std::optional<double> MeshLocator::interpolate(std::span<const double> nodal, Vec2 p) const
{
    const auto hit = locate(p);
    if (!hit) return std::nullopt;
    const auto& tri = mesh_->triangles()[hit->triangle];
    double v = 0.0;
    for (int k = 0; k < 3; ++k) v += hit->bary[static_cast<std::size_t>(k)] * nodal[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
    return v;
}

// ---------------------------------------------------------------------------
// Text format

void write_mesh(std::ostream& out, const Mesh& mesh, std::span<const NamedField> fields)
{
    for (const auto& f : fields)
        STM_REQUIRE(f.nodal.size() == mesh.node_count(), ConfigError, "field '" + f.name + "' has wrong length");
    out << "# stm-mesh v1\n";
    out << "# node rows: id x y boundary(0|1) [field values]; triangle rows: id a b c (counterclockwise)\n";
    out << std::setprecision(17);
    out << "nodes " << mesh.node_count() << " fields " << fields.size();
    for (const auto& f : fields) out << ' ' << f.name;
    out << '\n';
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        const Vec2 p = mesh.node(static_cast<int>(i));
        out << i << ' ' << p.x << ' ' << p.y << ' ' << (mesh.is_boundary(static_cast<int>(i)) ? 1 : 0);
        for (const auto& f : fields) out << ' ' << f.nodal[i];
        out << '\n';
    }
    out << "triangles " << mesh.triangle_count() << '\n';
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        out << t << ' ' << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
    }
}

Mesh read_mesh(std::istream& in, std::vector<NamedField>* fields)
{
    std::string line;
    auto next_line = [&]() -> std::string {
        while (std::getline(in, line)) {
            if (!line.empty() && line[0] != '#') return line;
        }
        throw GeometryError("unexpected end of mesh file");
    };
    std::istringstream header(next_line());
    std::string tag, ftag;
    std::size_t n = 0, nf = 0;
    header >> tag >> n >> ftag >> nf;
    STM_REQUIRE(tag == "nodes" && ftag == "fields", GeometryError, "malformed mesh header");
    std::vector<NamedField> local(nf);
    for (auto& f : local) {
        header >> f.name;
        f.nodal.resize(n);
    }
    std::vector<Vec2> nodes(n);
    std::vector<bool> boundary(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::istringstream row(next_line());
        std::size_t id = 0;
        int b = 0;
        row >> id >> nodes[i].x >> nodes[i].y >> b;
        STM_REQUIRE(row && id == i, GeometryError, "malformed node row");
        boundary[i] = b != 0;
        for (auto& f : local) row >> f.nodal[i];
    }
    std::istringstream th(next_line());
    std::size_t nt = 0;
    th >> tag >> nt;
    STM_REQUIRE(tag == "triangles", GeometryError, "malformed triangle header");
    std::vector<Mesh::Triangle> tris(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        std::istringstream row(next_line());
        std::size_t id = 0;
        row >> id >> tris[t][0] >> tris[t][1] >> tris[t][2];
        STM_REQUIRE(row && id == t, GeometryError, "malformed triangle row");
    }
    if (fields) *fields = std::move(local);
    return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
}

} // namespace stm
