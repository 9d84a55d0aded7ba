#include "stm/quadrature.hpp"

#include "stm/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace stm {

namespace {

// Golub-Welsch for the Jacobi weight (1-x)^a (1+x)^b on [-1, 1].
Rule1D golub_welsch_jacobi(int n, double a, double b)
{
    STM_REQUIRE(n >= 1, ConfigError, "quadrature rule needs at least one point");
    STM_REQUIRE(a > -1.0 && b > -1.0, ConfigError, "Jacobi exponents must exceed -1");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    const double ab = a + b;
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + ab;
        J(k, k) = (k == 0 || std::abs(s) < 1e-300) ? (b - a) / (ab + 2.0) : (b * b - a * a) / (s * (s + 2.0));
        if (k >= 1) {
            const double kk = k;
            const double beta = 4.0 * kk * (kk + a) * (kk + b) * (kk + ab) / (s * s * (s + 1.0) * (s - 1.0));
            J(k, k - 1) = J(k - 1, k) = std::sqrt(beta);
        }
    }
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                                std::lgamma(ab + 2.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule1D rule;
    for (int k = 0; k < n; ++k) {
        rule.nodes.push_back(es.eigenvalues()(k));
        const double v0 = es.eigenvectors()(0, k);
        rule.weights.push_back(mu0 * v0 * v0);
    }
    return rule;
}

struct Sub {
    std::array<std::array<double, 3>, 3> bary; // vertices of the sub-triangle in parent barycentrics
};

std::vector<Sub> subdivide(int levels)
{
    std::vector<Sub> subs{Sub{{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}}};
    for (int l = 0; l < levels; ++l) {
        std::vector<Sub> next;
        for (const auto& s : subs) {
            auto mid = [&](int i, int j) {
                std::array<double, 3> m{};
                for (int k = 0; k < 3; ++k) m[static_cast<std::size_t>(k)] = 0.5 * (s.bary[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] + s.bary[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);
                return m;
            };
            const auto m01 = mid(0, 1), m12 = mid(1, 2), m20 = mid(2, 0);
            next.push_back({{s.bary[0], m01, m20}});
            next.push_back({{m01, s.bary[1], m12}});
            next.push_back({{m20, m12, s.bary[2]}});
            next.push_back({{m12, m20, m01}});
        }
        subs = std::move(next);
    }
    return subs;
}

double point_triangle_distance(Vec2 p, Vec2 a, Vec2 b, Vec2 c)
{
    const double d = cross(b - a, c - a);
    const double l1 = cross(p - a, c - a) / d;
    const double l2 = cross(b - a, p - a) / d;
    if (l1 >= 0 && l2 >= 0 && l1 + l2 <= 1) return 0.0;
    auto seg = [](Vec2 q, Vec2 u, Vec2 v) {
        const Vec2 uv = v - u;
        const double t = std::clamp(dot(q - u, uv) / dot(uv, uv), 0.0, 1.0);
        return norm(q - (u + t * uv));
    };
    return std::min({seg(p, a, b), seg(p, b, c), seg(p, c, a)});
}

} // namespace

Rule1D gauss_legendre(int n)
{
    Rule1D r = golub_welsch_jacobi(n, 0.0, 0.0);
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
        r.nodes[k] = 0.5 * (r.nodes[k] + 1.0);
        r.weights[k] *= 0.5;
    }
    return r;
}

Rule1D gauss_jacobi_left(int n, double power)
{
    Rule1D r = golub_welsch_jacobi(n, 0.0, power);
    const double scale = std::pow(2.0, -power - 1.0);
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
        r.nodes[k] = 0.5 * (r.nodes[k] + 1.0);
        r.weights[k] *= scale;
    }
    return r;
}

std::vector<TriangleRulePoint> triangle_rule(int degree)
{
    switch (degree) {
    case 1:
        return {{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 1.0}};
    case 2:
        return {{{2.0 / 3, 1.0 / 6, 1.0 / 6}, 1.0 / 3},
                {{1.0 / 6, 2.0 / 3, 1.0 / 6}, 1.0 / 3},
                {{1.0 / 6, 1.0 / 6, 2.0 / 3}, 1.0 / 3}};
    case 4: {
        const double a = 0.445948490915965, wa = 0.223381589678011;
        const double b = 0.091576213509771, wb = 0.109951743655322;
        return {{{a, a, 1 - 2 * a}, wa}, {{a, 1 - 2 * a, a}, wa}, {{1 - 2 * a, a, a}, wa},
                {{b, b, 1 - 2 * b}, wb}, {{b, 1 - 2 * b, b}, wb}, {{1 - 2 * b, b, b}, wb}};
    }
    case 5: {
        const double a = 0.470142064105115, wa = 0.132394152788506;
        const double b = 0.101286507323456, wb = 0.125939180544827;
        return {{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.225},
                {{a, a, 1 - 2 * a}, wa}, {{a, 1 - 2 * a, a}, wa}, {{1 - 2 * a, a, a}, wa},
                {{b, b, 1 - 2 * b}, wb}, {{b, 1 - 2 * b, b}, wb}, {{1 - 2 * b, b, b}, wb}};
    }
    default:
        throw ConfigError("unsupported triangle rule degree " + std::to_string(degree));
    }
}

SingularQuadrature::SingularQuadrature(const Mesh& mesh, double beta, QuadratureOptions options)
    : mesh_(&mesh), beta_(beta), options_(options)
{
    STM_REQUIRE(beta >= 0.0 && beta < 1.0, ConfigError, "weight exponent beta must lie in [0, 1)");
    STM_REQUIRE(options.polar_depth >= 1, ConfigError, "polar refinement depth must be at least 1");
    STM_REQUIRE(options.radial_points >= 1 && options.angular_points >= 1 && options.near_levels >= 0,
                ConfigError, "invalid quadrature point counts");

    const double power = 1.0 - 2.0 * beta;
    const auto far = triangle_rule(options.far_degree);
    const auto near_subs = subdivide(options.near_levels);
    const Rule1D inner = gauss_jacobi_left(options.radial_points, power);
    const Rule1D radial = gauss_legendre(options.radial_points);
    const Rule1D angular = gauss_legendre(options.angular_points);
    const double delta = std::ldexp(1.0, -options.polar_depth);

    offsets_.reserve(mesh.triangle_count() + 1);
    offsets_.push_back(0);
    node_weights_.assign(mesh.node_count(), 0.0);
    const int origin = mesh.origin_node();

    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const Vec2 v[3] = {mesh.node(tri[0]), mesh.node(tri[1]), mesh.node(tri[2])};
        const auto it = std::find(tri.begin(), tri.end(), origin);
        if (it != tri.end()) {
            const int o = static_cast<int>(it - tri.begin());
            const int i1 = (o + 1) % 3, i2 = (o + 2) % 3;
            const Vec2 p1 = v[i1], p2 = v[i2];
            const double det = std::abs(cross(p1, p2));
            auto emit = [&](double rho, double wr_times_rhopow) {
                for (std::size_t q = 0; q < angular.nodes.size(); ++q) {
                    const double s = angular.nodes[q];
                    const Vec2 y = (1.0 - s) * p1 + s * p2;
                    const double wy = std::pow(norm(y), -2.0 * beta);
                    Point pt;
                    pt.x = rho * y;
                    pt.bary[static_cast<std::size_t>(o)] = 1.0 - rho;
                    pt.bary[static_cast<std::size_t>(i1)] = rho * (1.0 - s);
                    pt.bary[static_cast<std::size_t>(i2)] = rho * s;
                    pt.weight = wr_times_rhopow * angular.weights[q] * wy * det;
                    points_.push_back(pt);
                }
            };
            // innermost interval [0, delta]: rho^{power} absorbed by the Jacobi weight
            const double scale_inner = std::pow(delta, power + 1.0);
            for (std::size_t r = 0; r < inner.nodes.size(); ++r)
                emit(delta * inner.nodes[r], scale_inner * inner.weights[r]);
            for (int level = options.polar_depth - 1; level >= 0; --level) {
                const double lo = std::ldexp(1.0, -level - 1);
                const double hi = std::ldexp(1.0, -level);
                for (std::size_t r = 0; r < radial.nodes.size(); ++r) {
                    const double rho = lo + (hi - lo) * radial.nodes[r];
                    emit(rho, (hi - lo) * radial.weights[r] * std::pow(rho, power));
                }
            }
        } else {
            const double area = std::abs(0.5 * cross(v[1] - v[0], v[2] - v[0]));
            const double diam = std::max({norm(v[1] - v[0]), norm(v[2] - v[1]), norm(v[0] - v[2])});
            const bool near = point_triangle_distance({}, v[0], v[1], v[2]) < options.near_factor * diam;
            const std::vector<Sub> single{Sub{{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}}};
            const auto& subs = near ? near_subs : single;
            const double sub_area = area / static_cast<double>(subs.size());
            for (const auto& sub : subs) {
                for (const auto& rp : far) {
                    Point pt;
                    for (int k = 0; k < 3; ++k) {
                        double b = 0.0;
                        for (int j = 0; j < 3; ++j) b += rp.bary[static_cast<std::size_t>(j)] * sub.bary[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
                        pt.bary[static_cast<std::size_t>(k)] = b;
                    }
                    pt.x = pt.bary[0] * v[0] + pt.bary[1] * v[1] + pt.bary[2] * v[2];
                    const double wx = beta == 0.0 ? 1.0 : std::pow(norm(pt.x), -2.0 * beta);
                    pt.weight = rp.weight * sub_area * wx;
                    points_.push_back(pt);
                }
            }
        }
        for (std::size_t q = offsets_.back(); q < points_.size(); ++q)
            for (int k = 0; k < 3; ++k)
                node_weights_[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])] += points_[q].weight * points_[q].bary[static_cast<std::size_t>(k)];
        offsets_.push_back(points_.size());
    }
}

std::span<const SingularQuadrature::Point> SingularQuadrature::points(std::size_t triangle) const
{
    return {points_.data() + offsets_[triangle], offsets_[triangle + 1] - offsets_[triangle]};
}

double SingularQuadrature::integrate_nodal(std::span<const double> nodal) const
{
    STM_REQUIRE(nodal.size() == node_weights_.size(), ConfigError, "nodal vector has wrong length");
    double s = 0.0;
    for (std::size_t i = 0; i < nodal.size(); ++i) s += node_weights_[i] * nodal[i];
    return s;
}

double SingularQuadrature::integrate(const std::function<double(Vec2)>& f) const
{
    double s = 0.0;
    for (const auto& p : points_) s += p.weight * f(p.x);
    return s;
}

double SingularQuadrature::integrate(const std::function<double(const Point&, std::size_t)>& f) const
{
    double s = 0.0;
    for (std::size_t t = 0; t + 1 < offsets_.size(); ++t)
        for (const auto& p : points(t)) s += p.weight * f(p, t);
    return s;
}

std::vector<double> SingularQuadrature::load_vector(const std::function<double(const Point&, std::size_t)>& f) const
{
    std::vector<double> b(mesh_->node_count(), 0.0);
    for (std::size_t t = 0; t + 1 < offsets_.size(); ++t) {
        const auto& tri = mesh_->triangles()[t];
        for (const auto& p : points(t)) {
            const double v = p.weight * f(p, t);
            for (int k = 0; k < 3; ++k) b[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])] += v * p.bary[static_cast<std::size_t>(k)];
        }
    }
    return b;
}

double integrate_singular(const Mesh& mesh, std::span<const double> nodal, double beta,
                          const QuadratureOptions& options)
{
    return SingularQuadrature(mesh, beta, options).integrate_nodal(nodal);
}

double integrate_singular(const Mesh& mesh, const std::function<double(Vec2)>& f, double beta,
                          const QuadratureOptions& options)
{
    return SingularQuadrature(mesh, beta, options).integrate(f);
}

} // namespace stm
