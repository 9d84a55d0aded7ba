#pragma once

#include "stm/maximizer.hpp"
#include "stm/quadrature.hpp"
#include "stm/spectral.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace stm {

// s(x) = -(1/2pi) log|x|
double log_singularity(Vec2 x);

// G(x) = s(x) + w(x). The regular part w is a P1 field on all nodes (it does
// not vanish on the boundary, where w = -s).
class GreenFunction {
public:
    GreenFunction(std::shared_ptr<const Discretization> disc, std::vector<double> w, double alpha,
                  std::optional<SpectralData> basis);

    double a0() const { return w_[0]; }
    double alpha() const { return alpha_; }
    const std::vector<double>& regular_part() const { return w_; }
    const Mesh& mesh() const { return *disc_->mesh; }
    const std::shared_ptr<const Discretization>& discretization() const { return disc_; }
    const std::optional<SpectralData>& basis() const { return basis_; }
    // psi_i(0) for each sink (empty without a basis).
    std::vector<double> sink_values() const;

    // G at an arbitrary point (nullopt outside the mesh); infinite at 0.
    std::optional<double> operator()(Vec2 x) const;
    // G at node i (infinite at the origin node).
    double at_node(int i) const;
    // Regular remainder psi = w - A0 at node i.
    double remainder_at_node(int i) const { return w_[static_cast<std::size_t>(i)] - a0(); }

    // Integral of G psi for an interior field psi.
    double pair_with(const Vector& psi) const;

    // Diagnostics of the subspace solve: before the E_ell component is
    // removed, the Galerkin equation tested with psi_i must equal its sink
    // pairing; the removed component size is also recorded.
    double sink_pairing_residual = 0.0;
    double orthogonality_correction = 0.0;

private:
    std::shared_ptr<const Discretization> disc_;
    std::vector<double> w_;
    double alpha_;
    std::optional<SpectralData> basis_;
    std::shared_ptr<const MeshLocator> locator_;
};

struct GreenOptions {
    QuadratureOptions quadrature{};
    double resonance_gap = 1e-6; // relative distance to an eigenvalue
    std::optional<double> lambda1; // skip the eigen-solve in full-space mode
};

// Solves -Lap w - alpha w = alpha s [- sum_i psi_i(0) psi_i] with w = -s on
// the boundary. With a subspace the result is made L2-orthogonal to E_ell.
GreenFunction solve_green(std::shared_ptr<const Discretization> disc, double alpha,
                          const Subspace* subspace = nullptr, const GreenOptions& options = {});

inline double a0(const GreenFunction& g) { return g.a0(); }

// Integral of |x|^{-2beta} G^2 over the domain.
double weighted_g_squared(const GreenFunction& g, double beta, const QuadratureOptions& quad = {});

// Mesh text format with a single field `w`, preceded by a comment carrying A0.
void write_green(std::ostream& out, const GreenFunction& g);

} // namespace stm
