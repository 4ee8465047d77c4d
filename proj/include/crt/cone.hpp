#ifndef CRT_CONE_HPP
#define CRT_CONE_HPP

#include "crt/field.hpp"

namespace crt {

/// Cone with axis e_n (the t-direction) and half-opening angle phi in (0, pi/2).
class ConeParams {
public:
    explicit ConeParams(double half_opening);

    /// The right-angle cone, phi = pi/4.
    static ConeParams right_angle();

    double half_opening() const { return phi_; }
    double tan_phi() const { return tan_; }
    double cot_phi() const { return 1.0 / tan_; }
    double sin_phi() const;

private:
    double phi_;
    double tan_;
};

enum class Interpolation { linear = 1, cubic = 3 };

enum class KernelSmoothing {
    /// Point evaluation on the cone, interpolated along t.
    none,
    /// Spread the cone over a t-hat of half-width cot(phi) * h_x when that exceeds one
    /// t cell, so the discrete kernel is resolved no finer in t than the spatial lattice allows.
    mesh_matched,
};

struct QuadratureSpec {
    Interpolation order = Interpolation::linear;
    KernelSmoothing smoothing = KernelSmoothing::mesh_matched;
};

struct ForwardOptions {
    /// Evaluate f at t + cot(phi)|y| instead of t - cot(phi)|y| (cone opening downward).
    bool flip_cone = false;
    /// Multiply by 1/sin(phi), turning the dy measure into cone surface measure.
    bool surface_measure = false;
    /// Reject inputs whose support reaches the grid boundary. When false, samples
    /// outside the grid are silently treated as zero (windowed data).
    bool require_compact_support = true;
};

/**
 * Conical Radon transform g = f * D_phi by direct quadrature:
 *
 *   g(x, t) = sum_y f(x - y, t - cot(phi)|y|) (dy)^m
 *
 * with y ranging over grid offsets and f interpolated along t. The output
 * lives on the input grid. Samples of f outside the grid are taken as zero,
 * so f must vanish near the grid boundary (throws DomainError otherwise,
 * naming the padding required).
 */
ScalarField forward_crt(const ScalarField& f, const ConeParams& cone, const QuadratureSpec& q = {},
                        const ForwardOptions& options = {});

/**
 * Weighted transform with weight |(y, cot(phi)|y|)|^{-1} = sin(phi)/|y| on the cone.
 * Requires m >= 2. The y = 0 cell uses a lattice-corrected weight when the
 * spatial spacings are equal and the exact integral over the inscribed ball
 * otherwise.
 */
ScalarField weighted_forward_crt(const ScalarField& f, const ConeParams& cone,
                                 const QuadratureSpec& q = {}, const ForwardOptions& options = {});

/// Quadrature weight assigned to the vertex cell of the weighted transform.
double weighted_vertex_weight(const GridSpec& grid, const ConeParams& cone);

/// Half-width in t cells of the kernel hat; 1 means plain interpolation.
/// Interpolation order only matters when this is 1.
double kernel_spread(const GridSpec& grid, const ConeParams& cone, const QuadratureSpec& q);

/// Cells of zero guard required between the support of f and the grid boundary.
std::size_t required_guard_cells(const QuadratureSpec& q);

/// Vertical extent cot(phi) * (spatial diameter of the grid), the farthest a cone shadow reaches.
double cone_reach(const GridSpec& grid, const ConeParams& cone);

}  // namespace crt

#endif
