#ifndef CRT_PHANTOMS_HPP
#define CRT_PHANTOMS_HPP

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "crt/cone.hpp"
#include "crt/field.hpp"

namespace crt {

enum class PhantomKind {
    /// amplitude * exp(1 - 1/(1 - r^2)) for r < 1, else 0. Genuinely C_0^infinity.
    bump,
    /// amplitude * exp(-r^2 / 2); treated as supported within r <= 8.
    gaussian,
};

/// One blob; radii are per axis (spatial axes then t), r is the scaled distance to center.
struct Blob {
    std::vector<double> center;
    std::vector<double> radii;
    double amplitude = 1.0;
};

struct PhantomSpec {
    PhantomKind kind = PhantomKind::bump;
    int spatial_dim = 1;
    std::vector<Blob> blobs;

    /// Single round blob of the given radius on every axis.
    static PhantomSpec single(PhantomKind kind, std::vector<double> center, double radius,
                              double amplitude = 1.0);

    double value(std::span<const double> point) const;
    /// Analytic d/dt of value().
    double value_dt(std::span<const double> point) const;
    /// Per-axis [lo, hi] bounds of the support.
    std::vector<double> lower_bounds() const;
    std::vector<double> upper_bounds() const;
};

/// Whether the support sits inside the grid with `margin_cells` of zero guard on every side.
bool fits(const PhantomSpec& spec, const GridSpec& grid, std::size_t margin_cells = 1);

ScalarField render_phantom(const PhantomSpec& spec, const GridSpec& grid, std::size_t margin_cells = 1);
ScalarField render_phantom_dt(const PhantomSpec& spec, const GridSpec& grid,
                              std::size_t margin_cells = 1);

// ---------------------------------------------------------------------------
// Independent oracles. Nothing here shares code with the grid transforms.

/// Adaptive Simpson with Richardson correction; abs_tol is the target error.
double adaptive_simpson(const std::function<double(double)>& fn, double a, double b, double abs_tol,
                        int initial_panels = 16);

struct OracleQuadrature {
    /// Relative accuracy target for each nested integral.
    double rel_tol = 1e-10;
    /// Initial radial panels; doubling it must not move results (the self-convergence gate).
    int refinement = 32;
};

enum class OracleKernel { plain, weighted };

/// Direct quadrature of  int f(x - y, t - cot(phi)|y|) w(y) dy  with the analytic phantom,
/// w = 1 (plain) or sin(phi)/|y| (weighted). One value per point (x..., t).
std::vector<double> oracle_forward_crt(const PhantomSpec& spec,
                                       const std::vector<std::vector<double>>& points,
                                       const ConeParams& cone, const OracleQuadrature& quad = {},
                                       OracleKernel kernel = OracleKernel::plain);

/// Damped radial integral for the symbol of D at phi = pi/4, sigma = -i tau:
///   m=1: 2 int cos(w r) e^{-tau r} dr,  m=2: 2 pi int J0(w r) e^{-tau r} r dr,
///   m=3: 4 pi int sinc(w r) e^{-tau r} r^2 dr,  truncated at r = 40/tau.
std::complex<double> oracle_symbol(double omega_mag, double tau, int m, double rel_tol = 1e-13);

}  // namespace crt

#endif
