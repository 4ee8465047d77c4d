#ifndef CRT_RANGE_HPP
#define CRT_RANGE_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "crt/cone.hpp"
#include "crt/field.hpp"

namespace crt {

/// Parity of the total dimension n = m + 1.
enum class Parity { even, odd };

const char* to_string(Parity p);
/// Parity implied by a spatial dimension m (n = m + 1).
Parity parity_for(int spatial_dim);
/// The k with m = 2k - 1 (even) or m = 2k (odd).
int order_for(int spatial_dim);

/// (-1)^k tan^{2k-1}(phi) alpha_{2k-1}: the factor in  box^k C[f] = c f_t  (m = 2k - 1).
double even_constant(int k, const ConeParams& cone);
/// sqrt(2) sin(phi) tan^{4k-1}(phi) alpha_{2k} beta_{2k}: the factor in
/// box^{2k} C'[C[f]] = c f_t  (m = 2k). Equals 2 sqrt(2) pi^2 at k = 1, phi = pi/4.
double odd_constant(int k, const ConeParams& cone);

/// f = c^{-1} int_{-inf}^t box^k g dz, for g on R^{2k-1} x R.
ScalarField invert_even(const ScalarField& g, const ConeParams& cone, int k);

/// f = c^{-1} int_{-inf}^t box^{2k} C'[g] dz, for g on R^{2k} x R.
ScalarField invert_odd(const ScalarField& g, const ConeParams& cone, int k,
                       const QuadratureSpec& q = {});

/// Phi * f with Phi = c^{-1} Theta * D: box^k (even) or box^{2k} C' (odd) of the result is f.
ScalarField fundamental_solution_apply(const ScalarField& f, const ConeParams& cone, Parity parity,
                                       int k, const QuadratureSpec& q = {});

/// The filtered field used by the range conditions: box^k g (even) or box^{2k} C'[g] (odd).
ScalarField range_filter(const ScalarField& g, const ConeParams& cone, Parity parity, int k,
                         const QuadratureSpec& q = {});

struct RangeTolerances {
    /// Relative threshold for the support leak (condition 1).
    double support = 0.0;
    /// Relative threshold for the vanishing t-integral (condition 2).
    double integral = 0.0;
    /// Relative threshold used to detect the half-space bound (condition 3).
    double halfspace = 0.0;
    /// Width of the boundary band that must be clean. The band sits just inside
    /// the trusted region (see RangeReport::trusted_fraction).
    std::size_t margin_cells = 2;

    /// max(10 h^2, 1e-6) for every threshold, h the largest grid spacing.
    static RangeTolerances defaults_for(const GridSpec& grid);
};

struct RangeReport {
    Parity parity = Parity::even;
    int k = 1;
    double phi = 0.0;
    RangeTolerances tolerances;

    /// max |F| over the boundary band / max |F|, with F the filtered field; both maxima
    /// are taken over the trusted region only.
    double cond1_residual = 0.0;
    std::optional<SupportBox> filtered_support;
    /// max_x |int F dt| / max_x int |F| dt.
    double cond2_residual = 0.0;
    /// Detected half-space bound; nullopt when the bottom slab is dirty.
    std::optional<double> cond3_t0;

    bool cond1_pass = false;
    bool cond2_pass = false;
    bool cond3_pass = false;

    /// Share of grid cells on which (1) and (2) were evaluated. The rest sit within
    /// reach of one-sided stencils or, in the odd case, need C' data from outside the window.
    double trusted_fraction = 0.0;
    std::vector<std::size_t> counts;
    std::vector<double> spacing;

    bool all_pass() const { return cond1_pass && cond2_pass && cond3_pass; }
    std::string to_text() const;
    /// Machine-readable key=value lines.
    std::string to_kv() const;
};

/// Never throws on condition failure; the verdicts carry the outcome.
RangeReport check_range(const ScalarField& g, const ConeParams& cone, Parity parity, int k,
                        const RangeTolerances& tol, const QuadratureSpec& q = {});

/// Least-squares fit of the scalar c in  filtered(C[f]) = c f_t  over an interior box.
struct Calibration {
    double fitted = 0.0;
    double closed_form = 0.0;
    double relative_difference = 0.0;
};

Calibration calibrate(const ScalarField& f, const ScalarField& f_t, const ConeParams& cone,
                      Parity parity, int k, std::size_t interior_margin, const QuadratureSpec& q = {});

}  // namespace crt

#endif
