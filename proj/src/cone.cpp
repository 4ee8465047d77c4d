#include "crt/cone.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "crt/error.hpp"
#include "crt/parallel.hpp"

namespace crt {

namespace {

// Regularized lattice sums  sum_{j in Z^m, j != 0} |j|^{-1}  (Epstein zeta at s = 1).
// For m = 2 this is 4 zeta(1/2) beta(1/2).
constexpr double kLatticeZeta2 = -3.900264920001956;
constexpr double kLatticeZeta3 = -2.837297479480620;

constexpr double kSnap = 1e-9;

// Stencil along t for one spatial offset, with the quadrature weight folded in:
// out[n] += sum_k pool[first_coef + k] * src[n - (first_shift + k)].
struct OffsetStencil {
    int first_shift = 0;
    int taps = 0;
    std::size_t first_coef = 0;
};

// Appends the weights that sample f(t - shift_cells * ht) to `pool`.
// `spread` >= 1 is the half-width, in t cells, of the hat that replaces the
// point evaluation; spread = 1 is linear interpolation.
OffsetStencil make_stencil(double shift_cells, double weight, Interpolation order, double spread,
                           std::vector<double>& pool) {
    OffsetStencil s;
    s.first_coef = pool.size();
    if (spread > 1.0 + kSnap) {
        const long lo = static_cast<long>(std::floor(shift_cells - spread)) + 1;
        const long hi = static_cast<long>(std::ceil(shift_cells + spread)) - 1;
        std::vector<double> c;
        double sum = 0.0;
        for (long n = lo; n <= hi; ++n) {
            const double v = std::max(0.0, 1.0 - std::abs(static_cast<double>(n) - shift_cells) / spread);
            c.push_back(v);
            sum += v;
        }
        // Normalize, then tilt so the first moment vanishes (exact for linear f).
        double m1 = 0.0;
        double m2 = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            c[k] /= sum;
            const double d = static_cast<double>(lo) + static_cast<double>(k) - shift_cells;
            m1 += c[k] * d;
            m2 += c[k] * d * d;
        }
        const double tilt = -m1 / m2;
        const double renorm = 1.0 / (1.0 + tilt * m1);
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double d = static_cast<double>(lo) + static_cast<double>(k) - shift_cells;
            pool.push_back(weight * renorm * c[k] * (1.0 + tilt * d));
        }
        s.first_shift = static_cast<int>(lo);
        s.taps = static_cast<int>(c.size());
        return s;
    }

    double n0 = std::floor(shift_cells);
    double theta = shift_cells - n0;
    if (theta < kSnap) {
        theta = 0.0;
    } else if (1.0 - theta < kSnap) {
        theta = 0.0;
        n0 += 1.0;
    }
    const int base = static_cast<int>(n0);
    if (theta == 0.0) {
        s.first_shift = base;
        s.taps = 1;
        pool.push_back(weight);
        return s;
    }
    if (order == Interpolation::linear) {
        s.first_shift = base;
        s.taps = 2;
        pool.push_back(weight * (1.0 - theta));
        pool.push_back(weight * theta);
        return s;
    }
    // Cubic Lagrange on the nodes n-n0+1, n-n0, n-n0-1, n-n0-2.
    const double u = 1.0 - theta;
    s.first_shift = base - 1;
    s.taps = 4;
    pool.push_back(weight * (u + 1.0) * u * (u - 1.0) / 6.0);
    pool.push_back(weight * -(u + 1.0) * u * (u - 2.0) / 2.0);
    pool.push_back(weight * (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0);
    pool.push_back(weight * -u * (u - 1.0) * (u - 2.0) / 6.0);
    return s;
}

void check_guard(const ScalarField& f, const QuadratureSpec& q, bool flip) {
    const double peak = linf_norm(f);
    if (peak == 0.0) return;
    const auto box = detect_support(f, 1e-12 * peak);
    const auto& grid = f.grid();
    const std::size_t guard = required_guard_cells(q);
    for (int a = 0; a < grid.axes(); ++a) {
        const bool is_t = a == grid.t_axis();
        const bool check_lo = !is_t || !flip;
        const bool check_hi = !is_t || flip;
        const std::size_t n = grid.count(a);
        std::size_t missing = 0;
        if (check_lo && box->box.lo[a] < guard) missing = std::max(missing, guard - box->box.lo[a]);
        if (check_hi && box->box.hi[a] + guard > n - 1) {
            missing = std::max(missing, box->box.hi[a] + guard - (n - 1));
        }
        if (missing > 0) {
            throw DomainError("support of f is within " + std::to_string(guard) +
                              " cells of the grid boundary on axis " + std::to_string(a) +
                              "; pad that axis by at least " + std::to_string(missing) + " cells");
        }
    }
}

struct LineRange {
    std::size_t lo = 1;
    std::size_t hi = 0;
    bool empty() const { return lo > hi; }
};

// Shared kernel for both transforms: `weight_at(r)` gives the quadrature
// weight of an off-vertex spatial offset of length r.
template <typename WeightFn>
ScalarField cone_convolve(const ScalarField& f, const ConeParams& cone, const QuadratureSpec& q,
                          const ForwardOptions& options, double vertex_weight, WeightFn&& weight_at) {
    const auto& grid = f.grid();
    const int m = grid.spatial_dim();
    const std::size_t nt = grid.t_count();
    const double ht = grid.t_spacing();
    const double sign = options.flip_cone ? -1.0 : 1.0;
    const double post = options.surface_measure ? 1.0 / cone.sin_phi() : 1.0;

    // Offset table over difference vectors d in prod_a [-(N_a-1), N_a-1].
    std::vector<std::size_t> table_dims(static_cast<std::size_t>(m));
    std::vector<std::size_t> table_stride(static_cast<std::size_t>(m));
    std::size_t table_size = 1;
    for (int a = m - 1; a >= 0; --a) {
        table_dims[a] = 2 * grid.count(a) - 1;
        table_stride[a] = table_size;
        table_size *= table_dims[a];
    }
    std::vector<OffsetStencil> table(table_size);
    std::vector<double> pool;
    const double spread = kernel_spread(grid, cone, q);
    {
        std::vector<long> d(static_cast<std::size_t>(m));
        for (std::size_t e = 0; e < table_size; ++e) {
            std::size_t rem = e;
            double r2 = 0.0;
            bool vertex = true;
            for (int a = 0; a < m; ++a) {
                const auto comp = static_cast<long>(rem / table_stride[a]);
                rem %= table_stride[a];
                d[a] = comp - static_cast<long>(grid.count(a) - 1);
                const double y = static_cast<double>(d[a]) * grid.spacing(a);
                r2 += y * y;
                vertex = vertex && d[a] == 0;
            }
            const double r = std::sqrt(r2);
            const double w = post * (vertex ? vertex_weight : weight_at(r));
            if (w == 0.0) continue;
            table[e] = make_stencil(sign * cone.cot_phi() * r / ht, w, q.order, spread, pool);
        }
    }

    // Per source line: table offset and nonzero t-range.
    const std::size_t lines = grid.spatial_size();
    std::vector<std::size_t> source_offset(lines);
    std::vector<std::size_t> target_base(lines);
    std::vector<LineRange> ranges(lines);
    std::vector<std::size_t> active;
    {
        std::vector<std::size_t> idx(static_cast<std::size_t>(m + 1));
        for (std::size_t line = 0; line < lines; ++line) {
            grid.spatial_indices(line, idx);
            std::size_t off = 0;
            std::size_t base = 0;
            for (int a = 0; a < m; ++a) {
                off += idx[a] * table_stride[a];
                base += (idx[a] + grid.count(a) - 1) * table_stride[a];
            }
            source_offset[line] = off;
            target_base[line] = base;
            const auto v = f.line(line);
            LineRange r;
            for (std::size_t n = 0; n < nt; ++n) {
                if (v[n] != 0.0) {
                    if (r.empty()) r.lo = n;
                    r.hi = n;
                }
            }
            ranges[line] = r;
            if (!r.empty()) active.push_back(line);
        }
    }

    std::vector<double> out(grid.size(), 0.0);
    const auto values = f.values();
    const long nt_l = static_cast<long>(nt);
    parallel_for(lines, [&](std::size_t begin, std::size_t end) {
        for (std::size_t target = begin; target < end; ++target) {
            double* o = out.data() + target * nt;
            for (const std::size_t source : active) {
                const OffsetStencil& s = table[target_base[target] - source_offset[source]];
                if (s.taps == 0) continue;
                const double* src = values.data() + source * nt;
                const LineRange& range = ranges[source];
                for (int k = 0; k < s.taps; ++k) {
                    const long shift = s.first_shift + k;
                    const long lo = std::max(0L, static_cast<long>(range.lo) + shift);
                    const long hi = std::min(nt_l - 1, static_cast<long>(range.hi) + shift);
                    const double c = pool[s.first_coef + static_cast<std::size_t>(k)];
                    for (long n = lo; n <= hi; ++n) o[n] += c * src[n - shift];
                }
            }
        }
    });
    return ScalarField(grid, std::move(out));
}

}  // namespace

ConeParams::ConeParams(double half_opening) : phi_(half_opening), tan_(std::tan(half_opening)) {
    if (!(half_opening > 0.0 && half_opening < std::numbers::pi / 2.0) || !std::isfinite(tan_) ||
        !(tan_ > 0.0)) {
        throw DomainError("half-opening angle must lie strictly inside (0, pi/2)");
    }
}

ConeParams ConeParams::right_angle() { return ConeParams(std::numbers::pi / 4.0); }

double ConeParams::sin_phi() const { return std::sin(phi_); }

double kernel_spread(const GridSpec& grid, const ConeParams& cone, const QuadratureSpec& q) {
    if (q.smoothing == KernelSmoothing::none) return 1.0;
    double hmin = grid.spacing(0);
    for (int a = 1; a < grid.spatial_dim(); ++a) hmin = std::min(hmin, grid.spacing(a));
    return std::max(1.0, cone.cot_phi() * hmin / grid.t_spacing());
}

std::size_t required_guard_cells(const QuadratureSpec& q) {
    return q.order == Interpolation::cubic ? 2 : 1;
}

double cone_reach(const GridSpec& grid, const ConeParams& cone) {
    double d2 = 0.0;
    for (int a = 0; a < grid.spatial_dim(); ++a) d2 += grid.extent(a) * grid.extent(a);
    return cone.cot_phi() * std::sqrt(d2);
}

double weighted_vertex_weight(const GridSpec& grid, const ConeParams& cone) {
    const int m = grid.spatial_dim();
    if (m < 2) throw DomainError("weight non-integrable in one spatial dimension");
    double hmin = grid.spacing(0);
    double hmax = grid.spacing(0);
    for (int a = 1; a < m; ++a) {
        hmin = std::min(hmin, grid.spacing(a));
        hmax = std::max(hmax, grid.spacing(a));
    }
    const double sin_phi = cone.sin_phi();
    if (hmax - hmin <= 1e-12 * hmax) {
        // Lattice-corrected vertex weight: makes the rule second order for sin(phi)/|y| kernels.
        const double zeta = m == 2 ? kLatticeZeta2 : kLatticeZeta3;
        return -zeta * std::pow(hmin, m - 1) * sin_phi;
    }
    // Exact integral of 1/|y| over the ball inscribed in the vertex cell.
    const double rho = 0.5 * hmin;
    const double sphere = m == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
    return sin_phi * sphere * std::pow(rho, m - 1) / static_cast<double>(m - 1);
}

ScalarField forward_crt(const ScalarField& f, const ConeParams& cone, const QuadratureSpec& q,
                        const ForwardOptions& options) {
    if (f.grid().spatial_dim() > kMaxSpatialDim) throw DomainError("unsupported spatial dimension");
    if (options.require_compact_support) check_guard(f, q, options.flip_cone);
    const double cell = f.grid().spatial_cell_volume();
    return cone_convolve(f, cone, q, options, cell, [cell](double) { return cell; });
}

ScalarField weighted_forward_crt(const ScalarField& f, const ConeParams& cone,
                                 const QuadratureSpec& q, const ForwardOptions& options) {
    if (f.grid().spatial_dim() < 2) throw DomainError("weight non-integrable in one spatial dimension");
    if (options.require_compact_support) check_guard(f, q, options.flip_cone);
    const double cell_sin = f.grid().spatial_cell_volume() * cone.sin_phi();
    return cone_convolve(f, cone, q, options, weighted_vertex_weight(f.grid(), cone),
                         [cell_sin](double r) { return cell_sin / r; });
}

}  // namespace crt
