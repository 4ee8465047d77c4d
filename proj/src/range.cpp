#include "crt/range.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "crt/dalembertian.hpp"
#include "crt/error.hpp"
#include "crt/parallel.hpp"
#include "crt/spectral.hpp"

namespace crt {

namespace {

// |g| below this fraction of its peak counts as zero when locating where data enters the window.
constexpr double kOnsetThreshold = 1e-9;

void require_dimension(const ScalarField& g, int expected, const char* op) {
    if (g.grid().spatial_dim() != expected) {
        std::ostringstream msg;
        msg << op << ": dimension mismatch, spatial dimension must be " << expected << " but field has "
            << g.grid().spatial_dim();
        throw DomainError(msg.str());
    }
}

int expected_dim(Parity parity, int k) { return parity == Parity::even ? 2 * k - 1 : 2 * k; }

// Each application of the d'Alembertian falls back to one-sided stencils on
// the outermost sample and widens the affected band by one cell. In the odd
// case the kernel hat of C' also reads past the top of the window.
std::size_t stencil_depth(const GridSpec& grid, const ConeParams& cone, Parity parity, int k,
                          const QuadratureSpec& q) {
    if (parity == Parity::even) return static_cast<std::size_t>(k);
    return static_cast<std::size_t>(2 * k) +
           static_cast<std::size_t>(std::ceil(kernel_spread(grid, cone, q) - 1e-9));
}

// Cells where the filtered field can be trusted: t index in [lo, hi[line]] on each
// t-line, hi = -1 for lines with none.
struct Trusted {
    long lo = 0;
    std::vector<long> hi;
};

// First t index at which |g| exceeds `thr` on each line lying on a spatial face of the grid.
std::vector<std::pair<std::size_t, long>> face_onsets(const ScalarField& g, double thr) {
    const auto& grid = g.grid();
    std::vector<std::pair<std::size_t, long>> out;
    std::vector<std::size_t> idx(static_cast<std::size_t>(grid.axes()));
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        grid.spatial_indices(line, idx);
        bool face = false;
        for (int a = 0; a < grid.spatial_dim(); ++a) face = face || idx[a] == 0 || idx[a] + 1 == grid.count(a);
        if (!face) continue;
        const auto v = g.line(line);
        for (std::size_t n = 0; n < v.size(); ++n) {
            if (std::abs(v[n]) > thr) {
                out.emplace_back(line, static_cast<long>(n));
                break;
            }
        }
    }
    return out;
}

// The odd filter applies C', whose backward cone reaches outside the spatial window.
// Data there is unknown; anything nonzero outside must have crossed a face of the
// window inside the forward cone of a nonzero face sample, so the filtered field is
// exact only below  min_b (s_b + cot(phi) |x - b|)  over face points b with onset s_b.
std::vector<long> dependence_cutoff(const ScalarField& g, const ConeParams& cone, double thr) {
    const auto& grid = g.grid();
    const int m = grid.spatial_dim();
    const long nt = static_cast<long>(grid.t_count());
    const auto onsets = face_onsets(g, thr);
    std::vector<std::vector<double>> face_x;
    for (const auto& [line, n] : onsets) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(grid.axes()));
        grid.spatial_indices(line, idx);
        std::vector<double> x(static_cast<std::size_t>(m));
        for (int a = 0; a < m; ++a) x[a] = grid.coord(a, idx[a]);
        face_x.push_back(std::move(x));
    }
    std::vector<long> cut(grid.spatial_size(), nt - 1);
    const double ht = grid.t_spacing();
    parallel_for(grid.spatial_size(), [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(grid.axes()));
        for (std::size_t line = begin; line < end; ++line) {
            grid.spatial_indices(line, idx);
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < onsets.size(); ++b) {
                double d2 = 0.0;
                for (int a = 0; a < m; ++a) {
                    const double d = grid.coord(a, idx[a]) - face_x[b][a];
                    d2 += d * d;
                }
                best = std::min(best, static_cast<double>(onsets[b].second) + cone.cot_phi() * std::sqrt(d2) / ht);
            }
            // strictly below the cutoff
            if (best < static_cast<double>(nt)) cut[line] = static_cast<long>(std::ceil(best)) - 1;
        }
    });
    return cut;
}

// Min of `v` over the spatial Chebyshev neighbourhood of radius r; -1 if it leaves the grid.
std::vector<long> neighbourhood_min(const GridSpec& grid, const std::vector<long>& v, std::size_t r) {
    const int m = grid.spatial_dim();
    std::vector<long> out(v.size(), -1);
    const std::size_t nt = grid.t_count();
    std::vector<std::size_t> idx(static_cast<std::size_t>(grid.axes()));
    std::vector<long> off(static_cast<std::size_t>(m));
    const long span = 2 * static_cast<long>(r) + 1;
    long combos = 1;
    for (int a = 0; a < m; ++a) combos *= span;
    for (std::size_t line = 0; line < v.size(); ++line) {
        grid.spatial_indices(line, idx);
        long best = std::numeric_limits<long>::max();
        for (long c = 0; c < combos && best >= 0; ++c) {
            long rem = c;
            long other = 0;
            for (int a = 0; a < m; ++a) {
                const long j = static_cast<long>(idx[a]) + rem % span - static_cast<long>(r);
                rem /= span;
                if (j < 0 || j >= static_cast<long>(grid.count(a))) {
                    best = -1;
                    break;
                }
                other += j * static_cast<long>(grid.stride(a) / nt);
            }
            if (best >= 0) best = std::min(best, v[static_cast<std::size_t>(other)]);
        }
        out[line] = best;
    }
    return out;
}

Trusted trusted_region(const ScalarField& g, const ConeParams& cone, Parity parity, int k, std::size_t depth,
                       double onset_thr) {
    const auto& grid = g.grid();
    const long nt = static_cast<long>(grid.t_count());
    Trusted t;
    t.lo = static_cast<long>(depth);
    std::vector<long> top(grid.spatial_size(), nt - 1 - static_cast<long>(depth));
    if (parity == Parity::odd) {
        // box^{2k} reads 2k cells around each sample of C'[g]
        const auto cut = neighbourhood_min(grid, dependence_cutoff(g, cone, onset_thr), 2 * k);
        for (std::size_t line = 0; line < top.size(); ++line) {
            top[line] = std::min(top[line], cut[line] - 2 * static_cast<long>(k));
        }
    }
    // lines within `depth` of a spatial face see one-sided stencils
    t.hi = neighbourhood_min(grid, top, depth);
    for (auto& h : t.hi) {
        if (h < t.lo) h = -1;
    }
    return t;
}

ForwardOptions windowed() {
    ForwardOptions o;
    o.require_compact_support = false;
    return o;
}

}  // namespace

const char* to_string(Parity p) { return p == Parity::even ? "even" : "odd"; }

Parity parity_for(int spatial_dim) { return spatial_dim % 2 == 1 ? Parity::even : Parity::odd; }

int order_for(int spatial_dim) { return spatial_dim % 2 == 1 ? (spatial_dim + 1) / 2 : spatial_dim / 2; }

double even_constant(int k, const ConeParams& cone) {
    if (k < 1) throw DomainError("even_constant: k must be >= 1");
    const double sign = k % 2 == 0 ? 1.0 : -1.0;
    return sign * std::pow(cone.tan_phi(), 2 * k - 1) * alpha(2 * k - 1).real();
}

double odd_constant(int k, const ConeParams& cone) {
    if (k < 1) throw DomainError("odd_constant: k must be >= 1");
    const complex product = alpha(2 * k) * beta(2 * k);
    return std::sqrt(2.0) * cone.sin_phi() * std::pow(cone.tan_phi(), 4 * k - 1) * product.real();
}

ScalarField range_filter(const ScalarField& g, const ConeParams& cone, Parity parity, int k,
                         const QuadratureSpec& q) {
    require_dimension(g, expected_dim(parity, k), "range_filter");
    if (parity == Parity::even) return apply_box(g, cone, k);
    return apply_box(weighted_forward_crt(g, cone, q, windowed()), cone, 2 * k);
}

ScalarField invert_even(const ScalarField& g, const ConeParams& cone, int k) {
    if (k < 1) throw DomainError("invert_even: k must be >= 1");
    const auto filtered = range_filter(g, cone, Parity::even, k);
    return scale(cumulative_t_integral(filtered), 1.0 / even_constant(k, cone));
}

ScalarField invert_odd(const ScalarField& g, const ConeParams& cone, int k, const QuadratureSpec& q) {
    if (k < 1) throw DomainError("invert_odd: k must be >= 1");
    const auto filtered = range_filter(g, cone, Parity::odd, k, q);
    return scale(cumulative_t_integral(filtered), 1.0 / odd_constant(k, cone));
}

ScalarField fundamental_solution_apply(const ScalarField& f, const ConeParams& cone, Parity parity,
                                       int k, const QuadratureSpec& q) {
    require_dimension(f, expected_dim(parity, k), "fundamental_solution_apply");
    const double c = parity == Parity::even ? even_constant(k, cone) : odd_constant(k, cone);
    return scale(cumulative_t_integral(forward_crt(f, cone, q)), 1.0 / c);
}

RangeTolerances RangeTolerances::defaults_for(const GridSpec& grid) {
    const double h = grid.max_spacing();
    const double t = std::max(10.0 * h * h, 1e-6);
    RangeTolerances tol;
    tol.support = t;
    tol.integral = t;
    tol.halfspace = t;
    return tol;
}

RangeReport check_range(const ScalarField& g, const ConeParams& cone, Parity parity, int k,
                        const RangeTolerances& tol, const QuadratureSpec& q) {
    const auto& grid = g.grid();
    const auto filtered = range_filter(g, cone, parity, k, q);

    RangeReport report;
    report.parity = parity;
    report.k = k;
    report.phi = cone.half_opening();
    report.tolerances = tol;
    report.counts.assign(grid.counts().begin(), grid.counts().end());
    report.spacing.assign(grid.spacings().begin(), grid.spacings().end());

    // Cells reached by one-sided stencils carry O(1) truncation error and are
    // left out of conditions (1) and (2), as are (odd case) cells whose C' cone
    // needs data from outside the window.
    const std::size_t depth = stencil_depth(grid, cone, parity, k, q);
    for (int a = 0; a < grid.axes(); ++a) {
        if (grid.count(a) <= 2 * (depth + tol.margin_cells) + 1) {
            throw DomainError("check_range: axis " + std::to_string(a) +
                              " is too short for the stencil depth plus the margin band");
        }
    }
    const double g_peak = linf_norm(g);
    const Trusted trusted = trusted_region(g, cone, parity, k, depth, kOnsetThreshold * g_peak);
    const std::size_t nt = grid.t_count();
    double peak = 0.0;
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        const auto v = filtered.line(line);
        for (long n = trusted.lo; n <= trusted.hi[line]; ++n) peak = std::max(peak, std::abs(v[n]));
    }
    report.trusted_fraction = 0.0;
    {
        std::size_t cells = 0;
        for (long h : trusted.hi) cells += static_cast<std::size_t>(std::max(0L, h - trusted.lo + 1));
        report.trusted_fraction = static_cast<double>(cells) / static_cast<double>(grid.size());
    }

    // (1) compact support: the band just inside the trusted region is clean.
    if (peak > 0.0) {
        const auto inner = neighbourhood_min(grid, trusted.hi, tol.margin_cells);
        const long band = static_cast<long>(tol.margin_cells);
        double edge = 0.0;
        std::vector<double> kept(grid.size(), 0.0);
        for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
            const auto v = filtered.line(line);
            for (long n = trusted.lo; n <= trusted.hi[line]; ++n) {
                kept[line * nt + static_cast<std::size_t>(n)] = v[n];
                if (n < trusted.lo + band || n > inner[line] - band) edge = std::max(edge, std::abs(v[n]));
            }
        }
        report.cond1_residual = edge / peak;
        report.filtered_support = detect_support(ScalarField(grid, std::move(kept)), tol.support * peak);
    }
    report.cond1_pass = report.cond1_residual <= tol.support;

    // (2) the t-integral of the filtered field vanishes for every x.
    {
        const double ht = grid.t_spacing();
        double worst = 0.0;
        double scale_l1 = 0.0;
        for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
            const long lo = trusted.lo;
            const long hi = trusted.hi[line];
            if (hi <= lo) continue;
            const auto v = filtered.line(line);
            double integral = 0.5 * (v[lo] + v[hi]);
            double s = 0.5 * (std::abs(v[lo]) + std::abs(v[hi]));
            for (long n = lo + 1; n < hi; ++n) {
                integral += v[n];
                s += std::abs(v[n]);
            }
            worst = std::max(worst, std::abs(integral) * ht);
            scale_l1 = std::max(scale_l1, s * ht);
        }
        report.cond2_residual = scale_l1 > 0.0 ? worst / scale_l1 : 0.0;
    }
    report.cond2_pass = report.cond2_residual <= tol.integral;

    // (3) support in a half-space t >= t0 that starts inside the window.
    if (g_peak == 0.0) {
        report.cond3_t0 = grid.t_max();
    } else {
        const auto hs = detect_halfspace(g, tol.halfspace * g_peak, HalfspaceMode::strict);
        if (!hs.violated) report.cond3_t0 = hs.t0;
    }
    report.cond3_pass = report.cond3_t0.has_value();
    return report;
}

std::string RangeReport::to_text() const {
    std::ostringstream out;
    out << std::setprecision(6);
    out << "range check (" << to_string(parity) << " total dimension, k = " << k << ", phi = " << phi
        << ")\n";
    out << "  grid:";
    for (std::size_t a = 0; a < counts.size(); ++a) out << (a ? " x " : " ") << counts[a];
    out << "  spacing:";
    for (double h : spacing) out << ' ' << h;
    out << '\n';
    auto verdict = [](bool ok) { return ok ? "PASS" : "FAIL"; };
    out << "  [" << verdict(cond1_pass) << "] (1) compact support of filtered data: residual "
        << cond1_residual << " (tol " << tolerances.support << ", margin " << tolerances.margin_cells
        << " cells)";
    if (filtered_support) {
        out << ", box";
        for (std::size_t a = 0; a < filtered_support->box.lo.size(); ++a) {
            out << " [" << filtered_support->box.lo[a] << ", " << filtered_support->box.hi[a] << "]";
        }
    }
    out << '\n';
    out << "  [" << verdict(cond2_pass) << "] (2) vanishing t-integral: residual " << cond2_residual
        << " (tol " << tolerances.integral << ")\n";
    out << "  [" << verdict(cond3_pass) << "] (3) half-space support: ";
    if (cond3_t0) {
        out << "t0 = " << *cond3_t0;
    } else {
        out << "violated (data reaches the bottom of the window)";
    }
    out << '\n';
    out << "  trusted cells: " << 100.0 * trusted_fraction << "% of the grid\n";
    return out.str();
}

std::string RangeReport::to_kv() const {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "parity=" << to_string(parity) << '\n';
    out << "k=" << k << '\n';
    out << "phi=" << phi << '\n';
    out << "cond1_residual=" << cond1_residual << '\n';
    out << "cond2_residual=" << cond2_residual << '\n';
    out << "cond3_t0=";
    if (cond3_t0) {
        out << *cond3_t0;
    } else {
        out << "violated";
    }
    out << '\n';
    out << "cond1_pass=" << (cond1_pass ? "true" : "false") << '\n';
    out << "cond2_pass=" << (cond2_pass ? "true" : "false") << '\n';
    out << "cond3_pass=" << (cond3_pass ? "true" : "false") << '\n';
    out << "tol=" << tolerances.support << '\n';
    out << "trusted_fraction=" << trusted_fraction << '\n';
    return out.str();
}

Calibration calibrate(const ScalarField& f, const ScalarField& f_t, const ConeParams& cone,
                      Parity parity, int k, std::size_t interior_margin, const QuadratureSpec& q) {
    const auto forward = forward_crt(f, cone, q);
    const auto filtered = range_filter(forward, cone, parity, k, q);
    const auto box = interior_box(f.grid(), interior_margin);
    const auto& grid = f.grid();
    std::vector<std::size_t> idx(static_cast<std::size_t>(grid.axes()));
    double num = 0.0;
    double den = 0.0;
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        grid.spatial_indices(line, idx);
        bool inside = true;
        for (int a = 0; a < grid.spatial_dim(); ++a) {
            if (idx[a] < box.lo[a] || idx[a] > box.hi[a]) inside = false;
        }
        if (!inside) continue;
        const auto a = filtered.line(line);
        const auto b = f_t.line(line);
        for (std::size_t n = box.lo.back(); n <= box.hi.back(); ++n) {
            num += a[n] * b[n];
            den += b[n] * b[n];
        }
    }
    Calibration c;
    c.closed_form = parity == Parity::even ? even_constant(k, cone) : odd_constant(k, cone);
    c.fitted = den > 0.0 ? num / den : 0.0;
    c.relative_difference = std::abs(c.fitted - c.closed_form) / std::abs(c.closed_form);
    return c;
}

}  // namespace crt
