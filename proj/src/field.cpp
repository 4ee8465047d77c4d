#include "crt/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crt/error.hpp"

namespace crt {

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* op) {
    if (!(a.grid() == b.grid())) {
        throw ShapeMismatch(std::string(op) + ": grids differ");
    }
}

// Visits every flat index inside `region` in storage order.
template <typename Fn>
void for_each_in_box(const GridSpec& grid, const IndexBox& region, Fn&& fn) {
    const int axes = grid.axes();
    for (int a = 0; a < axes; ++a) {
        if (region.lo[a] > region.hi[a]) return;
    }
    std::vector<std::size_t> idx(region.lo);
    while (true) {
        std::size_t base = 0;
        for (int a = 0; a < axes - 1; ++a) base += idx[a] * grid.stride(a);
        for (std::size_t n = region.lo[axes - 1]; n <= region.hi[axes - 1]; ++n) fn(base + n);
        int a = axes - 2;
        for (; a >= 0; --a) {
            if (++idx[a] <= region.hi[a]) break;
            idx[a] = region.lo[a];
        }
        if (a < 0) return;
    }
}

}  // namespace

GridSpec::GridSpec(int spatial_dim, std::vector<std::size_t> counts, std::vector<double> spacing,
                   std::vector<double> origin)
    : spatial_dim_(spatial_dim),
      counts_(std::move(counts)),
      spacing_(std::move(spacing)),
      origin_(std::move(origin)) {
    if (spatial_dim_ < 1 || spatial_dim_ > kMaxSpatialDim) {
        throw DomainError("spatial dimension must be in [1, 3], got " + std::to_string(spatial_dim_));
    }
    const auto axes = static_cast<std::size_t>(spatial_dim_ + 1);
    if (counts_.size() != axes || spacing_.size() != axes || origin_.size() != axes) {
        throw DomainError("grid needs " + std::to_string(axes) + " entries per axis attribute");
    }
    for (std::size_t a = 0; a < axes; ++a) {
        if (counts_[a] < kMinAxisCount) {
            throw DomainError("axis " + std::to_string(a) + " has fewer than 4 samples");
        }
        if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a])) {
            throw DomainError("axis " + std::to_string(a) + " spacing must be positive and finite");
        }
        if (!std::isfinite(origin_[a])) {
            throw DomainError("axis " + std::to_string(a) + " origin must be finite");
        }
    }
    strides_.assign(axes, 1);
    std::size_t total = 1;
    for (std::size_t a = axes; a-- > 0;) {
        strides_[a] = total;
        if (total > std::numeric_limits<std::size_t>::max() / counts_[a] ||
            total * counts_[a] > std::numeric_limits<std::size_t>::max() / sizeof(double)) {
            throw DomainError("grid sample count overflows the addressable range");
        }
        total *= counts_[a];
    }
    spatial_size_ = total / counts_.back();
}

GridSpec GridSpec::isotropic(int spatial_dim, std::size_t spatial_count, double spatial_spacing,
                             double spatial_origin, std::size_t t_count, double t_spacing,
                             double t_origin) {
    const auto m = static_cast<std::size_t>(std::max(spatial_dim, 0));
    std::vector<std::size_t> counts(m, spatial_count);
    std::vector<double> spacing(m, spatial_spacing);
    std::vector<double> origin(m, spatial_origin);
    counts.push_back(t_count);
    spacing.push_back(t_spacing);
    origin.push_back(t_origin);
    return GridSpec(spatial_dim, std::move(counts), std::move(spacing), std::move(origin));
}

double GridSpec::spatial_cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < spatial_dim_; ++a) v *= spacing(a);
    return v;
}

double GridSpec::max_spacing() const { return *std::max_element(spacing_.begin(), spacing_.end()); }

void GridSpec::spatial_indices(std::size_t line, std::span<std::size_t> out) const {
    for (int a = spatial_dim_ - 1; a >= 0; --a) {
        out[a] = line % counts_[a];
        line /= counts_[a];
    }
}

bool IndexBox::contains(std::span<const std::size_t> index) const {
    for (std::size_t a = 0; a < lo.size(); ++a) {
        if (index[a] < lo[a] || index[a] > hi[a]) return false;
    }
    return true;
}

IndexBox interior_box(const GridSpec& grid, std::size_t margin) {
    IndexBox box;
    for (int a = 0; a < grid.axes(); ++a) {
        const std::size_t n = grid.count(a);
        if (2 * margin >= n) {
            throw DomainError("interior margin " + std::to_string(margin) + " leaves axis " +
                              std::to_string(a) + " empty");
        }
        box.lo.push_back(margin);
        box.hi.push_back(n - 1 - margin);
    }
    return box;
}

IndexBox full_box(const GridSpec& grid) { return interior_box(grid, 0); }

ScalarField::ScalarField(GridSpec grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ShapeMismatch("field has " + std::to_string(values_.size()) + " values, grid needs " +
                            std::to_string(grid_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw DomainError("non-finite field value at flat index " + std::to_string(i));
        }
    }
}

ScalarField sample(const GridSpec& grid, const std::function<double(std::span<const double>)>& fn) {
    std::vector<double> values(grid.size());
    std::vector<std::size_t> idx(static_cast<std::size_t>(grid.axes()));
    std::vector<double> coords(static_cast<std::size_t>(grid.axes()));
    const std::size_t nt = grid.t_count();
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        grid.spatial_indices(line, idx);
        for (int a = 0; a < grid.spatial_dim(); ++a) coords[a] = grid.coord(a, idx[a]);
        for (std::size_t n = 0; n < nt; ++n) {
            coords.back() = grid.coord(grid.t_axis(), n);
            values[line * nt + n] = fn(coords);
        }
    }
    return ScalarField(grid, std::move(values));
}

double SpatialField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

ScalarField cumulative_t_integral(const ScalarField& f) {
    const auto& grid = f.grid();
    const std::size_t nt = grid.t_count();
    const double half_h = 0.5 * grid.t_spacing();
    std::vector<double> out(grid.size());
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        const auto in = f.line(line);
        double* o = out.data() + line * nt;
        o[0] = 0.0;
        for (std::size_t n = 1; n < nt; ++n) o[n] = o[n - 1] + half_h * (in[n - 1] + in[n]);
    }
    return ScalarField(grid, std::move(out));
}

SpatialField total_t_integral(const ScalarField& f) {
    const auto& grid = f.grid();
    const int m = grid.spatial_dim();
    SpatialField out;
    out.counts.assign(grid.counts().begin(), grid.counts().begin() + m);
    out.spacing.assign(grid.spacings().begin(), grid.spacings().begin() + m);
    out.origin.assign(grid.origins().begin(), grid.origins().begin() + m);
    out.values.resize(grid.spatial_size());
    const double h = grid.t_spacing();
    const std::size_t nt = grid.t_count();
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        const auto in = f.line(line);
        double s = 0.5 * (in[0] + in[nt - 1]);
        for (std::size_t n = 1; n + 1 < nt; ++n) s += in[n];
        out.values[line] = s * h;
    }
    return out;
}

ScalarField partial_t(const ScalarField& f) {
    const auto& grid = f.grid();
    const std::size_t nt = grid.t_count();
    const double inv2h = 0.5 / grid.t_spacing();
    std::vector<double> out(grid.size());
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        const auto in = f.line(line);
        double* o = out.data() + line * nt;
        o[0] = (-3.0 * in[0] + 4.0 * in[1] - in[2]) * inv2h;
        for (std::size_t n = 1; n + 1 < nt; ++n) o[n] = (in[n + 1] - in[n - 1]) * inv2h;
        o[nt - 1] = (3.0 * in[nt - 1] - 4.0 * in[nt - 2] + in[nt - 3]) * inv2h;
    }
    return ScalarField(grid, std::move(out));
}

std::optional<SupportBox> detect_support(const ScalarField& f, double tol) {
    if (!(tol > 0.0)) throw DomainError("detect_support: tol must be positive");
    const auto& grid = f.grid();
    const auto axes = static_cast<std::size_t>(grid.axes());
    IndexBox box;
    box.lo.assign(axes, std::numeric_limits<std::size_t>::max());
    box.hi.assign(axes, 0);
    bool any = false;
    std::vector<std::size_t> idx(axes);
    const std::size_t nt = grid.t_count();
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        const auto v = f.line(line);
        std::size_t first = nt;
        std::size_t last = 0;
        for (std::size_t n = 0; n < nt; ++n) {
            if (std::abs(v[n]) > tol) {
                if (first == nt) first = n;
                last = n;
            }
        }
        if (first == nt) continue;
        any = true;
        grid.spatial_indices(line, idx);
        idx.back() = first;
        for (std::size_t a = 0; a < axes; ++a) box.lo[a] = std::min(box.lo[a], idx[a]);
        idx.back() = last;
        for (std::size_t a = 0; a < axes; ++a) box.hi[a] = std::max(box.hi[a], idx[a]);
    }
    if (!any) return std::nullopt;

    double outside = 0.0;
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        grid.spatial_indices(line, idx);
        bool line_inside = true;
        for (std::size_t a = 0; a + 1 < axes; ++a) {
            if (idx[a] < box.lo[a] || idx[a] > box.hi[a]) line_inside = false;
        }
        const auto v = f.line(line);
        for (std::size_t n = 0; n < nt; ++n) {
            if (!line_inside || n < box.lo.back() || n > box.hi.back()) {
                outside = std::max(outside, std::abs(v[n]));
            }
        }
    }
    return SupportBox{std::move(box), outside};
}

HalfspaceResult detect_halfspace(const ScalarField& f, double tol, HalfspaceMode mode) {
    if (!(tol > 0.0)) throw DomainError("detect_halfspace: tol must be positive");
    const auto& grid = f.grid();
    const std::size_t nt = grid.t_count();
    std::size_t first_dirty = nt;
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        const auto v = f.line(line);
        for (std::size_t n = 0; n < std::min(first_dirty, nt); ++n) {
            if (std::abs(v[n]) > tol) {
                first_dirty = n;
                break;
            }
        }
    }
    HalfspaceResult result;
    if (first_dirty == nt) {
        result.t0 = grid.t_max();
        return result;
    }
    result.t0 = grid.coord(grid.t_axis(), first_dirty);
    result.bottom_clean = first_dirty > 0;
    result.violated = !result.bottom_clean && mode == HalfspaceMode::strict;
    return result;
}

double l2_norm(const ScalarField& f) { return l2_norm(f, full_box(f.grid())); }

double l2_norm(const ScalarField& f, const IndexBox& region) {
    double s = 0.0;
    const auto v = f.values();
    for_each_in_box(f.grid(), region, [&](std::size_t i) { s += v[i] * v[i]; });
    return std::sqrt(s * f.grid().spatial_cell_volume() * f.grid().t_spacing());
}

double linf_norm(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

double linf_norm(const ScalarField& f, const IndexBox& region) {
    double m = 0.0;
    const auto v = f.values();
    for_each_in_box(f.grid(), region, [&](std::size_t i) { m = std::max(m, std::abs(v[i])); });
    return m;
}

ScalarField add(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b, "add");
    std::vector<double> out(a.grid().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    return ScalarField(a.grid(), std::move(out));
}

ScalarField subtract(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b, "subtract");
    std::vector<double> out(a.grid().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
    return ScalarField(a.grid(), std::move(out));
}

ScalarField scale(const ScalarField& f, double factor) {
    if (!std::isfinite(factor)) throw DomainError("scale: factor must be finite");
    std::vector<double> out(f.values().begin(), f.values().end());
    for (double& v : out) v *= factor;
    return ScalarField(f.grid(), std::move(out));
}

ScalarField shift(const ScalarField& f, std::span<const long> cells) {
    const auto& grid = f.grid();
    const auto axes = static_cast<std::size_t>(grid.axes());
    if (cells.size() != axes) throw ShapeMismatch("shift: need one offset per axis");
    std::vector<double> out(grid.size(), 0.0);
    std::vector<std::size_t> idx(axes);
    const std::size_t nt = grid.t_count();
    const long dt = cells.back();
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        grid.spatial_indices(line, idx);
        std::size_t dst_line = 0;
        bool inside = true;
        for (std::size_t a = 0; a + 1 < axes; ++a) {
            const long j = static_cast<long>(idx[a]) + cells[a];
            if (j < 0 || j >= static_cast<long>(grid.count(static_cast<int>(a)))) {
                inside = false;
                break;
            }
            dst_line += static_cast<std::size_t>(j) * (grid.stride(static_cast<int>(a)) / nt);
        }
        if (!inside) continue;
        const auto src = f.line(line);
        for (std::size_t n = 0; n < nt; ++n) {
            const long m = static_cast<long>(n) + dt;
            if (m < 0 || m >= static_cast<long>(nt)) continue;
            out[dst_line * nt + static_cast<std::size_t>(m)] = src[n];
        }
    }
    return ScalarField(grid, std::move(out));
}

double relative_l2_error(const ScalarField& a, const ScalarField& b, const IndexBox& region) {
    require_same_grid(a, b, "relative_l2_error");
    const auto va = a.values();
    const auto vb = b.values();
    double num = 0.0;
    double den = 0.0;
    for_each_in_box(a.grid(), region, [&](std::size_t i) {
        const double d = va[i] - vb[i];
        num += d * d;
        den += vb[i] * vb[i];
    });
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

}  // namespace crt
