#ifndef CRT_FIELD_HPP
#define CRT_FIELD_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace crt {

inline constexpr int kMaxSpatialDim = 3;
inline constexpr std::size_t kMinAxisCount = 4;

/**
 * Uniform Cartesian sampling of R^m_x x R_t.
 *
 * Axes 0..m-1 are spatial, axis m is the t-axis. Samples are stored
 * row-major with the t index varying fastest, so a single spatial point
 * owns a contiguous "t-line" of length t_count().
 */
class GridSpec {
public:
    GridSpec(int spatial_dim, std::vector<std::size_t> counts,
             std::vector<double> spacing, std::vector<double> origin);

    /// Same count and spacing on every spatial axis; t-axis given separately.
    static GridSpec isotropic(int spatial_dim, std::size_t spatial_count, double spatial_spacing,
                              double spatial_origin, std::size_t t_count, double t_spacing,
                              double t_origin);

    int spatial_dim() const { return spatial_dim_; }
    int axes() const { return spatial_dim_ + 1; }
    int t_axis() const { return spatial_dim_; }

    std::size_t count(int axis) const { return counts_[static_cast<std::size_t>(axis)]; }
    double spacing(int axis) const { return spacing_[static_cast<std::size_t>(axis)]; }
    double origin(int axis) const { return origin_[static_cast<std::size_t>(axis)]; }
    std::span<const std::size_t> counts() const { return counts_; }
    std::span<const double> spacings() const { return spacing_; }
    std::span<const double> origins() const { return origin_; }

    std::size_t t_count() const { return counts_.back(); }
    double t_spacing() const { return spacing_.back(); }
    double t_min() const { return origin_.back(); }
    double t_max() const { return coord(t_axis(), t_count() - 1); }

    /// Number of spatial points, i.e. number of t-lines.
    std::size_t spatial_size() const { return spatial_size_; }
    std::size_t size() const { return spatial_size_ * counts_.back(); }

    std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
    double coord(int axis, std::size_t index) const {
        return origin(axis) + static_cast<double>(index) * spacing(axis);
    }
    /// Product of the spatial spacings (quadrature weight of one spatial cell).
    double spatial_cell_volume() const;
    /// Largest spacing over all axes.
    double max_spacing() const;
    /// Smallest extent (count - 1) * spacing over all axes, in field units.
    double extent(int axis) const { return static_cast<double>(count(axis) - 1) * spacing(axis); }

    /// Decomposes a spatial line index into per-axis indices.
    void spatial_indices(std::size_t line, std::span<std::size_t> out) const;

    bool operator==(const GridSpec& other) const = default;

private:
    int spatial_dim_;
    std::vector<std::size_t> counts_;
    std::vector<double> spacing_;
    std::vector<double> origin_;
    std::vector<std::size_t> strides_;
    std::size_t spatial_size_;
};

/// Inclusive per-axis index intervals.
struct IndexBox {
    std::vector<std::size_t> lo;
    std::vector<std::size_t> hi;

    bool contains(std::span<const std::size_t> index) const;
    bool operator==(const IndexBox&) const = default;
};

/// Whole grid shrunk by `margin` cells on every side of every axis.
IndexBox interior_box(const GridSpec& grid, std::size_t margin);
/// The full grid.
IndexBox full_box(const GridSpec& grid);

struct SupportBox {
    IndexBox box;
    double max_abs_outside = 0.0;
};

/// Dense real field on a GridSpec. Values are finite and immutable.
class ScalarField {
public:
    explicit ScalarField(GridSpec grid);
    ScalarField(GridSpec grid, std::vector<double> values);

    const GridSpec& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t flat) const { return values_[flat]; }
    /// The t-line owned by spatial point `line`.
    std::span<const double> line(std::size_t line) const {
        return std::span<const double>(values_).subspan(line * grid_.t_count(), grid_.t_count());
    }

private:
    GridSpec grid_;
    std::vector<double> values_;
};

/// Samples `fn(coords)` at every grid point; coords has grid.axes() entries.
ScalarField sample(const GridSpec& grid, const std::function<double(std::span<const double>)>& fn);

/// Per-spatial-point scalar (the result of integrating out the t-axis).
struct SpatialField {
    std::vector<std::size_t> counts;
    std::vector<double> spacing;
    std::vector<double> origin;
    std::vector<double> values;

    double max_abs() const;
};

ScalarField cumulative_t_integral(const ScalarField& f);
SpatialField total_t_integral(const ScalarField& f);
ScalarField partial_t(const ScalarField& f);

/// Smallest box outside which every |value| <= tol, or nullopt if none exceeds tol.
std::optional<SupportBox> detect_support(const ScalarField& f, double tol);

struct HalfspaceResult {
    /// Largest grid t with |f| <= tol on every sample below it.
    double t0 = 0.0;
    /// Whether the t-minimum slab is itself below tol.
    bool bottom_clean = true;
    /// Set only when the caller asked for strict clearance and the bottom slab is dirty.
    bool violated = false;
};

enum class HalfspaceMode { lenient, strict };

HalfspaceResult detect_halfspace(const ScalarField& f, double tol,
                                 HalfspaceMode mode = HalfspaceMode::strict);

/// Grid-weighted L2 norm: sqrt(sum v^2 * cell volume).
double l2_norm(const ScalarField& f);
double l2_norm(const ScalarField& f, const IndexBox& region);
double linf_norm(const ScalarField& f);
double linf_norm(const ScalarField& f, const IndexBox& region);

ScalarField add(const ScalarField& a, const ScalarField& b);
ScalarField subtract(const ScalarField& a, const ScalarField& b);
ScalarField scale(const ScalarField& f, double factor);

/// Shifts by whole cells per axis; vacated samples are zero.
ScalarField shift(const ScalarField& f, std::span<const long> cells);

/// ||a - b|| / ||b|| over `region`.
double relative_l2_error(const ScalarField& a, const ScalarField& b, const IndexBox& region);

}  // namespace crt

#endif
