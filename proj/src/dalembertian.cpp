#include "crt/dalembertian.hpp"

#include <string>
#include <vector>

#include "crt/error.hpp"
#include "crt/parallel.hpp"

namespace crt {

namespace {

// out += factor * d^2 f / d(axis)^2, walking every 1-D line along `axis`.
void accumulate_second_derivative(const GridSpec& grid, std::span<const double> in,
                                  std::vector<double>& out, int axis, double factor) {
    const std::size_t n = grid.count(axis);
    const std::size_t stride = grid.stride(axis);
    const double c = factor / (grid.spacing(axis) * grid.spacing(axis));
    const std::size_t block = stride * n;
    const std::size_t outer = grid.size() / block;
    parallel_for(outer, [&](std::size_t begin, std::size_t end) {
        for (std::size_t o = begin; o < end; ++o) {
            const double* p = in.data() + o * block;
            double* q = out.data() + o * block;
            auto row = [&](std::size_t i) { return p + i * stride; };
            for (std::size_t j = 0; j < stride; ++j) {
                q[j] += c * (2.0 * row(0)[j] - 5.0 * row(1)[j] + 4.0 * row(2)[j] - row(3)[j]);
            }
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double* lo = row(i - 1);
                const double* mid = row(i);
                const double* hi = row(i + 1);
                double* dst = q + i * stride;
                for (std::size_t j = 0; j < stride; ++j) dst[j] += c * (lo[j] - 2.0 * mid[j] + hi[j]);
            }
            double* last = q + (n - 1) * stride;
            for (std::size_t j = 0; j < stride; ++j) {
                last[j] += c * (2.0 * row(n - 1)[j] - 5.0 * row(n - 2)[j] + 4.0 * row(n - 3)[j] -
                                row(n - 4)[j]);
            }
        }
    });
}

}  // namespace

ScalarField second_derivative(const ScalarField& f, int axis) {
    if (axis < 0 || axis >= f.grid().axes()) throw DomainError("second_derivative: bad axis");
    std::vector<double> out(f.grid().size(), 0.0);
    accumulate_second_derivative(f.grid(), f.values(), out, axis, 1.0);
    return ScalarField(f.grid(), std::move(out));
}

ScalarField apply_box(const ScalarField& f, const ConeParams& cone, int k) {
    if (k < 1) throw DomainError("apply_box: k must be >= 1");
    const auto& grid = f.grid();
    for (int a = 0; a < grid.axes(); ++a) {
        if (grid.count(a) < static_cast<std::size_t>(2 * k + 2)) {
            throw DomainError("apply_box: axis " + std::to_string(a) + " needs at least " +
                              std::to_string(2 * k + 2) + " samples for k = " + std::to_string(k));
        }
    }
    const double tan2 = cone.tan_phi() * cone.tan_phi();
    std::vector<double> current(f.values().begin(), f.values().end());
    for (int pass = 0; pass < k; ++pass) {
        std::vector<double> next(grid.size(), 0.0);
        accumulate_second_derivative(grid, current, next, grid.t_axis(), 1.0);
        for (int a = 0; a < grid.spatial_dim(); ++a) {
            accumulate_second_derivative(grid, current, next, a, -tan2);
        }
        current = std::move(next);
    }
    return ScalarField(grid, std::move(current));
}

}  // namespace crt
