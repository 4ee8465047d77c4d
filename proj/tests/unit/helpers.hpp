#ifndef CRT_TEST_HELPERS_HPP
#define CRT_TEST_HELPERS_HPP

#include <cmath>
#include <cstddef>

#include "crt/field.hpp"

namespace crt::test {

/// n points per axis on [-x_half, x_half]^m x [t_lo, t_hi].
inline GridSpec box_grid(int m, std::size_t nx, double x_half, std::size_t nt, double t_lo, double t_hi) {
    const double hx = 2.0 * x_half / static_cast<double>(nx - 1);
    const double ht = (t_hi - t_lo) / static_cast<double>(nt - 1);
    return GridSpec::isotropic(m, nx, hx, -x_half, nt, ht, t_lo);
}

inline double max_abs_diff(const ScalarField& a, const ScalarField& b, const IndexBox& region) {
    return linf_norm(subtract(a, b), region);
}

}  // namespace crt::test

#endif
