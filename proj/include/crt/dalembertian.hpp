#ifndef CRT_DALEMBERTIAN_HPP
#define CRT_DALEMBERTIAN_HPP

#include "crt/cone.hpp"
#include "crt/field.hpp"

namespace crt {

/// Second derivative along one axis: [1, -2, 1]/h^2 inside, one-sided
/// second-order [2, -5, 4, -1]/h^2 on the two boundary samples.
ScalarField second_derivative(const ScalarField& f, int axis);

/// k-fold modified d'Alembertian (d^2/dt^2 - tan^2(phi) Laplacian_x)^k.
/// Needs at least 2k + 2 samples per axis.
ScalarField apply_box(const ScalarField& f, const ConeParams& cone, int k);

}  // namespace crt

#endif
