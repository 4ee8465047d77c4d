#include "crt/phantoms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "crt/error.hpp"
#include "crt/parallel.hpp"

namespace crt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGaussianExtent = 8.0;

double support_scale(PhantomKind kind) { return kind == PhantomKind::bump ? 1.0 : kGaussianExtent; }

double scaled_r2(const Blob& b, std::span<const double> p) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < b.center.size(); ++a) {
        const double u = (p[a] - b.center[a]) / b.radii[a];
        r2 += u * u;
    }
    return r2;
}

double blob_value(PhantomKind kind, const Blob& b, std::span<const double> p) {
    const double r2 = scaled_r2(b, p);
    if (kind == PhantomKind::gaussian) return b.amplitude * std::exp(-0.5 * r2);
    if (r2 >= 1.0) return 0.0;
    return b.amplitude * std::exp(1.0 - 1.0 / (1.0 - r2));
}

double blob_value_dt(PhantomKind kind, const Blob& b, std::span<const double> p) {
    const std::size_t t = b.center.size() - 1;
    const double r2 = scaled_r2(b, p);
    const double dr2_dt = 2.0 * (p[t] - b.center[t]) / (b.radii[t] * b.radii[t]);
    if (kind == PhantomKind::gaussian) return -0.5 * dr2_dt * b.amplitude * std::exp(-0.5 * r2);
    if (r2 >= 1.0) return 0.0;
    const double q = 1.0 - r2;
    return -b.amplitude * std::exp(1.0 - 1.0 / q) * dr2_dt / (q * q);
}

void validate(const PhantomSpec& spec) {
    if (spec.spatial_dim < 1 || spec.spatial_dim > kMaxSpatialDim) {
        throw DomainError("phantom: spatial dimension must be in [1, 3]");
    }
    const auto axes = static_cast<std::size_t>(spec.spatial_dim + 1);
    for (const auto& b : spec.blobs) {
        if (b.center.size() != axes || b.radii.size() != axes) {
            throw DomainError("phantom: blob needs " + std::to_string(axes) + " center and radius entries");
        }
        for (double r : b.radii) {
            if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("phantom: radii must be positive");
        }
        if (!std::isfinite(b.amplitude)) throw DomainError("phantom: amplitude must be finite");
    }
}

double simpson_step(const std::function<double(double)>& fn, double a, double b, double fa, double fm,
                    double fb, double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = fn(lm);
    const double frm = fn(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return simpson_step(fn, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           simpson_step(fn, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

// Orthonormal frame whose last vector is `dir` (unit).
std::vector<std::vector<double>> frame_around(const std::vector<double>& dir) {
    const std::size_t m = dir.size();
    std::vector<std::vector<double>> basis;
    if (m == 2) {
        basis.push_back({-dir[1], dir[0]});
    } else if (m == 3) {
        std::array<double, 3> helper{1.0, 0.0, 0.0};
        if (std::abs(dir[0]) > 0.9) helper = {0.0, 1.0, 0.0};
        std::vector<double> e1(3);
        const double d = helper[0] * dir[0] + helper[1] * dir[1] + helper[2] * dir[2];
        for (int i = 0; i < 3; ++i) e1[i] = helper[i] - d * dir[i];
        const double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
        for (double& v : e1) v /= n1;
        std::vector<double> e2{dir[1] * e1[2] - dir[2] * e1[1], dir[2] * e1[0] - dir[0] * e1[2],
                               dir[0] * e1[1] - dir[1] * e1[0]};
        basis.push_back(e1);
        basis.push_back(e2);
    }
    basis.push_back(dir);
    return basis;
}

// Integral over the unit sphere S^{m-1} of g(theta), restricted to the cap of
// half-angle `cap` around the last frame vector (cap >= pi means whole sphere).
// abs_tol is measured against the integral of |g| <= g_max |S^{m-1}|.
double sphere_integral(const std::function<double(std::span<const double>)>& g, int m,
                       const std::vector<std::vector<double>>& frame, double cap, double abs_tol) {
    std::vector<double> theta(static_cast<std::size_t>(m));
    if (m == 1) {
        theta[0] = 1.0;
        double s = g(theta);
        theta[0] = -1.0;
        return s + g(theta);
    }
    const double half = std::min(cap, kPi);
    if (m == 2) {
        auto on_circle = [&](double a) {
            for (int i = 0; i < 2; ++i) theta[i] = std::sin(a) * frame[0][i] + std::cos(a) * frame[1][i];
            return g(theta);
        };
        return adaptive_simpson(on_circle, -half, half, abs_tol, 16);
    }
    // m == 3: polar angle about the frame axis, azimuth by periodic trapezoid.
    auto ring = [&](double polar) {
        const double sp = std::sin(polar);
        const double cp = std::cos(polar);
        double prev = 0.0;
        for (int n = 32;; n *= 2) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) {
                const double az = 2.0 * kPi * j / n;
                for (int i = 0; i < 3; ++i) {
                    theta[i] = sp * (std::cos(az) * frame[0][i] + std::sin(az) * frame[1][i]) +
                               cp * frame[2][i];
                }
                s += g(theta);
            }
            s *= 2.0 * kPi / n;
            if (n > 32 && std::abs(s - prev) * sp <= abs_tol) return s * sp;
            if (n >= (1 << 14)) return s * sp;
            prev = s;
        }
    };
    return adaptive_simpson(ring, 0.0, half, abs_tol, 16);
}

double sphere_area(int m) {
    if (m == 1) return 2.0;
    if (m == 2) return 2.0 * kPi;
    return 4.0 * kPi;
}

}  // namespace

PhantomSpec PhantomSpec::single(PhantomKind kind, std::vector<double> center, double radius,
                                double amplitude) {
    PhantomSpec spec;
    spec.kind = kind;
    spec.spatial_dim = static_cast<int>(center.size()) - 1;
    Blob b;
    b.radii.assign(center.size(), radius);
    b.center = std::move(center);
    b.amplitude = amplitude;
    spec.blobs.push_back(std::move(b));
    validate(spec);
    return spec;
}

double PhantomSpec::value(std::span<const double> point) const {
    double v = 0.0;
    for (const auto& b : blobs) v += blob_value(kind, b, point);
    return v;
}

double PhantomSpec::value_dt(std::span<const double> point) const {
    double v = 0.0;
    for (const auto& b : blobs) v += blob_value_dt(kind, b, point);
    return v;
}

std::vector<double> PhantomSpec::lower_bounds() const {
    std::vector<double> lo(static_cast<std::size_t>(spatial_dim + 1), INFINITY);
    for (const auto& b : blobs) {
        for (std::size_t a = 0; a < lo.size(); ++a) {
            lo[a] = std::min(lo[a], b.center[a] - support_scale(kind) * b.radii[a]);
        }
    }
    return lo;
}

std::vector<double> PhantomSpec::upper_bounds() const {
    std::vector<double> hi(static_cast<std::size_t>(spatial_dim + 1), -INFINITY);
    for (const auto& b : blobs) {
        for (std::size_t a = 0; a < hi.size(); ++a) {
            hi[a] = std::max(hi[a], b.center[a] + support_scale(kind) * b.radii[a]);
        }
    }
    return hi;
}

bool fits(const PhantomSpec& spec, const GridSpec& grid, std::size_t margin_cells) {
    validate(spec);
    if (spec.spatial_dim != grid.spatial_dim()) return false;
    if (spec.blobs.empty()) return true;
    const auto lo = spec.lower_bounds();
    const auto hi = spec.upper_bounds();
    for (int a = 0; a < grid.axes(); ++a) {
        const double guard = static_cast<double>(margin_cells) * grid.spacing(a);
        if (lo[a] < grid.origin(a) + guard) return false;
        if (hi[a] > grid.coord(a, grid.count(a) - 1) - guard) return false;
    }
    return true;
}

ScalarField render_phantom(const PhantomSpec& spec, const GridSpec& grid, std::size_t margin_cells) {
    if (!fits(spec, grid, margin_cells)) {
        throw DomainError("phantom does not fit the grid with a " + std::to_string(margin_cells) +
                          "-cell guard");
    }
    return sample(grid, [&spec](std::span<const double> p) { return spec.value(p); });
}

ScalarField render_phantom_dt(const PhantomSpec& spec, const GridSpec& grid, std::size_t margin_cells) {
    if (!fits(spec, grid, margin_cells)) {
        throw DomainError("phantom does not fit the grid with a " + std::to_string(margin_cells) +
                          "-cell guard");
    }
    return sample(grid, [&spec](std::span<const double> p) { return spec.value_dt(p); });
}

double adaptive_simpson(const std::function<double(double)>& fn, double a, double b, double abs_tol,
                        int initial_panels) {
    if (!(b > a)) return 0.0;
    const int panels = std::max(initial_panels, 1);
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double hi = p + 1 == panels ? b : lo + width;
        const double flo = fn(lo);
        const double fhi = fn(hi);
        const double fm = fn(0.5 * (lo + hi));
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
        total += simpson_step(fn, lo, hi, flo, fm, fhi, whole, abs_tol / panels, 40);
    }
    return total;
}

std::vector<double> oracle_forward_crt(const PhantomSpec& spec,
                                       const std::vector<std::vector<double>>& points,
                                       const ConeParams& cone, const OracleQuadrature& quad,
                                       OracleKernel kernel) {
    validate(spec);
    const int m = spec.spatial_dim;
    if (kernel == OracleKernel::weighted && m < 2) {
        throw DomainError("oracle_forward_crt: weighted kernel needs spatial dimension >= 2");
    }
    const double cot = cone.cot_phi();
    const double reach = support_scale(spec.kind);
    std::vector<double> out(points.size(), 0.0);
    parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& p = points[i];
            if (p.size() != static_cast<std::size_t>(m + 1)) continue;
            double total = 0.0;
            for (const auto& b : spec.blobs) {
                // Radial window from the blob's t-extent and spatial distance.
                double dist2 = 0.0;
                double rmax_sp = 0.0;
                std::vector<double> dir(static_cast<std::size_t>(m));
                for (int a = 0; a < m; ++a) {
                    dir[a] = b.center[a] - p[a];
                    dist2 += dir[a] * dir[a];
                    rmax_sp = std::max(rmax_sp, reach * b.radii[a]);
                }
                const double dist = std::sqrt(dist2);
                const double t_lo = b.center[m] - reach * b.radii[m];
                const double t_hi = b.center[m] + reach * b.radii[m];
                const double r_lo = std::max({0.0, (p[m] - t_hi) / cot, dist - rmax_sp});
                const double r_hi = std::min((p[m] - t_lo) / cot, dist + rmax_sp);
                if (!(r_hi > r_lo)) continue;

                double cap = kPi;
                if (m > 1) {
                    if (dist > rmax_sp) cap = std::asin(rmax_sp / dist);
                    if (dist > 0.0) {
                        for (double& v : dir) v /= dist;
                    } else {
                        dir.assign(static_cast<std::size_t>(m), 0.0);
                        dir[0] = 1.0;
                    }
                }
                const auto frame = frame_around(dir);

                // Tolerances are absolute, scaled by the blob amplitude and the
                // measure of the integration domain.
                const double sphere_tol = 0.1 * quad.rel_tol * std::abs(b.amplitude) * sphere_area(m);
                const double radial_tol =
                    quad.rel_tol * std::abs(b.amplitude) * sphere_area(m) *
                    (kernel == OracleKernel::weighted ? cone.sin_phi() * std::pow(r_hi, m - 1) / (m - 1)
                                                      : std::pow(r_hi, m) / m);
                std::vector<double> q(static_cast<std::size_t>(m + 1));
                auto radial = [&](double r) {
                    auto g = [&](std::span<const double> theta) {
                        for (int a = 0; a < m; ++a) q[a] = p[a] + r * theta[a];
                        q[m] = p[m] - cot * r;
                        return blob_value(spec.kind, b, q);
                    };
                    const double s = sphere_integral(g, m, frame, cap, sphere_tol);
                    if (kernel == OracleKernel::weighted) return cone.sin_phi() * std::pow(r, m - 2) * s;
                    return std::pow(r, m - 1) * s;
                };
                total += adaptive_simpson(radial, r_lo, r_hi, radial_tol, quad.refinement);
            }
            out[i] = total;
        }
    });
    return out;
}

std::complex<double> oracle_symbol(double omega_mag, double tau, int m, double rel_tol) {
    if (!(tau > 0.0)) throw DomainError("oracle_symbol: tau must be positive");
    if (m < 1 || m > 3) throw DomainError("oracle_symbol: m must be 1, 2 or 3");
    const double w = std::abs(omega_mag);
    const double r_end = 40.0 / tau;
    std::function<double(double)> integrand;
    double sphere = 0.0;
    if (m == 1) {
        sphere = 2.0;
        integrand = [w, tau](double r) { return std::cos(w * r) * std::exp(-tau * r); };
    } else if (m == 2) {
        sphere = 2.0 * kPi;
        integrand = [w, tau](double r) { return std::cyl_bessel_j(0.0, w * r) * std::exp(-tau * r) * r; };
    } else {
        sphere = 4.0 * kPi;
        integrand = [w, tau](double r) {
            const double x = w * r;
            const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
            return sinc * std::exp(-tau * r) * r * r;
        };
    }
    // Panels resolve both the oscillation and the decay scale.
    const double scale = std::max(w, tau);
    const int panels = std::max(16, static_cast<int>(std::ceil(r_end * scale)));
    const double bound = std::tgamma(static_cast<double>(m)) / std::pow(tau, m);
    const double value = adaptive_simpson(integrand, 0.0, r_end, rel_tol * bound, panels);
    return {sphere * value, 0.0};
}

}  // namespace crt
