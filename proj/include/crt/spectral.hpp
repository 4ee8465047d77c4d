#ifndef CRT_SPECTRAL_HPP
#define CRT_SPECTRAL_HPP

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "crt/cone.hpp"
#include "crt/field.hpp"

namespace crt {

using complex = std::complex<double>;

/// alpha_m = e^{-i pi (m+1)/2} 2^m pi^{(m-1)/2} Gamma((m+1)/2), m = spatial dimension.
complex alpha(int m);
/// beta_m = sqrt(2) e^{-i pi (m+1)/2} 2^{m-1}/(1-m) pi^{(m-1)/2} Gamma((m+1)/2). Throws for m = 1.
complex beta(int m);

/// W^s on the branch arg W in (-2 pi, 0), the branch paired with alpha/beta above.
complex branch_pow(complex w, double s);

/**
 * Fourier symbols of the cone kernels at complex temporal frequency sigma
 * (Im sigma < 0) and real spatial frequency omega, for half-opening phi.
 */
class SymbolEvaluator {
public:
    SymbolEvaluator(int spatial_dim, const ConeParams& cone, double epsilon);

    int spatial_dim() const { return m_; }
    const ConeParams& cone() const { return cone_; }
    double epsilon() const { return epsilon_; }

    /// sigma^2 - tan^2(phi) |omega|^2.
    complex characteristic(std::span<const double> omega, complex sigma) const;

    /// tan^m(phi) alpha_m i sigma / W^{(m+1)/2}.
    complex symbol_D(std::span<const double> omega, complex sigma) const;

    /// sqrt(2) sin(phi) tan^{m-1}(phi) beta_m / W^{(m-1)/2}; at phi = pi/4 this is beta_m / W^{(m-1)/2}.
    complex symbol_Dprime(std::span<const double> omega, complex sigma) const;

private:
    int m_;
    ConeParams cone_;
    double epsilon_;
    complex alpha_;
};

/// (-1)^k (sigma^2 - tan^2(phi) |omega|^2)^k, the symbol of the k-fold modified d'Alembertian.
complex box_symbol(std::span<const double> omega, complex sigma, const ConeParams& cone, int k);

/// Default damping 4 / (t-extent of the grid).
double default_epsilon(const GridSpec& grid);

using Multiplier = std::function<complex(std::span<const double> omega, complex sigma)>;

struct SpectralOptions {
    /// Zero-padding factor per axis (spatial axes, then t). Each entry >= 1.
    std::vector<double> padding;
    /// Relative threshold on the imaginary residue, as a fraction of linf(real part).
    double residue_threshold = 1e-8;

    /// 2x on every axis.
    static SpectralOptions doubled(const GridSpec& grid);
};

struct SpectralDiagnostics {
    double epsilon = 0.0;
    /// max |Im| / max |Re| of the back-transformed field.
    double imag_residue = 0.0;
    bool residue_warning = false;
    std::vector<std::size_t> padded_counts;
};

struct SpectralResult {
    ScalarField field;
    SpectralDiagnostics diagnostics;
};

/**
 * Applies a Fourier multiplier on the line Im sigma = -epsilon:
 * e^{eps t} IFFT[ multiplier(omega, sigma - i eps) FFT[e^{-eps t} f] ],
 * with zero padding per `options` and cropping back to the input grid.
 */
SpectralResult apply_multiplier(const ScalarField& f, const Multiplier& multiplier, double epsilon,
                                const SpectralOptions& options);
SpectralResult apply_multiplier(const ScalarField& f, const Multiplier& multiplier, double epsilon);

/// Forward transform through the symbol of D_phi (the fast path).
SpectralResult spectral_forward_crt(const ScalarField& f, const ConeParams& cone, double epsilon,
                                    const SpectralOptions& options);

}  // namespace crt

#endif
