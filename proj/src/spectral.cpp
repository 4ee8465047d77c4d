#include "crt/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "crt/error.hpp"
#include "crt/parallel.hpp"

namespace crt {

namespace {

constexpr double kPi = std::numbers::pi;

// e^{-i pi (m+1)/2} = (-i)^{m+1}, exact for integer m.
complex quarter_turn_phase(int m) {
    switch (((m + 1) % 4 + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, -1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, 1.0};
    }
}

double alpha_magnitude(int m) {
    return std::pow(2.0, m) * std::pow(kPi, 0.5 * (m - 1)) * std::tgamma(0.5 * (m + 1));
}

// FFTW planning is not thread-safe.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(fftw_complex* p) const { fftw_free(p); }
};

std::size_t good_fft_size(std::size_t n) {
    for (std::size_t c = n;; ++c) {
        std::size_t r = c;
        for (std::size_t p : {2, 3, 5, 7}) {
            while (r % p == 0) r /= p;
        }
        if (r == 1) return c;
    }
}

double frequency(std::size_t k, std::size_t n, double h) {
    const auto kk = static_cast<double>(k);
    const auto nn = static_cast<double>(n);
    const double signed_k = k < (n + 1) / 2 ? kk : kk - nn;
    return 2.0 * kPi * signed_k / (nn * h);
}

}  // namespace

complex alpha(int m) {
    if (m < 1) throw DomainError("alpha: dimension must be >= 1");
    return quarter_turn_phase(m) * alpha_magnitude(m);
}

complex beta(int m) {
    if (m < 1) throw DomainError("beta: dimension must be >= 1");
    if (m == 1) throw DomainError("beta: division by zero at m = 1 (1 - m = 0)");
    const double magnitude = std::sqrt(2.0) * std::pow(2.0, m - 1) / (1.0 - m) *
                             std::pow(kPi, 0.5 * (m - 1)) * std::tgamma(0.5 * (m + 1));
    return quarter_turn_phase(m) * magnitude;
}

complex branch_pow(complex w, double s) {
    const double r = std::abs(w);
    if (r == 0.0) {
        if (s > 0.0) return {0.0, 0.0};
        throw DomainError("branch_pow: zero base with non-positive exponent");
    }
    double arg = std::arg(w);
    if (arg >= 0.0) arg -= 2.0 * kPi;
    return std::polar(std::pow(r, s), s * arg);
}

SymbolEvaluator::SymbolEvaluator(int spatial_dim, const ConeParams& cone, double epsilon)
    : m_(spatial_dim), cone_(cone), epsilon_(epsilon) {
    if (m_ < 1) throw DomainError("symbol evaluator: spatial dimension must be >= 1");
    if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_)) {
        throw DomainError("symbol evaluator: epsilon must be positive");
    }
    alpha_ = alpha(m_);
}

complex SymbolEvaluator::characteristic(std::span<const double> omega, complex sigma) const {
    double w2 = 0.0;
    for (double w : omega) w2 += w * w;
    const double t = cone_.tan_phi();
    return sigma * sigma - t * t * w2;
}

complex SymbolEvaluator::symbol_D(std::span<const double> omega, complex sigma) const {
    if (!(sigma.imag() < 0.0)) throw DomainError("symbol_D: requires Im sigma < 0");
    const complex w = characteristic(omega, sigma);
    const complex i_sigma = complex(0.0, 1.0) * sigma;
    return std::pow(cone_.tan_phi(), m_) * alpha_ * i_sigma / branch_pow(w, 0.5 * (m_ + 1));
}

complex SymbolEvaluator::symbol_Dprime(std::span<const double> omega, complex sigma) const {
    if (m_ < 2) throw DomainError("symbol_Dprime: weight non-integrable in one spatial dimension");
    if (!(sigma.imag() < 0.0)) throw DomainError("symbol_Dprime: requires Im sigma < 0");
    const complex w = characteristic(omega, sigma);
    const double angle = std::sqrt(2.0) * cone_.sin_phi() * std::pow(cone_.tan_phi(), m_ - 1);
    return angle * beta(m_) / branch_pow(w, 0.5 * (m_ - 1));
}

complex box_symbol(std::span<const double> omega, complex sigma, const ConeParams& cone, int k) {
    if (k < 0) throw DomainError("box_symbol: k must be >= 0");
    double w2 = 0.0;
    for (double w : omega) w2 += w * w;
    const double t = cone.tan_phi();
    const complex base = -(sigma * sigma - t * t * w2);
    complex out{1.0, 0.0};
    for (int i = 0; i < k; ++i) out *= base;
    return out;
}

double default_epsilon(const GridSpec& grid) { return 4.0 / grid.extent(grid.t_axis()); }

SpectralOptions SpectralOptions::doubled(const GridSpec& grid) {
    SpectralOptions o;
    o.padding.assign(static_cast<std::size_t>(grid.axes()), 2.0);
    return o;
}

SpectralResult apply_multiplier(const ScalarField& f, const Multiplier& multiplier, double epsilon) {
    return apply_multiplier(f, multiplier, epsilon, SpectralOptions::doubled(f.grid()));
}

SpectralResult apply_multiplier(const ScalarField& f, const Multiplier& multiplier, double epsilon,
                                const SpectralOptions& options) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw DomainError("apply_multiplier: epsilon must be positive");
    }
    const auto& grid = f.grid();
    const int axes = grid.axes();
    const int m = grid.spatial_dim();
    if (options.padding.size() != static_cast<std::size_t>(axes)) {
        throw DomainError("apply_multiplier: need one padding factor per axis");
    }
    std::vector<std::size_t> padded(static_cast<std::size_t>(axes));
    std::vector<int> dims(static_cast<std::size_t>(axes));
    std::size_t total = 1;
    for (int a = 0; a < axes; ++a) {
        if (!(options.padding[a] >= 1.0)) throw DomainError("apply_multiplier: padding must be >= 1");
        const auto want = static_cast<std::size_t>(
            std::ceil(options.padding[a] * static_cast<double>(grid.count(a))));
        padded[a] = good_fft_size(want);
        dims[a] = static_cast<int>(padded[a]);
        total *= padded[a];
    }
    const std::size_t pt = padded.back();
    const std::size_t nt = grid.t_count();
    const std::size_t padded_lines = total / pt;

    std::unique_ptr<fftw_complex[], FftwFree> data(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total)));
    if (!data) throw Error("apply_multiplier: out of memory for FFT buffer");
    std::fill_n(&data[0][0], 2 * total, 0.0);

    const double ht = grid.t_spacing();
    std::vector<double> damp(nt);
    for (std::size_t n = 0; n < nt; ++n) damp[n] = std::exp(-epsilon * static_cast<double>(n) * ht);

    // Map each grid line to its padded line.
    std::vector<std::size_t> padded_line(grid.spatial_size());
    {
        std::vector<std::size_t> idx(static_cast<std::size_t>(axes));
        for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
            grid.spatial_indices(line, idx);
            std::size_t p = 0;
            for (int a = 0; a < m; ++a) p = p * padded[a] + idx[a];
            padded_line[line] = p;
        }
    }
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        const auto v = f.line(line);
        fftw_complex* row = data.get() + padded_line[line] * pt;
        for (std::size_t n = 0; n < nt; ++n) row[n][0] = v[n] * damp[n];
    }

    fftw_plan forward;
    fftw_plan backward;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        forward = fftw_plan_dft(axes, dims.data(), data.get(), data.get(), FFTW_FORWARD, FFTW_ESTIMATE);
        backward = fftw_plan_dft(axes, dims.data(), data.get(), data.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(forward);

    std::vector<std::vector<double>> spatial_freq(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
        spatial_freq[a].resize(padded[a]);
        for (std::size_t k = 0; k < padded[a]; ++k) spatial_freq[a][k] = frequency(k, padded[a], grid.spacing(a));
    }
    std::vector<double> t_freq(pt);
    for (std::size_t k = 0; k < pt; ++k) t_freq[k] = frequency(k, pt, ht);

    // A Nyquist bin stands for both +N and -N. Averaging the multiplier over the two
    // signs keeps it Hermitian there, so real kernels give real output.
    const auto is_nyquist = [](std::size_t k, std::size_t n) { return n % 2 == 0 && k == n / 2; };
    const auto evaluate = [&](std::vector<double>& omega, std::span<const int> nyq_axes, double t_re,
                              bool t_nyq) {
        const std::size_t combos = std::size_t{1} << (nyq_axes.size() + (t_nyq ? 1 : 0));
        if (combos == 1) return multiplier(omega, complex(t_re, -epsilon));
        complex acc = 0.0;
        for (std::size_t c = 0; c < combos; ++c) {
            for (std::size_t j = 0; j < nyq_axes.size(); ++j) {
                omega[nyq_axes[j]] = std::abs(omega[nyq_axes[j]]) * ((c >> j) & 1 ? -1.0 : 1.0);
            }
            const double sign = t_nyq && ((c >> nyq_axes.size()) & 1) ? -1.0 : 1.0;
            acc += multiplier(omega, complex(sign * t_re, -epsilon));
        }
        return acc / static_cast<double>(combos);
    };

    const double norm = 1.0 / static_cast<double>(total);
    parallel_for(padded_lines, [&](std::size_t begin, std::size_t end) {
        std::vector<double> omega(static_cast<std::size_t>(m));
        std::vector<int> nyq_axes;
        for (std::size_t line = begin; line < end; ++line) {
            std::size_t rem = line;
            nyq_axes.clear();
            for (int a = m - 1; a >= 0; --a) {
                const std::size_t k = rem % padded[a];
                omega[a] = spatial_freq[a][k];
                if (is_nyquist(k, padded[a])) nyq_axes.push_back(a);
                rem /= padded[a];
            }
            fftw_complex* row = data.get() + line * pt;
            for (std::size_t k = 0; k < pt; ++k) {
                const complex value = evaluate(omega, nyq_axes, t_freq[k], is_nyquist(k, pt)) *
                                      complex(row[k][0], row[k][1]) * norm;
                row[k][0] = value.real();
                row[k][1] = value.imag();
            }
        }
    });

    fftw_execute(backward);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }

    std::vector<double> out(grid.size());
    double max_re = 0.0;
    double max_im = 0.0;
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        const fftw_complex* row = data.get() + padded_line[line] * pt;
        for (std::size_t n = 0; n < nt; ++n) {
            const double re = row[n][0] / damp[n];
            const double im = row[n][1] / damp[n];
            out[line * nt + n] = re;
            max_re = std::max(max_re, std::abs(re));
            max_im = std::max(max_im, std::abs(im));
        }
    }
    SpectralDiagnostics diag;
    diag.epsilon = epsilon;
    diag.imag_residue = max_re > 0.0 ? max_im / max_re : max_im;
    diag.residue_warning = diag.imag_residue > options.residue_threshold;
    diag.padded_counts = padded;
    return SpectralResult{ScalarField(grid, std::move(out)), std::move(diag)};
}

SpectralResult spectral_forward_crt(const ScalarField& f, const ConeParams& cone, double epsilon,
                                    const SpectralOptions& options) {
    const SymbolEvaluator ev(f.grid().spatial_dim(), cone, epsilon);
    return apply_multiplier(
        f, [&ev](std::span<const double> omega, complex sigma) { return ev.symbol_D(omega, sigma); },
        epsilon, options);
}

}  // namespace crt
