#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace phaselab {

/// Angular wavenumbers of the n-point DFT with sample spacing h, in FFT order.
/// For even n the Nyquist entry is set to 0 so odd powers stay Hermitian.
std::vector<double> dft_wavenumbers(std::size_t n, double h);

/// Applies a function of the momentum operator, f(p) with p = hbar * k, to
/// uniformly sampled values through the discrete Fourier transform.
std::vector<std::complex<double>> apply_momentum_symbol(
    std::span<const std::complex<double>> samples, double h, double hbar,
    const std::function<std::complex<double>(double)>& symbol);

/// |DFT|^2 of the samples, in FFT order (matches dft_wavenumbers).
std::vector<double> power_spectrum(std::span<const std::complex<double>> samples);

/// d/dx of band-limited samples.
std::vector<std::complex<double>> spectral_derivative(
    std::span<const std::complex<double>> samples, double h);

}  // namespace phaselab
