#ifndef GAITSEG_SPECTRAL_HPP
#define GAITSEG_SPECTRAL_HPP

#include <complex>
#include <span>
#include <vector>

namespace gaitseg {

/// In-place radix-2 FFT; size must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse = false);

/// Two-sided power spectrum estimate of one windowed segment at the DFT
/// frequencies k/N cycles/sample: |sum w_n x_n e^{-i2pi kn/N}|^2 / sum w_n^2.
/// For white noise of variance s2 the expectation is s2 at every bin.
/// Arbitrary N (naive DFT below 256, FFT for powers of two).
std::vector<double> power_spectrum(std::span<const double> x, bool hann);

/// Welch-averaged two-sided PSD: Hann window, 50% overlap. Returns estimates
/// at bins k = 0..seg_len/2 with freqs_hz[k] = k * rate / seg_len.
struct WelchResult {
  std::vector<double> freq_hz;
  std::vector<double> psd;
};
WelchResult welch_psd(std::span<const double> x, std::size_t seg_len,
                      double rate);

std::vector<double> hann_window(std::size_t n);

/// Frequency (Hz) of the maximum Welch PSD bin within [f_lo, f_hi].
double dominant_frequency(std::span<const double> x, double rate, double f_lo,
                          double f_hi, std::size_t seg_len = 0);

}  // namespace gaitseg

#endif
