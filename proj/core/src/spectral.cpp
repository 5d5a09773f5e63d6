#include "gaitseg/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gaitseg {

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang =
        (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= static_cast<double>(n);
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                static_cast<double>(i) /
                                static_cast<double>(n > 1 ? n - 1 : 1));
  return w;
}

std::vector<double> power_spectrum(std::span<const double> x, bool hann) {
  const std::size_t n = x.size();
  std::vector<double> w =
      hann ? hann_window(n) : std::vector<double>(n, 1.0);
  double wss = 0.0;
  for (double v : w) wss += v * v;
  if (wss <= 0) wss = 1.0;

  const bool pow2 = n > 0 && (n & (n - 1)) == 0 && n >= 256;
  std::vector<double> p(n);
  if (pow2) {
    std::vector<std::complex<double>> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = x[i] * w[i];
    fft_pow2(a);
    for (std::size_t k = 0; k < n; ++k) p[k] = std::norm(a[k]) / wss;
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> acc(0.0, 0.0);
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i)
        acc += x[i] * w[i] *
               std::complex<double>(std::cos(ang * static_cast<double>(i)),
                                    std::sin(ang * static_cast<double>(i)));
      p[k] = std::norm(acc) / wss;
    }
  }
  return p;
}

WelchResult welch_psd(std::span<const double> x, std::size_t seg_len,
                      double rate) {
  if (seg_len < 2 || x.size() < seg_len)
    throw std::invalid_argument("welch: segment longer than data");
  const std::size_t hop = seg_len / 2;
  std::vector<double> acc(seg_len, 0.0);
  std::size_t count = 0;
  for (std::size_t start = 0; start + seg_len <= x.size(); start += hop) {
    auto p = power_spectrum(x.subspan(start, seg_len), /*hann=*/true);
    for (std::size_t k = 0; k < seg_len; ++k) acc[k] += p[k];
    ++count;
  }
  WelchResult out;
  for (std::size_t k = 0; k <= seg_len / 2; ++k) {
    out.freq_hz.push_back(static_cast<double>(k) * rate /
                          static_cast<double>(seg_len));
    out.psd.push_back(acc[k] / static_cast<double>(count));
  }
  return out;
}

double dominant_frequency(std::span<const double> x, double rate, double f_lo,
                          double f_hi, std::size_t seg_len) {
  if (seg_len == 0) {
    seg_len = 1;
    while (seg_len * 2 <= x.size() && seg_len < 4096) seg_len *= 2;
  }
  WelchResult w = welch_psd(x, seg_len, rate);
  double best_f = f_lo, best_p = -1.0;
  for (std::size_t k = 0; k < w.freq_hz.size(); ++k) {
    if (w.freq_hz[k] < f_lo || w.freq_hz[k] > f_hi) continue;
    if (w.psd[k] > best_p) {
      best_p = w.psd[k];
      best_f = w.freq_hz[k];
    }
  }
  return best_f;
}

}  // namespace gaitseg
