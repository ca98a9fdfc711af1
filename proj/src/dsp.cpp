#include "tactile/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tactile {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}
}  // namespace

std::vector<double> rational_resample(const std::vector<double>& in, int up,
                                      int down) {
  if (up <= 0 || down <= 0)
    throw std::invalid_argument("rational_resample: factors must be positive");
  if ((in.size() * static_cast<std::size_t>(up)) % static_cast<std::size_t>(down) != 0)
    throw std::invalid_argument("rational_resample: length not divisible by rate ratio");
  const std::size_t out_len = in.size() * up / down;
  const double cutoff = std::min(1.0, static_cast<double>(up) / down);  // of input Nyquist
  const int half_width = 24;  // input samples per side

  std::vector<double> out(out_len, 0.0);
  for (std::size_t k = 0; k < out_len; ++k) {
    const double pos = static_cast<double>(k) * down / up;
    const auto n0 = static_cast<long>(std::floor(pos)) - half_width;
    const auto n1 = static_cast<long>(std::floor(pos)) + half_width + 1;
    double acc = 0, wsum = 0;
    for (long n = n0; n <= n1; ++n) {
      if (n < 0 || n >= static_cast<long>(in.size())) continue;
      const double d = pos - static_cast<double>(n);
      // Hann-windowed sinc.
      const double w = 0.5 * (1.0 + std::cos(kPi * d / (half_width + 1)));
      const double tap = cutoff * sinc(cutoff * d) * w;
      acc += tap * in[static_cast<std::size_t>(n)];
      wsum += tap;
    }
    // Tap-sum renormalization keeps constants constant; the kernel sum is
    // ~1 in the interior so passband gain is unaffected.
    out[k] = (wsum != 0.0) ? acc / wsum : 0.0;
  }
  return out;
}

std::vector<double> moving_mean(const std::vector<double>& in, int window) {
  if (window <= 0) throw std::invalid_argument("moving_mean: window must be positive");
  const int half = window / 2;
  const auto n = static_cast<long>(in.size());
  std::vector<double> out(in.size());
  // Prefix sums for O(n).
  std::vector<double> prefix(in.size() + 1, 0.0);
  for (std::size_t i = 0; i < in.size(); ++i) prefix[i + 1] = prefix[i] + in[i];
  for (long i = 0; i < n; ++i) {
    const long lo = std::max<long>(0, i - half);
    const long hi = std::min<long>(n - 1, i + half);
    out[static_cast<std::size_t>(i)] =
        (prefix[static_cast<std::size_t>(hi + 1)] - prefix[static_cast<std::size_t>(lo)]) /
        static_cast<double>(hi - lo + 1);
  }
  return out;
}

double sample_linear(const std::vector<double>& in, double index) {
  if (in.empty()) throw std::invalid_argument("sample_linear: empty input");
  const double clamped =
      std::clamp(index, 0.0, static_cast<double>(in.size() - 1));
  const auto i0 = static_cast<std::size_t>(clamped);
  const std::size_t i1 = std::min(i0 + 1, in.size() - 1);
  const double t = clamped - static_cast<double>(i0);
  return (1.0 - t) * in[i0] + t * in[i1];
}

std::vector<double> hann_window(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t i = 0; i < length; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                 static_cast<double>(length)));
  return w;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_filter_bank(int bands, int bins, int fft_len,
                                    double rate_hz, double f_max) {
  std::vector<double> bank(static_cast<std::size_t>(bands) * bins, 0.0);
  const double mel_max = hz_to_mel(f_max);
  std::vector<double> edges(static_cast<std::size_t>(bands) + 2);
  for (int i = 0; i < bands + 2; ++i)
    edges[static_cast<std::size_t>(i)] =
        mel_to_hz(mel_max * static_cast<double>(i) / (bands + 1));

  for (int b = 0; b < bands; ++b) {
    const double lo = edges[static_cast<std::size_t>(b)];
    const double mid = edges[static_cast<std::size_t>(b) + 1];
    const double hi = edges[static_cast<std::size_t>(b) + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * rate_hz / fft_len;
      double w = 0;
      if (f > lo && f < mid)
        w = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi)
        w = (hi - f) / (hi - mid);
      bank[static_cast<std::size_t>(b) * bins + k] = w;
    }
  }
  return bank;
}

double mel_band_center_hz(int band, int bands, double f_max) {
  const double mel_max = hz_to_mel(f_max);
  return mel_to_hz(mel_max * static_cast<double>(band + 1) / (bands + 1));
}

}  // namespace tactile
