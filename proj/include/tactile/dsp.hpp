#ifndef TACTILE_DSP_HPP
#define TACTILE_DSP_HPP

#include <cstddef>
#include <vector>

namespace tactile {

// Rational-rate polyphase resampler (windowed-sinc kernel, tap sums
// renormalized so constants are preserved exactly). Output length is
// in.size() * up / down, which must divide evenly.
std::vector<double> rational_resample(const std::vector<double>& in, int up,
                                      int down);

// Centered moving mean with edge shrinking (window trimmed at the ends).
std::vector<double> moving_mean(const std::vector<double>& in, int window);

// Samples `in` at fractional index positions via linear interpolation.
double sample_linear(const std::vector<double>& in, double index);

// Periodic Hann window of the given length.
std::vector<double> hann_window(std::size_t length);

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular mel filter bank: `bands` filters spanning [0, f_max] Hz over
// `bins` linear frequency bins of an FFT at rate `rate_hz` with length
// `fft_len`. Returns row-major [bands x bins] weights.
std::vector<double> mel_filter_bank(int bands, int bins, int fft_len,
                                    double rate_hz, double f_max);

// Center frequency (Hz) of mel filter `band` in the bank above.
double mel_band_center_hz(int band, int bands, double f_max);

}  // namespace tactile

#endif  // TACTILE_DSP_HPP
