#include "tactile/preprocessing.hpp"

#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

#include "tactile/dsp.hpp"

namespace tactile {

namespace {

std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

// Reflect-pads x by `pad` samples on each side.
std::vector<double> reflect_pad(const std::vector<double>& x, std::size_t pad) {
  std::vector<double> out;
  out.reserve(x.size() + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) out.push_back(x[pad - i]);
  out.insert(out.end(), x.begin(), x.end());
  for (std::size_t i = 0; i < pad; ++i) out.push_back(x[x.size() - 2 - i]);
  return out;
}

}  // namespace

std::string to_string(FusionMode m) {
  switch (m) {
    case FusionMode::kAcc: return "ACC";
    case FusionMode::kFsrT: return "FSR_T";
    case FusionMode::kFsrB: return "FSR_B";
    case FusionMode::kFsrTb: return "FSR_TB";
    case FusionMode::kMultiE: return "MULTI_E";
    case FusionMode::kMultiL: return "MULTI_L";
  }
  throw std::invalid_argument("invalid fusion mode");
}

FusionMode fusion_from_string(const std::string& s) {
  if (s == "ACC") return FusionMode::kAcc;
  if (s == "FSR_T") return FusionMode::kFsrT;
  if (s == "FSR_B") return FusionMode::kFsrB;
  if (s == "FSR_TB") return FusionMode::kFsrTb;
  if (s == "MULTI_E") return FusionMode::kMultiE;
  if (s == "MULTI_L") return FusionMode::kMultiL;
  throw std::invalid_argument(
      "unknown fusion mode '" + s +
      "' (expected ACC, FSR_T, FSR_B, FSR_TB, MULTI_E or MULTI_L)");
}

ArrayD accel_magnitude_downsample(const ArrayF& accel, const AccelNormStats* stats) {
  accel.require_shape({kTrialSamples, 4, 4, 3}, "accel_magnitude_downsample");
  ArrayD out({kAccelResampled, 4, 4});
  std::vector<double> series(kTrialSamples);
  for (std::size_t ny = 0; ny < 4; ++ny)
    for (std::size_t nx = 0; nx < 4; ++nx) {
      for (std::size_t t = 0; t < kTrialSamples; ++t) {
        const double ax = accel(t, ny, nx, 0);
        const double ay = accel(t, ny, nx, 1);
        const double az = accel(t, ny, nx, 2);
        double m = std::sqrt(ax * ax + ay * ay + az * az);
        if (stats)
          m = (m - stats->mean(static_cast<Eigen::Index>(ny),
                               static_cast<Eigen::Index>(nx))) /
              stats->stdev(static_cast<Eigen::Index>(ny),
                           static_cast<Eigen::Index>(nx));
        series[t] = m;
      }
      const auto resampled = rational_resample(series, 6, 7);
      for (std::size_t t = 0; t < kAccelResampled; ++t) out(t, ny, nx) = resampled[t];
    }
  return out;
}

ArrayD log_mel_spectrogram(const ArrayD& sig) {
  sig.require_shape({kAccelResampled, 4, 4}, "log_mel_spectrogram");
  const int bins = kStftWindow / 2 + 1;
  const double rate = 600.0;
  static const std::vector<double> bank =
      mel_filter_bank(kMelBands, bins, kStftWindow, rate, kMelFMaxHz);
  const auto window = hann_window(kStftWindow);

  ArrayD out({kModelFrames, static_cast<std::size_t>(kMelBands), 4, 4});

  std::vector<double> frame(kStftWindow);
  std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(bins));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_r2c_1d(kStftWindow, frame.data(),
                                reinterpret_cast<fftw_complex*>(spectrum.data()),
                                FFTW_ESTIMATE);
  }

  std::vector<double> series(kAccelResampled);
  for (std::size_t ny = 0; ny < 4; ++ny)
    for (std::size_t nx = 0; nx < 4; ++nx) {
      for (std::size_t t = 0; t < kAccelResampled; ++t) series[t] = sig(t, ny, nx);
      const auto padded = reflect_pad(series, kStftWindow / 2);
      for (std::size_t f = 0; f < kModelFrames; ++f) {
        const std::size_t start = f * kStftHop;
        for (int i = 0; i < kStftWindow; ++i)
          frame[static_cast<std::size_t>(i)] =
              padded[start + static_cast<std::size_t>(i)] *
              window[static_cast<std::size_t>(i)];
        fftw_execute(plan);
        for (int b = 0; b < kMelBands; ++b) {
          double acc = 0;
          const double* w = &bank[static_cast<std::size_t>(b) * bins];
          for (int k = 0; k < bins; ++k) acc += w[k] * std::norm(spectrum[static_cast<std::size_t>(k)]);
          out(f, static_cast<std::size_t>(b), ny, nx) = std::log1p(acc);
        }
      }
    }
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

ArrayD reshape_spec(const ArrayD& spec) {
  spec.require_shape({kModelFrames, static_cast<std::size_t>(kMelBands), 4, 4},
                     "reshape_spec");
  ArrayD out({kModelFrames, kImageSize, kImageSize});
  for (std::size_t t = 0; t < kModelFrames; ++t)
    for (std::size_t m = 0; m < kMelBands; ++m)
      for (std::size_t ny = 0; ny < 4; ++ny)
        for (std::size_t nx = 0; nx < 4; ++nx)
          out(t, 7 * ny + m / 7, 7 * nx + m % 7) = spec(t, m, ny, nx);
  return out;
}

ArrayD inverse_reshape_spec(const ArrayD& img) {
  img.require_shape({kModelFrames, kImageSize, kImageSize}, "inverse_reshape_spec");
  ArrayD out({kModelFrames, static_cast<std::size_t>(kMelBands), 4, 4});
  for (std::size_t t = 0; t < kModelFrames; ++t)
    for (std::size_t m = 0; m < kMelBands; ++m)
      for (std::size_t ny = 0; ny < 4; ++ny)
        for (std::size_t nx = 0; nx < 4; ++nx)
          out(t, m, ny, nx) = img(t, 7 * ny + m / 7, 7 * nx + m % 7);
  return out;
}

std::vector<double> fsr_temporal_downsample(const std::vector<double>& x) {
  if (x.size() != kTrialSamples)
    throw std::invalid_argument("fsr_temporal_downsample: expected 7000 samples");
  const auto smoothed = moving_mean(x, kFsrMeanWindow);
  std::vector<double> out(kModelFrames);
  const double stride = kTactileRateHz / 30.0;  // 700/30 input samples per frame
  for (std::size_t k = 0; k < kModelFrames; ++k)
    out[k] = sample_linear(smoothed, static_cast<double>(k) * stride);
  return out;
}

namespace {

// Bilinear 16 -> 28 with corner alignment (constant fields stay constant).
void bilinear_16_to_28(const Eigen::MatrixXd& in, Eigen::MatrixXd& out) {
  const double scale = 15.0 / 27.0;
  for (int y = 0; y < kImageSize; ++y) {
    const double fy = y * scale;
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, 15);
    const double ty = fy - y0;
    for (int x = 0; x < kImageSize; ++x) {
      const double fx = x * scale;
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, 15);
      const double tx = fx - x0;
      out(y, x) = (1 - ty) * ((1 - tx) * in(y0, x0) + tx * in(y0, x1)) +
                  ty * ((1 - tx) * in(y1, x0) + tx * in(y1, x1));
    }
  }
}

}  // namespace

ArrayD fsr_preprocess(const ArrayF& fsr) {
  fsr.require_shape({kTrialSamples, 16, 16, 2}, "fsr_preprocess");
  // Temporal chain per taxel.
  ArrayD coarse({kModelFrames, 16, 16, 2});
  std::vector<double> series(kTrialSamples);
  for (std::size_t layer = 0; layer < 2; ++layer)
    for (std::size_t j = 0; j < 16; ++j)
      for (std::size_t i = 0; i < 16; ++i) {
        for (std::size_t t = 0; t < kTrialSamples; ++t) series[t] = fsr(t, j, i, layer);
        const auto down = fsr_temporal_downsample(series);
        for (std::size_t f = 0; f < kModelFrames; ++f) coarse(f, j, i, layer) = down[f];
      }
  // Spatial rescale per frame and layer.
  ArrayD out({kModelFrames, kImageSize, kImageSize, 2});
  Eigen::MatrixXd in16(16, 16), out28(kImageSize, kImageSize);
  for (std::size_t layer = 0; layer < 2; ++layer)
    for (std::size_t f = 0; f < kModelFrames; ++f) {
      for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i)
          in16(j, i) = coarse(f, static_cast<std::size_t>(j),
                              static_cast<std::size_t>(i), layer);
      bilinear_16_to_28(in16, out28);
      for (int j = 0; j < kImageSize; ++j)
        for (int i = 0; i < kImageSize; ++i)
          out(f, static_cast<std::size_t>(j), static_cast<std::size_t>(i), layer) =
              out28(j, i);
    }
  return out;
}

void normalize_fsr(ArrayD& fsr_proc, const FsrNormStats& stats) {
  fsr_proc.require_shape({kModelFrames, kImageSize, kImageSize, 2}, "normalize_fsr");
  for (std::size_t f = 0; f < kModelFrames; ++f)
    for (std::size_t j = 0; j < kImageSize; ++j)
      for (std::size_t i = 0; i < kImageSize; ++i)
        for (std::size_t layer = 0; layer < 2; ++layer)
          fsr_proc(f, j, i, layer) =
              (fsr_proc(f, j, i, layer) - stats.mean[layer]) / stats.stdev[layer];
}

std::vector<int> fusion_stream_channels(FusionMode mode) {
  switch (mode) {
    case FusionMode::kAcc: return {1};
    case FusionMode::kFsrT: return {1};
    case FusionMode::kFsrB: return {1};
    case FusionMode::kFsrTb: return {2};
    case FusionMode::kMultiE: return {3};
    case FusionMode::kMultiL: return {1, 2};
  }
  throw std::invalid_argument("invalid fusion mode");
}

ObservationSequence fuse(const ArrayD& accel_img, const ArrayD& fsr_img,
                         FusionMode mode) {
  accel_img.require_shape({kModelFrames, kImageSize, kImageSize}, "fuse accel");
  fsr_img.require_shape({kModelFrames, kImageSize, kImageSize, 2}, "fuse fsr");
  if (accel_img.dim(0) != fsr_img.dim(0))
    throw std::invalid_argument("fuse: frame count mismatch");

  const std::size_t T = kModelFrames, S = kImageSize;
  auto acc_stream = [&] {
    ArrayD s({T, 1, S, S});
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t j = 0; j < S; ++j)
        for (std::size_t i = 0; i < S; ++i) s(t, 0, j, i) = accel_img(t, j, i);
    return s;
  };
  auto fsr_stream = [&](int first_layer, int n_layers) {
    ArrayD s({T, static_cast<std::size_t>(n_layers), S, S});
    for (std::size_t t = 0; t < T; ++t)
      for (int c = 0; c < n_layers; ++c)
        for (std::size_t j = 0; j < S; ++j)
          for (std::size_t i = 0; i < S; ++i)
            s(t, static_cast<std::size_t>(c), j, i) =
                fsr_img(t, j, i, static_cast<std::size_t>(first_layer + c));
    return s;
  };

  ObservationSequence seq;
  seq.mode = mode;
  switch (mode) {
    case FusionMode::kAcc:
      seq.streams.push_back(acc_stream());
      break;
    case FusionMode::kFsrT:
      seq.streams.push_back(fsr_stream(0, 1));
      break;
    case FusionMode::kFsrB:
      seq.streams.push_back(fsr_stream(1, 1));
      break;
    case FusionMode::kFsrTb:
      seq.streams.push_back(fsr_stream(0, 2));
      break;
    case FusionMode::kMultiE: {
      ArrayD s({T, 3, S, S});
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t j = 0; j < S; ++j)
          for (std::size_t i = 0; i < S; ++i) {
            s(t, 0, j, i) = accel_img(t, j, i);
            s(t, 1, j, i) = fsr_img(t, j, i, 0);
            s(t, 2, j, i) = fsr_img(t, j, i, 1);
          }
      seq.streams.push_back(std::move(s));
      break;
    }
    case FusionMode::kMultiL:
      seq.streams.push_back(acc_stream());
      seq.streams.push_back(fsr_stream(0, 2));
      break;
  }
  return seq;
}

void NormStatsAccumulator::add_accel(const ArrayF& accel) {
  accel.require_shape({kTrialSamples, 4, 4, 3}, "NormStatsAccumulator::add_accel");
  for (std::size_t t = 0; t < kTrialSamples; ++t)
    for (Eigen::Index ny = 0; ny < 4; ++ny)
      for (Eigen::Index nx = 0; nx < 4; ++nx) {
        const double ax = accel(t, static_cast<std::size_t>(ny),
                                static_cast<std::size_t>(nx), 0);
        const double ay = accel(t, static_cast<std::size_t>(ny),
                                static_cast<std::size_t>(nx), 1);
        const double az = accel(t, static_cast<std::size_t>(ny),
                                static_cast<std::size_t>(nx), 2);
        const double m = std::sqrt(ax * ax + ay * ay + az * az);
        acc_sum_(ny, nx) += m;
        acc_sumsq_(ny, nx) += m * m;
      }
  acc_count_ += static_cast<double>(kTrialSamples);
}

void NormStatsAccumulator::add_fsr_processed(const ArrayD& fsr) {
  fsr.require_shape({kModelFrames, kImageSize, kImageSize, 2},
                    "NormStatsAccumulator::add_fsr_processed");
  for (std::size_t f = 0; f < kModelFrames; ++f)
    for (std::size_t j = 0; j < kImageSize; ++j)
      for (std::size_t i = 0; i < kImageSize; ++i)
        for (std::size_t layer = 0; layer < 2; ++layer) {
          const double v = fsr(f, j, i, layer);
          fsr_sum_[layer] += v;
          fsr_sumsq_[layer] += v * v;
        }
  fsr_count_ += static_cast<double>(kModelFrames * kImageSize * kImageSize);
}

AccelNormStats NormStatsAccumulator::accel_stats() const {
  AccelNormStats s;
  if (acc_count_ <= 0) return s;
  for (Eigen::Index ny = 0; ny < 4; ++ny)
    for (Eigen::Index nx = 0; nx < 4; ++nx) {
      const double mean = acc_sum_(ny, nx) / acc_count_;
      const double var = std::max(0.0, acc_sumsq_(ny, nx) / acc_count_ - mean * mean);
      s.mean(ny, nx) = mean;
      s.stdev(ny, nx) = std::max(1e-12, std::sqrt(var));
    }
  return s;
}

FsrNormStats NormStatsAccumulator::fsr_stats() const {
  FsrNormStats s;
  if (fsr_count_ <= 0) return s;
  for (std::size_t layer = 0; layer < 2; ++layer) {
    const double mean = fsr_sum_[layer] / fsr_count_;
    const double var = std::max(0.0, fsr_sumsq_[layer] / fsr_count_ - mean * mean);
    s.mean[layer] = mean;
    s.stdev[layer] = std::max(1e-12, std::sqrt(var));
  }
  return s;
}

}  // namespace tactile
