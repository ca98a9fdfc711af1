#ifndef TACTILE_PREPROCESSING_HPP
#define TACTILE_PREPROCESSING_HPP

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tactile/contact_sim.hpp"
#include "tactile/ndarray.hpp"

namespace tactile {

// Bumped whenever any preprocessing constant changes; stamped into cached
// processed trials and checkpoints.
inline constexpr const char* kPrepVersion = "prep-v1";

inline constexpr std::size_t kModelFrames = 300;
inline constexpr std::size_t kAccelResampled = 6000;  // 700 -> 600 Hz
inline constexpr int kMelBands = 49;
inline constexpr int kStftWindow = 800;
inline constexpr int kStftHop = 20;
inline constexpr double kMelFMaxHz = 300.0;
inline constexpr int kFsrMeanWindow = 23;
inline constexpr int kImageSize = 28;

enum class FusionMode { kAcc = 0, kFsrT, kFsrB, kFsrTb, kMultiE, kMultiL };
std::string to_string(FusionMode m);
FusionMode fusion_from_string(const std::string& s);

// Training-split normalization statistics, reused verbatim on test data.
struct AccelNormStats {
  Eigen::Matrix4d mean = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d stdev = Eigen::Matrix4d::Ones();
};
struct FsrNormStats {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> stdev{1.0, 1.0};
};

// Per-node Euclidean magnitude of the 3-axis accelerometer stream,
// optionally z-scored per node, rationally resampled 700 -> 600 Hz.
// [7000,4,4,3] -> [6000,4,4]
ArrayD accel_magnitude_downsample(const ArrayF& accel,
                                  const AccelNormStats* stats = nullptr);

// Per-node log-mel spectrogram: centered STFT (window 800, hop 20, Hann),
// magnitude squared, 49-band mel projection over 0-300 Hz, log(1+x).
// [6000,4,4] -> [300,49,4,4]
ArrayD log_mel_spectrogram(const ArrayD& sig);

// Invertible rearrangement: mel bin m of node (p,q) -> pixel
// (7p + m/7, 7q + m%7).  [300,49,4,4] <-> [300,28,28]
ArrayD reshape_spec(const ArrayD& spec);
ArrayD inverse_reshape_spec(const ArrayD& img);

// Moving-mean low-pass (23 samples), decimation to 30 Hz (300 frames),
// bilinear 16x16 -> 28x28 per layer.  [7000,16,16,2] -> [300,28,28,2]
ArrayD fsr_preprocess(const ArrayF& fsr);

// Temporal part of fsr_preprocess for one taxel series; exposed so the
// band-limit round trip can be tested in isolation. [7000] -> [300]
std::vector<double> fsr_temporal_downsample(const std::vector<double>& x);

// Z-scores a processed FSR array per layer, in place.
void normalize_fsr(ArrayD& fsr_proc, const FsrNormStats& stats);

// Fused model-ready observation streams; all entries are [T, C, 28, 28].
// MULTI_L keeps two streams (accel, fsr); every other mode has one.
struct ObservationSequence {
  FusionMode mode = FusionMode::kAcc;
  std::vector<ArrayD> streams;
};

ObservationSequence fuse(const ArrayD& accel_img, const ArrayD& fsr_img,
                         FusionMode mode);

// Channel counts per stream for a fusion mode ({3} for MULTI_E, {1,2} for
// MULTI_L, ...).
std::vector<int> fusion_stream_channels(FusionMode mode);

// Streaming accumulator for the normalization statistics.
class NormStatsAccumulator {
 public:
  void add_accel(const ArrayF& accel);        // raw [7000,4,4,3]
  void add_fsr_processed(const ArrayD& fsr);  // pre-norm [300,28,28,2]
  AccelNormStats accel_stats() const;
  FsrNormStats fsr_stats() const;

 private:
  Eigen::Matrix4d acc_sum_ = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d acc_sumsq_ = Eigen::Matrix4d::Zero();
  double acc_count_ = 0;
  std::array<double, 2> fsr_sum_{0, 0};
  std::array<double, 2> fsr_sumsq_{0, 0};
  double fsr_count_ = 0;
};

}  // namespace tactile

#endif  // TACTILE_PREPROCESSING_HPP
