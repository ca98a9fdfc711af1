#ifndef TACTILE_NDARRAY_HPP
#define TACTILE_NDARRAY_HPP

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace tactile {

// Dense row-major N-d array. Small by design: the sensor streams and
// processed tensors in this project are fixed-rank (2..4) value containers;
// anything that needs linear algebra goes through Eigen maps instead.
template <typename T>
class NdArray {
 public:
  NdArray() = default;

  explicit NdArray(std::vector<std::size_t> shape, T fill = T{})
      : shape_(std::move(shape)),
        data_(std::accumulate(shape_.begin(), shape_.end(), std::size_t{1},
                              std::multiplies<>()),
              fill) {}

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& raw() { return data_; }
  const std::vector<T>& raw() const { return data_; }

  T& operator()(std::size_t i) { return data_[i]; }
  const T& operator()(std::size_t i) const { return data_[i]; }

  T& operator()(std::size_t i, std::size_t j) {
    return data_[i * shape_[1] + j];
  }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }

  T& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  T& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k,
                      std::size_t l) const {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }

  bool same_shape(const NdArray& other) const { return shape_ == other.shape_; }

  void require_shape(const std::vector<std::size_t>& expect,
                     const std::string& what) const {
    if (shape_ != expect) {
      std::string msg = what + ": expected shape (";
      for (std::size_t i = 0; i < expect.size(); ++i)
        msg += (i ? "," : "") + std::to_string(expect[i]);
      msg += "), got (";
      for (std::size_t i = 0; i < shape_.size(); ++i)
        msg += (i ? "," : "") + std::to_string(shape_[i]);
      msg += ")";
      throw std::invalid_argument(msg);
    }
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

using ArrayF = NdArray<float>;
using ArrayD = NdArray<double>;

}  // namespace tactile

#endif  // TACTILE_NDARRAY_HPP
