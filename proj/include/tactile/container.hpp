#ifndef TACTILE_CONTAINER_HPP
#define TACTILE_CONTAINER_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tactile/ndarray.hpp"

namespace tactile {

// CRC-32 (IEEE 802.3 polynomial, reflected).
std::uint32_t crc32(const unsigned char* data, std::size_t len,
                    std::uint32_t seed = 0);

// Single-file container for named arrays plus a JSON metadata block.
//
// Layout (little-endian, documented in docs/FORMATS.md):
//   magic "TACTBNDL" | u32 version | u32 header_len | header JSON |
//   array payloads in header order | u32 crc32 of all preceding bytes
//
// The header JSON carries {"kind", "meta", "arrays":[{name,dtype,shape}]}.
class ArrayBundle {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  ArrayBundle() = default;
  explicit ArrayBundle(std::string kind) : kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }
  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }

  void add(const std::string& name, const ArrayF& a);
  void add(const std::string& name, const ArrayD& a);

  bool has(const std::string& name) const;
  std::vector<std::string> names() const;
  const std::vector<std::size_t>& shape(const std::string& name) const;
  ArrayF get_f32(const std::string& name) const;
  ArrayD get_f64(const std::string& name) const;

  // Serializes to `path` via a temp file + atomic rename.
  void write(const std::filesystem::path& path) const;
  static ArrayBundle read(const std::filesystem::path& path);

 private:
  struct Entry {
    std::string name;
    std::string dtype;  // "f32" | "f64"
    std::vector<std::size_t> shape;
    std::vector<unsigned char> payload;
  };

  const Entry& find(const std::string& name) const;

  std::string kind_;
  nlohmann::json meta_ = nlohmann::json::object();
  std::vector<Entry> entries_;
};

}  // namespace tactile

#endif  // TACTILE_CONTAINER_HPP
