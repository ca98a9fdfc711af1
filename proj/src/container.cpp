#include "tactile/container.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tactile {

namespace {

constexpr char kMagic[8] = {'T', 'A', 'C', 'T', 'B', 'N', 'D', 'L'};

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k)
      c = (c & 1) ? 0xedb88320u ^ (c >> 1) : (c >> 1);
    table[i] = c;
  }
  return table;
}

void append_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::size_t dtype_size(const std::string& dtype) {
  if (dtype == "f32") return 4;
  if (dtype == "f64") return 8;
  throw std::runtime_error("bundle: unknown dtype '" + dtype + "'");
}

}  // namespace

std::uint32_t crc32(const unsigned char* data, std::size_t len, std::uint32_t seed) {
  static const auto table = make_crc_table();
  std::uint32_t c = seed ^ 0xffffffffu;
  for (std::size_t i = 0; i < len; ++i)
    c = table[(c ^ data[i]) & 0xff] ^ (c >> 8);
  return c ^ 0xffffffffu;
}

void ArrayBundle::add(const std::string& name, const ArrayF& a) {
  Entry e;
  e.name = name;
  e.dtype = "f32";
  e.shape = a.shape();
  e.payload.resize(a.size() * sizeof(float));
  std::memcpy(e.payload.data(), a.data(), e.payload.size());
  entries_.push_back(std::move(e));
}

void ArrayBundle::add(const std::string& name, const ArrayD& a) {
  Entry e;
  e.name = name;
  e.dtype = "f64";
  e.shape = a.shape();
  e.payload.resize(a.size() * sizeof(double));
  std::memcpy(e.payload.data(), a.data(), e.payload.size());
  entries_.push_back(std::move(e));
}

bool ArrayBundle::has(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return true;
  return false;
}

std::vector<std::string> ArrayBundle::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

const ArrayBundle::Entry& ArrayBundle::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  throw std::out_of_range("bundle: no array named '" + name + "'");
}

const std::vector<std::size_t>& ArrayBundle::shape(const std::string& name) const {
  return find(name).shape;
}

ArrayF ArrayBundle::get_f32(const std::string& name) const {
  const Entry& e = find(name);
  if (e.dtype != "f32")
    throw std::runtime_error("bundle: array '" + name + "' is " + e.dtype +
                             ", requested f32");
  ArrayF a(e.shape);
  std::memcpy(a.data(), e.payload.data(), e.payload.size());
  return a;
}

ArrayD ArrayBundle::get_f64(const std::string& name) const {
  const Entry& e = find(name);
  if (e.dtype != "f64")
    throw std::runtime_error("bundle: array '" + name + "' is " + e.dtype +
                             ", requested f64");
  ArrayD a(e.shape);
  std::memcpy(a.data(), e.payload.data(), e.payload.size());
  return a;
}

void ArrayBundle::write(const std::filesystem::path& path) const {
  nlohmann::json header;
  header["kind"] = kind_;
  header["meta"] = meta_;
  auto arrays = nlohmann::json::array();
  for (const auto& e : entries_) {
    arrays.push_back({{"name", e.name}, {"dtype", e.dtype}, {"shape", e.shape}});
  }
  header["arrays"] = arrays;
  const std::string header_str = header.dump();

  std::vector<unsigned char> buf;
  buf.reserve(16 + header_str.size());
  buf.insert(buf.end(), kMagic, kMagic + 8);
  append_u32(buf, kFormatVersion);
  append_u32(buf, static_cast<std::uint32_t>(header_str.size()));
  buf.insert(buf.end(), header_str.begin(), header_str.end());

  std::uint32_t crc = crc32(buf.data(), buf.size());

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("bundle: cannot open " + tmp + " for write");
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    for (const auto& e : entries_) {
      out.write(reinterpret_cast<const char*>(e.payload.data()),
                static_cast<std::streamsize>(e.payload.size()));
      crc = crc32(e.payload.data(), e.payload.size(), crc);
    }
    std::vector<unsigned char> tail;
    append_u32(tail, crc);
    out.write(reinterpret_cast<const char*>(tail.data()), 4);
    if (!out) throw std::runtime_error("bundle: write failed to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

ArrayBundle ArrayBundle::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("bundle: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 20)
    throw std::runtime_error("bundle: file too short (truncated): " + path.string());
  if (std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw std::runtime_error("bundle: bad magic (not a tactile bundle): " +
                             path.string());
  const std::uint32_t version = read_u32(bytes.data() + 8);
  if (version != kFormatVersion)
    throw std::runtime_error("bundle: format version " + std::to_string(version) +
                             " unsupported (reader supports version " +
                             std::to_string(kFormatVersion) + "): " + path.string());

  const std::uint32_t stored_crc = read_u32(bytes.data() + bytes.size() - 4);
  const std::uint32_t actual_crc = crc32(bytes.data(), bytes.size() - 4);
  if (stored_crc != actual_crc)
    throw std::runtime_error("bundle: checksum mismatch (file corrupt or truncated): " +
                             path.string());

  const std::uint32_t header_len = read_u32(bytes.data() + 12);
  if (16 + static_cast<std::size_t>(header_len) + 4 > bytes.size())
    throw std::runtime_error("bundle: header length out of range: " + path.string());
  const nlohmann::json header = nlohmann::json::parse(
      bytes.begin() + 16, bytes.begin() + 16 + header_len);

  ArrayBundle b;
  b.kind_ = header.at("kind").get<std::string>();
  b.meta_ = header.at("meta");
  std::size_t offset = 16 + header_len;
  for (const auto& j : header.at("arrays")) {
    Entry e;
    e.name = j.at("name").get<std::string>();
    e.dtype = j.at("dtype").get<std::string>();
    e.shape = j.at("shape").get<std::vector<std::size_t>>();
    std::size_t n = 1;
    for (auto d : e.shape) n *= d;
    const std::size_t nbytes = n * dtype_size(e.dtype);
    if (offset + nbytes + 4 > bytes.size())
      throw std::runtime_error("bundle: payload for '" + e.name +
                               "' exceeds file size (truncated): " + path.string());
    e.payload.assign(bytes.begin() + offset, bytes.begin() + offset + nbytes);
    offset += nbytes;
    b.entries_.push_back(std::move(e));
  }
  return b;
}

}  // namespace tactile
