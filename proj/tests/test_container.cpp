#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tactile/container.hpp"
#include "tactile/rng.hpp"

using namespace tactile;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "tactile_container_test";
  fs::create_directories(dir);
  return dir;
}

ArrayF random_array(std::uint64_t seed) {
  ArrayF a({5, 7, 3});
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < a.size(); ++i) a(i) = static_cast<float>(rng.gaussian());
  return a;
}

}  // namespace

TEST_CASE("bundle round trip is bit-exact") {
  const auto path = temp_dir() / "roundtrip.tact";
  ArrayBundle b("trial");
  b.meta()["note"] = "roundtrip";
  const ArrayF f = random_array(11);
  ArrayD d({4, 4});
  SplitMix64 rng(12);
  for (std::size_t i = 0; i < d.size(); ++i) d(i) = rng.gaussian();
  b.add("floats", f);
  b.add("doubles", d);
  b.write(path);

  const ArrayBundle r = ArrayBundle::read(path);
  CHECK(r.kind() == "trial");
  CHECK(r.meta().at("note") == "roundtrip");
  const ArrayF f2 = r.get_f32("floats");
  const ArrayD d2 = r.get_f64("doubles");
  REQUIRE(f2.shape() == f.shape());
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(f2(i) == f(i));
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d2(i) == d(i));
}

TEST_CASE("single-byte corruption is caught by the checksum") {
  const auto path = temp_dir() / "corrupt.tact";
  ArrayBundle b("trial");
  b.add("payload", random_array(13));
  b.write(path);

  // Flip one payload byte in the middle of the file.
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(0, std::ios::end);
  const auto size = static_cast<long>(f.tellg());
  char byte = 0;
  f.seekg(size / 2);
  f.read(&byte, 1);
  byte = static_cast<char>(byte ^ 0x40);
  f.seekp(size / 2);
  f.write(&byte, 1);
  f.close();

  CHECK_THROWS_WITH_AS(ArrayBundle::read(path),
                       doctest::Contains("checksum mismatch"), std::runtime_error);
}

TEST_CASE("truncated file is rejected, not silently read") {
  const auto path = temp_dir() / "trunc.tact";
  ArrayBundle b("trial");
  b.add("payload", random_array(17));
  b.write(path);
  const auto full = fs::file_size(path);
  fs::resize_file(path, full - 9);
  CHECK_THROWS_AS(ArrayBundle::read(path), std::runtime_error);
}

TEST_CASE("version mismatch error names both versions") {
  const auto path = temp_dir() / "version.tact";
  ArrayBundle b("trial");
  b.add("payload", random_array(19));
  b.write(path);

  // Bump the stored format version and refresh the trailing checksum so the
  // version check (not the checksum) fires.
  std::ifstream in(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  in.close();
  bytes[8] = 2;
  const std::uint32_t crc = crc32(bytes.data(), bytes.size() - 4);
  bytes[bytes.size() - 4] = static_cast<unsigned char>(crc & 0xff);
  bytes[bytes.size() - 3] = static_cast<unsigned char>((crc >> 8) & 0xff);
  bytes[bytes.size() - 2] = static_cast<unsigned char>((crc >> 16) & 0xff);
  bytes[bytes.size() - 1] = static_cast<unsigned char>((crc >> 24) & 0xff);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.close();

  try {
    ArrayBundle::read(path);
    FAIL("expected version error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("version 2") != std::string::npos);
    CHECK(msg.find("version 1") != std::string::npos);
  }
}

TEST_CASE("crc32 matches the IEEE reference value") {
  // Standard test vector: crc32("123456789") = 0xCBF43926.
  const unsigned char data[] = "123456789";
  CHECK(crc32(data, 9) == 0xCBF43926u);
}

TEST_CASE("byte layout is stable across releases (golden file)") {
  const auto path = temp_dir() / "golden.tact";
  ArrayBundle b("golden");
  b.meta()["pin"] = 42;
  ArrayD d({2, 3});
  for (std::size_t i = 0; i < d.size(); ++i) d(i) = static_cast<double>(i) * 0.5;
  b.add("ramp", d);
  b.write(path);

  std::ifstream in(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  // Golden values frozen at format version 1; a change here is a breaking
  // format change and requires a version bump.
  INFO("size=" << bytes.size() << " crc=0x" << std::hex
               << crc32(bytes.data(), bytes.size()));
  CHECK(bytes.size() == 158);
  CHECK(crc32(bytes.data(), bytes.size()) == 0x2144df1cu);
}
