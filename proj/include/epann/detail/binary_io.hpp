#pragma once

// Little-endian byte buffers and crash-safe file replacement shared by every
// on-disk format in the library.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "epann/errors.hpp"

namespace epann::detail {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; big-endian hosts are unsupported");

class ByteWriter {
 public:
  template <class T>
    requires std::is_trivially_copyable_v<T>
  void put(const T& value) {
    const auto* p = reinterpret_cast<const char*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }

  template <class T>
    requires std::is_trivially_copyable_v<T>
  void put_span(std::span<const T> values) {
    const auto* p = reinterpret_cast<const char*>(values.data());
    bytes_.insert(bytes_.end(), p, p + values.size_bytes());
  }

  void put_magic(std::string_view magic) { bytes_.insert(bytes_.end(), magic.begin(), magic.end()); }

  void reserve(std::size_t n) { bytes_.reserve(n); }
  const std::vector<char>& bytes() const noexcept { return bytes_; }
  std::vector<char> take() && { return std::move(bytes_); }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const char> bytes) : bytes_(bytes) {}

  template <class T>
    requires std::is_trivially_copyable_v<T>
  T get(const char* what) {
    require(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  template <class T>
    requires std::is_trivially_copyable_v<T>
  void get_span(std::span<T> out, const char* what) {
    require(out.size_bytes(), what);
    std::memcpy(out.data(), bytes_.data() + pos_, out.size_bytes());
    pos_ += out.size_bytes();
  }

  void expect_magic(std::string_view magic) {
    require(magic.size(), "magic");
    if (std::string_view(bytes_.data() + pos_, magic.size()) != magic)
      throw FormatError("bad magic, expected \"" + std::string(magic) + "\"", pos_);
    pos_ += magic.size();
  }

  std::uint64_t offset() const noexcept { return pos_; }
  std::uint64_t remaining() const noexcept { return bytes_.size() - pos_; }
  bool at_end() const noexcept { return pos_ == bytes_.size(); }

 private:
  void require(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n)
      throw FormatError(std::string("truncated ") + what + ": need " + std::to_string(n) +
                            " bytes, " + std::to_string(bytes_.size() - pos_) + " left",
                        pos_);
  }

  std::span<const char> bytes_;
  std::uint64_t pos_ = 0;
};

/// Reads a whole file. Throws UsageError when the file cannot be opened.
std::vector<char> read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`. A failure never
/// leaves a partial `path` behind.
void write_file_atomic(const std::filesystem::path& path, std::span<const char> bytes);

}  // namespace epann::detail
