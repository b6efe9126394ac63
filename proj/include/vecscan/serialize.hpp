#pragma once

#include <cstring>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace vecscan {

// Little-endian POD framing for the index file and embedded models.
struct ByteWriter {
  std::vector<uint8_t> buf;

  template <typename T>
  void pod(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    size_t off = buf.size();
    buf.resize(off + sizeof(T));
    std::memcpy(buf.data() + off, &v, sizeof(T));
  }
  void bytes(const void* p, size_t len) {
    size_t off = buf.size();
    buf.resize(off + len);
    std::memcpy(buf.data() + off, p, len);
  }
  template <typename T>
  void vec(const std::vector<T>& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    pod(uint64_t(v.size()));
    bytes(v.data(), v.size() * sizeof(T));
  }
};

struct ByteReader {
  const uint8_t* p;
  const uint8_t* end;

  ByteReader(const uint8_t* data, size_t len) : p(data), end(data + len) {}

  template <typename T>
  T pod() {
    static_assert(std::is_trivially_copyable_v<T>);
    if (size_t(end - p) < sizeof(T)) throw std::runtime_error("index file: truncated section");
    T v;
    std::memcpy(&v, p, sizeof(T));
    p += sizeof(T);
    return v;
  }
  void bytes(void* out, size_t len) {
    if (size_t(end - p) < len) throw std::runtime_error("index file: truncated section");
    std::memcpy(out, p, len);
    p += len;
  }
  template <typename T>
  std::vector<T> vec() {
    uint64_t n = pod<uint64_t>();
    if (size_t(end - p) < n * sizeof(T)) throw std::runtime_error("index file: truncated section");
    std::vector<T> v(n);
    bytes(v.data(), n * sizeof(T));
    return v;
  }
};

}  // namespace vecscan
