#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>

#include "cola/error.hpp"

// Little-endian POD streaming shared by the binary file formats.
namespace cola::binary {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

template <typename T>
void put(std::ostream& out, const T& value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void put_span(std::ostream& out, std::span<const T> values) {
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ParseError(path, 0, "truncated file");
  return value;
}

template <typename T>
void get_span(std::istream& in, std::span<T> values, const std::string& path) {
  if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size_bytes())))
    throw ParseError(path, 0, "truncated file");
}

inline void expect_magic(std::istream& in, std::string_view magic, const std::string& path) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic)
    throw ParseError(path, 0, "bad magic, expected " + std::string(magic));
}

}  // namespace cola::binary
