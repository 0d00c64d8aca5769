#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "msgp/error.hpp"

namespace msgp::bin {

template <class T>
  requires std::is_arithmetic_v<T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
  requires std::is_arithmetic_v<T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) fail(ErrorKind::data, "truncated binary stream");
  return v;
}

inline void put_size(std::ostream& out, std::size_t n) { put<std::uint64_t>(out, n); }
inline std::size_t get_size(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  if (n > (std::uint64_t{1} << 40)) fail(ErrorKind::data, "corrupt length in binary stream");
  return static_cast<std::size_t>(n);
}

inline void put_string(std::ostream& out, const std::string& s) {
  put_size(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline std::string get_string(std::istream& in) {
  std::string s(get_size(in), '\0');
  in.read(s.data(), static_cast<std::streamsize>(s.size()));
  if (!in) fail(ErrorKind::data, "truncated binary stream");
  return s;
}

template <class T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
  put_size(out, v.size());
  for (const auto& x : v) put<T>(out, x);
}
template <class T>
std::vector<T> get_vec(std::istream& in) {
  std::vector<T> v(get_size(in));
  for (auto& x : v) x = get<T>(in);
  return v;
}

template <class T>
void put_vec2(std::ostream& out, const std::vector<std::vector<T>>& v) {
  put_size(out, v.size());
  for (const auto& row : v) put_vec(out, row);
}
template <class T>
std::vector<std::vector<T>> get_vec2(std::istream& in) {
  std::vector<std::vector<T>> v(get_size(in));
  for (auto& row : v) row = get_vec<T>(in);
  return v;
}

}  // namespace msgp::bin
