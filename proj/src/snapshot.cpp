#include "hyperdg/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hyperdg {

namespace {

constexpr char magic[8] = {'H', 'Y', 'P', 'E', 'R', 'D', 'G', '\0'};

template <typename T>
void put(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw std::runtime_error("truncated snapshot");
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void write_snapshot(std::ostream& os, const Snapshot& s) {
  if (static_cast<int>(s.subdivisions_x.size()) != s.d_x || static_cast<int>(s.subdivisions_v.size()) != s.d_v)
    throw std::invalid_argument("snapshot subdivisions do not match the dimensions");
  os.write(magic, sizeof(magic));
  put<std::uint32_t>(os, snapshot_version);
  put<std::uint32_t>(os, s.d_x);
  put<std::uint32_t>(os, s.d_v);
  put<std::uint32_t>(os, s.k);
  for (int n : s.subdivisions_x) put<std::uint32_t>(os, n);
  for (int n : s.subdivisions_v) put<std::uint32_t>(os, n);
  put<std::uint64_t>(os, s.values.size());
  for (double v : s.values) put<double>(os, v);
  if (!os) throw std::runtime_error("snapshot write failed");
}

Snapshot read_snapshot(std::istream& is) {
  char m[8];
  if (!is.read(m, sizeof(m)) || std::memcmp(m, magic, sizeof(m)) != 0) throw std::runtime_error("not a snapshot");
  if (get<std::uint32_t>(is) != snapshot_version) throw std::runtime_error("unsupported snapshot version");
  Snapshot s;
  s.d_x = static_cast<int>(get<std::uint32_t>(is));
  s.d_v = static_cast<int>(get<std::uint32_t>(is));
  s.k = static_cast<int>(get<std::uint32_t>(is));
  if (s.d_x < 1 || s.d_x > 3 || s.d_v < 1 || s.d_v > 3) throw std::runtime_error("corrupt snapshot header");
  for (int a = 0; a < s.d_x; ++a) s.subdivisions_x.push_back(static_cast<int>(get<std::uint32_t>(is)));
  for (int a = 0; a < s.d_v; ++a) s.subdivisions_v.push_back(static_cast<int>(get<std::uint32_t>(is)));
  const std::uint64_t n = get<std::uint64_t>(is);
  s.values.resize(n);
  for (auto& v : s.values) v = get<double>(is);
  return s;
}

void save_snapshot(const std::string& path, const Snapshot& s) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_snapshot(f, s);
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  return read_snapshot(f);
}

}  // namespace hyperdg
