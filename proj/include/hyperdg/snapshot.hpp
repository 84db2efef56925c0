#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hyperdg {

/// Binary snapshot: magic "HYPERDG\0", uint32 version, uint32 d_x, d_v, k,
/// uint32 subdivisions (d_x then d_v), uint64 count, then count doubles in
/// global cell-major DoF order. All little-endian.
struct Snapshot {
  int d_x = 0;
  int d_v = 0;
  int k = 0;
  std::vector<int> subdivisions_x;
  std::vector<int> subdivisions_v;
  std::vector<double> values;
};

inline constexpr std::uint32_t snapshot_version = 1;

void write_snapshot(std::ostream& os, const Snapshot& s);
Snapshot read_snapshot(std::istream& is);
void save_snapshot(const std::string& path, const Snapshot& s);
Snapshot load_snapshot(const std::string& path);

}  // namespace hyperdg
