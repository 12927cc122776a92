#pragma once

#include <filesystem>

#include "roughop/gaussian.hpp"

namespace roughop {

// Binary ensemble file, all integers and floats little-endian:
//   offset  0  char[8]  magic "RGHPATHS"
//   offset  8  uint32   format version (1)
//   offset 12  uint32   reserved, zero
//   offset 16  uint64   M (paths)
//   offset 24  uint64   N (grid points)
//   offset 32  uint64   seed
//   offset 40  float64  M*N values, row-major (path by path)

inline constexpr std::uint32_t kEnsembleFormatVersion = 1;

void write_ensemble(const std::filesystem::path& file, const PathEnsemble& ensemble);
PathEnsemble read_ensemble(const std::filesystem::path& file);

}  // namespace roughop
