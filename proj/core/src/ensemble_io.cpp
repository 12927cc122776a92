#include "roughop/ensemble_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "roughop/errors.hpp"

namespace roughop {

namespace {

constexpr std::array<char, 8> kMagic = {'R', 'G', 'H', 'P', 'A', 'T', 'H', 'S'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw IoError("truncated ensemble file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_ensemble(const std::filesystem::path& file, const PathEnsemble& ensemble) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kEnsembleFormatVersion);
  put_le<std::uint32_t>(out, 0);
  put_le<std::uint64_t>(out, ensemble.size());
  put_le<std::uint64_t>(out, ensemble.dim());
  put_le<std::uint64_t>(out, ensemble.seed);
  for (Eigen::Index r = 0; r < ensemble.paths.rows(); ++r) {
    for (Eigen::Index c = 0; c < ensemble.paths.cols(); ++c) put_le<double>(out, ensemble.paths(r, c));
  }
  if (!out) throw IoError("write failed for " + file.string());
}

PathEnsemble read_ensemble(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError(file.string() + " is not an ensemble file");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kEnsembleFormatVersion) throw IoError("unsupported ensemble format version");
  (void)get_le<std::uint32_t>(in);
  const auto m = get_le<std::uint64_t>(in);
  const auto n = get_le<std::uint64_t>(in);
  PathEnsemble ensemble;
  ensemble.seed = get_le<std::uint64_t>(in);
  ensemble.paths.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index r = 0; r < ensemble.paths.rows(); ++r) {
    for (Eigen::Index c = 0; c < ensemble.paths.cols(); ++c) ensemble.paths(r, c) = get_le<double>(in);
  }
  return ensemble;
}

}  // namespace roughop
