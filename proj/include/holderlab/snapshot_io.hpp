#pragma once

// HLD1 snapshot files: "HLD1", then n, rank code and hermitian flag as u64,
// then (re, im) f64 pairs for every coefficient in storage order. All
// integers and floats are little-endian.

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "holderlab/error.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), 8);
}

inline std::uint64_t get_u64(std::istream& is, const char* what) {
  std::array<unsigned char, 8> b;
  if (!is.read(reinterpret_cast<char*>(b.data()), 8)) throw PreconditionError(std::string(what) + ": truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const SpectralField& f) {
  os.write("HLD1", 4);
  detail::put_u64(os, static_cast<std::uint64_t>(f.grid().n()));
  detail::put_u64(os, static_cast<std::uint64_t>(rank_code(f.rank())));
  detail::put_u64(os, f.hermitian() ? 1u : 0u);
  for (const auto& z : f.coeffs()) {
    detail::put_u64(os, std::bit_cast<std::uint64_t>(z.real()));
    detail::put_u64(os, std::bit_cast<std::uint64_t>(z.imag()));
  }
  if (!os) throw Error("write_snapshot: stream write failed");
}

inline SpectralField read_snapshot(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || std::string(magic.data(), 4) != "HLD1") {
    throw PreconditionError("read_snapshot: not an HLD1 file (bad magic)");
  }
  const auto n = detail::get_u64(is, "read_snapshot");
  const auto rc = detail::get_u64(is, "read_snapshot");
  const auto herm = detail::get_u64(is, "read_snapshot");
  detail::require(n >= 8 && n <= 4096 && n % 2 == 0, "read_snapshot: invalid grid size " + std::to_string(n));
  detail::require(herm <= 1, "read_snapshot: invalid hermitian flag");
  SpectralField f(GridSpec(static_cast<int>(n)), rank_from_code(static_cast<long>(rc)), herm == 1);
  for (auto& z : f.coeffs()) {
    const double re = std::bit_cast<double>(detail::get_u64(is, "read_snapshot"));
    const double im = std::bit_cast<double>(detail::get_u64(is, "read_snapshot"));
    z = {re, im};
  }
  return f;
}

inline void write_snapshot(const std::filesystem::path& path, const SpectralField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("write_snapshot: cannot open " + path.string());
  write_snapshot(os, f);
}

inline SpectralField read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw PreconditionError("read_snapshot: cannot open " + path.string());
  return read_snapshot(is);
}

}  // namespace holderlab
