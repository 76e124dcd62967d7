#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>

#include "ssh/numerics.hpp"

namespace ssh {

// On-disk matrix:
//   bytes 0..7   magic "SSHMAT01"
//   bytes 8..11  rows, uint32 little-endian
//   bytes 12..15 cols, uint32 little-endian
//   then rows*cols float32 little-endian, row-major
inline constexpr std::array<char, 8> kMatrixMagic = {'S', 'S', 'H', 'M', 'A', 'T', '0', '1'};

void write_matrix(std::ostream& out, const Matrix& m);
// Throws ParseError carrying the byte offset of the first bad byte.
Matrix read_matrix(std::istream& in);

void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

}  // namespace ssh
