#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "ssh/adapter.hpp"

namespace ssh {

// SSHCKPT1 layout, all integers and floats little-endian:
//
//   magic      8 bytes   "SSHCKPT1"
//   header    24 bytes   u32 d1, u32 d2, f64 alpha, u32 n_energy, u32 n_random
//   positions  8*n       (u32 u, u32 v) per coefficient, energy set first
//   values     4*n       f32 coefficient values in position order
//   digest     8 bytes   u64 FNV-1a digest of the frozen base weight
//
// Coefficients are stored at 32-bit precision, so a layer trained in double
// precision is rounded once on its first save; every later
// save -> load -> save cycle is byte-identical.
inline constexpr std::array<char, 8> kCheckpointMagic = {'S', 'S', 'H', 'C', 'K', 'P', 'T', '1'};

// FNV-1a over (u32 rows, u32 cols, f64 bit patterns), little-endian.
std::uint64_t weight_digest(const Matrix& w);

void write_checkpoint(std::ostream& out, const SshLayer& layer);

// Throws CheckpointMagicError, CheckpointTruncatedError (naming the missing
// section), or CheckpointDigestError when `w0` is not the base weight the
// checkpoint was saved with. Nothing is constructed unless every check passes.
SshLayer read_checkpoint(std::istream& in, const Matrix& w0);

void save_checkpoint(const std::filesystem::path& path, const SshLayer& layer);
SshLayer load_checkpoint(const std::filesystem::path& path, const Matrix& w0);

}  // namespace ssh
