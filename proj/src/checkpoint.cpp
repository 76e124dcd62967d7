#include "ssh/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "ssh/byte_io.hpp"
#include "ssh/errors.hpp"

namespace ssh {

using namespace byte_io;

std::uint64_t weight_digest(const Matrix& w) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word, int bytes) {
    for (int i = 0; i < bytes; ++i) {
      h ^= (word >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(w.rows(), 4);
  mix(w.cols(), 4);
  for (double v : w.data()) mix(std::bit_cast<std::uint64_t>(v), 8);
  return h;
}

void write_checkpoint(std::ostream& out, const SshLayer& layer) {
  const FrequencyMask& mask = layer.mask();
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  put_u32(out, static_cast<std::uint32_t>(layer.rows()));
  put_u32(out, static_cast<std::uint32_t>(layer.cols()));
  put_f64(out, layer.alpha());
  put_u32(out, static_cast<std::uint32_t>(mask.energy_positions().size()));
  put_u32(out, static_cast<std::uint32_t>(mask.random_positions().size()));
  for (const auto& p : mask.positions()) {
    put_u32(out, p.u);
    put_u32(out, p.v);
  }
  for (double v : layer.values()) put_f32(out, static_cast<float>(v));
  put_u64(out, weight_digest(layer.base_weight()));
  if (!out) throw CheckpointError("checkpoint: stream write failed");
}

namespace {

// Reads `count` bytes, growing the buffer as data arrives so a corrupt count
// cannot force a huge allocation up front.
bool read_growing(std::istream& in, std::vector<unsigned char>& buf, std::uint64_t count) {
  constexpr std::uint64_t kChunk = 1 << 20;
  buf.clear();
  while (buf.size() < count) {
    const std::size_t old = buf.size();
    const auto want = static_cast<std::size_t>(std::min(kChunk, count - old));
    buf.resize(old + want);
    if (!read_exact(in, buf.data() + old, want)) return false;
  }
  return true;
}

}  // namespace

SshLayer read_checkpoint(std::istream& in, const Matrix& w0) {
  unsigned char magic[8];
  in.read(reinterpret_cast<char*>(magic), sizeof magic);
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got < sizeof magic) {
    // A short prefix of the real magic is a truncated file; anything else is not ours.
    if (std::equal(magic, magic + got, kCheckpointMagic.begin())) {
      throw CheckpointTruncatedError("magic");
    }
    throw CheckpointMagicError("checkpoint: bad magic");
  }
  if (!std::equal(magic, magic + 8, kCheckpointMagic.begin())) {
    throw CheckpointMagicError("checkpoint: bad magic, expected SSHCKPT1");
  }

  unsigned char header[24];
  if (!read_exact(in, header, sizeof header)) throw CheckpointTruncatedError("header");
  const std::uint32_t d1 = get_u32(header);
  const std::uint32_t d2 = get_u32(header + 4);
  const double alpha = get_f64(header + 8);
  const std::uint32_t n_energy = get_u32(header + 16);
  const std::uint32_t n_random = get_u32(header + 20);
  if (d1 == 0 || d2 == 0 || !std::isfinite(alpha)) {
    throw CheckpointError("checkpoint: invalid header");
  }
  const std::uint64_t n = std::uint64_t{n_energy} + n_random;
  if (n == 0 || n > std::uint64_t{d1} * d2) {
    throw CheckpointError("checkpoint: coefficient count inconsistent with shape");
  }

  std::vector<unsigned char> pos_bytes;
  if (!read_growing(in, pos_bytes, 8 * n)) throw CheckpointTruncatedError("positions");
  std::vector<unsigned char> value_bytes;
  if (!read_growing(in, value_bytes, 4 * n)) throw CheckpointTruncatedError("values");
  unsigned char digest_bytes[8];
  if (!read_exact(in, digest_bytes, sizeof digest_bytes)) throw CheckpointTruncatedError("digest");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CheckpointError("checkpoint: trailing bytes after digest");
  }

  if (w0.rows() != d1 || w0.cols() != d2 || weight_digest(w0) != get_u64(digest_bytes)) {
    throw CheckpointDigestError("checkpoint: base weight digest mismatch");
  }

  std::vector<Position> energy(n_energy);
  std::vector<Position> random(n_random);
  for (std::uint64_t i = 0; i < n; ++i) {
    const Position p{get_u32(pos_bytes.data() + 8 * i), get_u32(pos_bytes.data() + 8 * i + 4)};
    (i < n_energy ? energy[i] : random[i - n_energy]) = p;
  }
  std::vector<double> values(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const float v = get_f32(value_bytes.data() + 4 * i);
    if (!std::isfinite(v)) throw CheckpointError("checkpoint: non-finite coefficient");
    values[i] = v;
  }
  try {
    return SshLayer::restore(w0, FrequencyMask(d1, d2, std::move(energy), std::move(random)),
                             std::move(values), alpha);
  } catch (const ContractError& e) {
    throw CheckpointError(std::string("checkpoint: invalid mask: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const SshLayer& layer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, layer);
}

SshLayer load_checkpoint(const std::filesystem::path& path, const Matrix& w0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  return read_checkpoint(in, w0);
}

}  // namespace ssh
