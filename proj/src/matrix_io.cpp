#include "ssh/matrix_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "ssh/byte_io.hpp"
#include "ssh/errors.hpp"

namespace ssh {

using namespace byte_io;

void write_matrix(std::ostream& out, const Matrix& m) {
  out.write(kMatrixMagic.data(), kMatrixMagic.size());
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (double v : m.data()) put_f32(out, static_cast<float>(v));
  if (!out) throw Error("write_matrix: stream write failed");
}

Matrix read_matrix(std::istream& in) {
  unsigned char header[16];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  const auto got = static_cast<std::int64_t>(in.gcount());
  if (got < 8 || !std::equal(kMatrixMagic.begin(), kMatrixMagic.end(), header)) {
    std::int64_t bad = 0;
    while (bad < got && bad < 8 && header[bad] == static_cast<unsigned char>(kMatrixMagic[bad])) ++bad;
    throw ParseError("matrix file: bad or missing magic", bad);
  }
  if (got < 16) throw ParseError("matrix file: truncated header", got);
  const std::uint32_t rows = get_u32(header + 8);
  const std::uint32_t cols = get_u32(header + 12);
  if (rows == 0) throw ParseError("matrix file: zero row count", 8);
  if (cols == 0) throw ParseError("matrix file: zero column count", 12);

  // Read in bounded chunks so a corrupt header cannot force a huge allocation
  // before the truncation is noticed.
  const std::size_t count = std::size_t{rows} * cols;
  constexpr std::size_t kChunk = 1 << 16;
  std::vector<double> data;
  data.reserve(std::min(count, kChunk));
  unsigned char buf[4 * kChunk];
  while (data.size() < count) {
    const std::size_t want = std::min(kChunk, count - data.size());
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(4 * want));
    const auto have = static_cast<std::size_t>(in.gcount());
    if (have != 4 * want) {
      throw ParseError("matrix file: truncated data, expected " + std::to_string(4 * count) +
                           " payload bytes",
                       static_cast<std::int64_t>(16 + 4 * data.size() + have));
    }
    for (std::size_t i = 0; i < want; ++i) {
      const float v = get_f32(buf + 4 * i);
      if (!std::isfinite(v)) {
        throw ParseError("matrix file: non-finite value",
                         static_cast<std::int64_t>(16 + 4 * data.size()));
      }
      data.push_back(v);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("matrix file: trailing bytes after payload",
                     static_cast<std::int64_t>(16 + 4 * count));
  }
  return Matrix(rows, cols, std::move(data));
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_matrix(out, m);
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open matrix file " + path.string());
  return read_matrix(in);
}

}  // namespace ssh
