#include "smre/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace smre {

FormatError::FormatError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " (byte " + std::to_string(offset) + ")"), detail_(what), offset_(offset) {}

namespace {

constexpr const char* kRawMagic = "SMRE-F32";

class Cursor {
 public:
  explicit Cursor(const std::string& bytes) : b_(bytes) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= b_.size(); }

  // Skips whitespace and '#' comments as PNM headers allow.
  void skip_space() {
    while (pos_ < b_.size()) {
      const auto c = static_cast<unsigned char>(b_[pos_]);
      if (c == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < b_.size() && !std::isspace(static_cast<unsigned char>(b_[pos_]))) ++pos_;
    if (start == pos_) throw FormatError("unexpected end of header", start);
    return b_.substr(start, pos_ - start);
  }

  std::uint64_t number(const char* what) {
    skip_space();
    const std::size_t start = pos_;
    const std::string t = token();
    if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); }) ||
        t.size() > 12)
      throw FormatError(std::string("bad ") + what + " '" + t + "'", start);
    return std::stoull(t);
  }

  // Exactly one whitespace byte separates the header from binary payload.
  void single_space() {
    if (pos_ >= b_.size() || !std::isspace(static_cast<unsigned char>(b_[pos_])))
      throw FormatError("missing whitespace before payload", pos_);
    ++pos_;
  }

  const unsigned char* take(std::size_t count, const char* what) {
    if (b_.size() - pos_ < count)
      throw FormatError(std::string("truncated ") + what + ": need " + std::to_string(count) + " bytes, have " +
                            std::to_string(b_.size() - pos_),
                        b_.size());
    const auto* p = reinterpret_cast<const unsigned char*>(b_.data() + pos_);
    pos_ += count;
    return p;
  }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

void check_dims(std::uint64_t m, std::uint64_t n, std::size_t offset) {
  if (m == 0 || n == 0) throw FormatError("image dimensions must be positive", offset);
  if (m > (1u << 20) || n > (1u << 20) || m * n > (std::uint64_t{1} << 28))
    throw FormatError("image dimensions too large", offset);
}

ImageField decode_pgm(Cursor& cur, bool binary, bool raw_counts) {
  cur.skip_space();
  const std::size_t dim_at = cur.pos();
  const std::uint64_t width = cur.number("width");
  const std::uint64_t height = cur.number("height");
  check_dims(height, width, dim_at);
  cur.skip_space();
  const std::size_t max_at = cur.pos();
  const std::uint64_t maxval = cur.number("maxval");
  if (maxval == 0 || maxval > 65535) throw FormatError("maxval must lie in 1..65535", max_at);

  const std::size_t count = static_cast<std::size_t>(width * height);
  std::vector<double> v(count);
  const double scale = raw_counts ? 1.0 : 1.0 / static_cast<double>(maxval);
  if (binary) {
    cur.single_space();
    const std::size_t bps = maxval < 256 ? 1 : 2;
    const std::size_t start = cur.pos();
    const unsigned char* p = cur.take(count * bps, "PGM payload");
    for (std::size_t k = 0; k < count; ++k) {
      const unsigned s = bps == 1 ? p[k] : (unsigned{p[2 * k]} << 8) | p[2 * k + 1];
      if (s > maxval) throw FormatError("sample exceeds maxval", start + k * bps);
      v[k] = s * scale;
    }
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      cur.skip_space();
      if (cur.at_end()) throw FormatError("truncated PGM payload", cur.pos());
      const std::size_t at = cur.pos();
      const std::uint64_t s = cur.number("sample");
      if (s > maxval) throw FormatError("sample exceeds maxval", at);
      v[k] = static_cast<double>(s) * scale;
    }
  }
  return ImageField(static_cast<std::size_t>(height), static_cast<std::size_t>(width), std::move(v));
}

ImageField decode_raw(Cursor& cur) {
  const std::size_t ver_at = cur.pos();
  if (cur.token() != "v1") throw FormatError("unsupported SMRE-F32 version", ver_at);
  const std::size_t dim_at = cur.pos();
  const std::uint64_t m = cur.number("rows");
  const std::uint64_t n = cur.number("cols");
  check_dims(m, n, dim_at);
  cur.single_space();
  const std::size_t count = static_cast<std::size_t>(m * n);
  const std::size_t start = cur.pos();
  const unsigned char* p = cur.take(count * 4, "float payload");
  std::vector<double> v(count);
  for (std::size_t k = 0; k < count; ++k) {
    const unsigned char* q = p + 4 * k;
    const std::uint32_t bits = std::uint32_t{q[0]} | (std::uint32_t{q[1]} << 8) | (std::uint32_t{q[2]} << 16) |
                               (std::uint32_t{q[3]} << 24);
    const float f = std::bit_cast<float>(bits);
    if (!std::isfinite(f)) throw FormatError("non-finite sample", start + 4 * k);
    v[k] = f;
  }
  return ImageField(static_cast<std::size_t>(m), static_cast<std::size_t>(n), std::move(v));
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ImageFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".f32" ? ImageFormat::RawFloat : ImageFormat::PgmBinary;
}

ImageField decode_image(const std::string& bytes, bool raw_counts) {
  Cursor cur(bytes);
  const std::string magic = cur.token();
  if (magic == "P2") return decode_pgm(cur, false, raw_counts);
  if (magic == "P5") return decode_pgm(cur, true, raw_counts);
  if (magic == kRawMagic) return decode_raw(cur);
  throw FormatError("unknown magic '" + magic.substr(0, 16) + "'", 0);
}

std::string encode_image(const ImageField& field, ImageFormat format, unsigned maxval) {
  if (field.empty()) throw std::invalid_argument("encode_image: empty field");
  std::string out;
  if (format == ImageFormat::RawFloat) {
    out = std::string(kRawMagic) + " v1 " + std::to_string(field.rows()) + ' ' + std::to_string(field.cols()) + '\n';
    out.reserve(out.size() + 4 * field.size());
    for (double x : field.values()) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(x));
      for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((bits >> s) & 0xffu));
    }
    return out;
  }
  if (maxval == 0 || maxval > 65535) throw std::invalid_argument("encode_image: maxval must lie in 1..65535");
  const bool binary = format == ImageFormat::PgmBinary;
  out = std::string(binary ? "P5" : "P2") + '\n' + std::to_string(field.cols()) + ' ' +
        std::to_string(field.rows()) + '\n' + std::to_string(maxval) + '\n';
  for (std::size_t k = 0; k < field.size(); ++k) {
    const auto s = static_cast<unsigned>(std::lround(std::clamp(field[k], 0.0, 1.0) * maxval));
    if (binary) {
      if (maxval >= 256) out.push_back(static_cast<char>(s >> 8));
      out.push_back(static_cast<char>(s & 0xffu));
    } else {
      out += std::to_string(s);
      out.push_back((k + 1) % field.cols() == 0 ? '\n' : ' ');
    }
  }
  return out;
}

ImageField read_image(const std::filesystem::path& path, bool raw_counts) {
  try {
    return decode_image(slurp(path), raw_counts);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.detail(), e.offset());
  }
}

void write_image(const ImageField& field, const std::filesystem::path& path, ImageFormat format, unsigned maxval) {
  const std::string bytes = encode_image(field, format, maxval);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void write_image(const ImageField& field, const std::filesystem::path& path) {
  write_image(field, path, format_for_path(path));
}

}  // namespace smre
