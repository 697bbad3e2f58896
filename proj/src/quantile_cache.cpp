#include "smre/quantile_cache.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <unistd.h>

#include "smre/random.hpp"

namespace smre {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_bars(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto bar = line.find('|', start);
    out.push_back(trim(line.substr(start, bar - start)));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return out;
}

template <class T>
bool parse_whole(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && p == end;
}

std::string shortest(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::string hexfloat(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::hex);
  return std::string(buf, p);
}

}  // namespace

std::string format_cache_line(const QuantileRecord& rec) {
  if (rec.system_id.find_first_of(" |\n") != std::string::npos)
    throw std::invalid_argument("quantile cache: system id may not contain blanks or '|'");
  std::ostringstream os;
  os << "SMRE-Q v1 | " << rec.rows << ' ' << rec.cols << " | " << rec.system_id << " | " << shortest(rec.alpha)
     << " | " << rec.trials << " | " << rec.seed << " | " << hexfloat(rec.q_alpha);
  return os.str();
}

std::optional<QuantileRecord> parse_cache_line(const std::string& line) {
  const auto f = split_bars(line);
  if (f.size() != 7 || f[0] != "SMRE-Q v1") return std::nullopt;
  QuantileRecord rec;
  std::istringstream dims(f[1]);
  std::string ms, ns, extra;
  if (!(dims >> ms >> ns) || (dims >> extra)) return std::nullopt;
  if (!parse_whole(ms, rec.rows) || !parse_whole(ns, rec.cols)) return std::nullopt;
  if (f[2].empty() || f[2].find(' ') != std::string::npos) return std::nullopt;
  rec.system_id = f[2];
  if (!parse_whole(f[3], rec.alpha) || !parse_whole(f[4], rec.trials) || !parse_whole(f[5], rec.seed))
    return std::nullopt;
  std::string q = f[6];
  // to_chars hex output carries no "0x" prefix; accept one for hand-edited files.
  bool neg = false;
  if (!q.empty() && q[0] == '-') {
    neg = true;
    q.erase(0, 1);
  }
  if (q.rfind("0x", 0) == 0 || q.rfind("0X", 0) == 0) q.erase(0, 2);
  const char* end = q.data() + q.size();
  auto [p, ec] = std::from_chars(q.data(), end, rec.q_alpha, std::chars_format::hex);
  if (ec != std::errc{} || p != end) return std::nullopt;
  if (neg) rec.q_alpha = -rec.q_alpha;
  rec.generator = kGeneratorName;
  return rec;
}

QuantileCache::QuantileCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty()) throw std::invalid_argument("quantile cache: empty path");
}

std::vector<QuantileRecord> QuantileCache::records() const {
  std::vector<QuantileRecord> out;
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line))
    if (auto rec = parse_cache_line(line)) out.push_back(std::move(*rec));
  return out;
}

std::optional<QuantileRecord> QuantileCache::lookup(std::size_t rows, std::size_t cols, const std::string& system_id,
                                                    double alpha, std::size_t trials, std::uint64_t seed) const {
  for (auto& rec : records())
    if (rec.rows == rows && rec.cols == cols && rec.system_id == system_id && rec.alpha == alpha &&
        rec.trials == trials && rec.seed == seed)
      return rec;
  return std::nullopt;
}

void QuantileCache::append(const QuantileRecord& rec) const {
  const std::string line = format_cache_line(rec);
  std::string existing;
  {
    std::ifstream in(path_, std::ios::binary);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      existing = ss.str();
    }
  }
  if (!existing.empty() && existing.back() != '\n') existing.push_back('\n');

  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::filesystem::path tmp = path_;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("quantile cache: cannot write '" + tmp.string() + "'");
    out << existing << line << '\n';
    out.flush();
    if (!out) throw std::runtime_error("quantile cache: write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path_, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("quantile cache: rename onto '" + path_.string() + "' failed: " + ec.message());
  }
}

}  // namespace smre
