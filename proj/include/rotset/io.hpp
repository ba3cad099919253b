#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotset/evolve.hpp"
#include "rotset/geometry.hpp"

namespace rotset {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Writes through a temporary and renames on success, so failed or
// interrupted writes never leave a partial output behind.
class AtomicFile {
 public:
  explicit AtomicFile(std::string path)
      : path_(std::move(path)), tmp_(path_ + ".tmp") {
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open for writing: " + tmp_);
  }

  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::remove(tmp_.c_str());
    }
  }

  std::ostream& stream() { return out_; }

  void commit() {
    out_.flush();
    if (!out_) {
      out_.close();
      std::remove(tmp_.c_str());
      throw IoError("write failed: " + path_);
    }
    out_.close();
    if (std::rename(tmp_.c_str(), path_.c_str()) != 0) {
      std::remove(tmp_.c_str());
      throw IoError("cannot rename into place: " + path_);
    }
    committed_ = true;
  }

 private:
  std::string path_, tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

inline std::string parse_field(const std::string& line, const std::string& key,
                               const std::string& path, long lineno,
                               bool to_line_end = false) {
  const std::string pat = key + "=";
  const std::size_t pos = line.find(pat);
  if (pos == std::string::npos)
    throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                ": missing field '" + key + "'");
  std::size_t end =
      to_line_end ? std::string::npos
                  : line.find_first_of(", \t\r", pos + pat.size());
  if (end == std::string::npos) end = line.size();
  return line.substr(pos + pat.size(), end - pos - pat.size());
}

}  // namespace detail

// --- box CSV ----------------------------------------------------------------

inline void write_box_csv(const std::string& path,
                          const RotationApprox& approx) {
  detail::AtomicFile file(path);
  auto& out = file.stream();
  out << "# k=" << approx.k << ", n=" << approx.n
      << ", R=" << detail::fmt_double(approx.reach) << ", m=" << approx.m
      << ", map=" << approx.map_label << "\n";
  out << "# L=" << detail::fmt_double(approx.lipschitz)
      << ", eta=" << detail::fmt_double(approx.eta)
      << ", sound=" << (approx.sound ? 1 : 0) << "\n";
  approx.boxes.for_each(
      [&](BoxIndex b) { out << b.i << "," << b.j << "\n"; });
  file.commit();
}

inline RotationApprox parse_box_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  RotationApprox approx;
  std::vector<BoxIndex> boxes;
  std::string line;
  long lineno = 0;
  bool have_params = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("k=") != std::string::npos &&
          line.find("map=") != std::string::npos) {
        approx.k = std::stoi(detail::parse_field(line, "k", path, lineno));
        approx.n = std::stoi(detail::parse_field(line, "n", path, lineno));
        approx.reach =
            std::stod(detail::parse_field(line, "R", path, lineno));
        approx.m = std::stoi(detail::parse_field(line, "m", path, lineno));
        // map= is written last on the line; labels may contain commas
        approx.map_label =
            detail::parse_field(line, "map", path, lineno, true);
        have_params = true;
      } else if (line.find("sound=") != std::string::npos) {
        approx.sound =
            detail::parse_field(line, "sound", path, lineno) != "0";
        if (line.find("L=") != std::string::npos)
          approx.lipschitz =
              std::stod(detail::parse_field(line, "L", path, lineno));
        if (line.find("eta=") != std::string::npos)
          approx.eta =
              std::stod(detail::parse_field(line, "eta", path, lineno));
      }
      continue;
    }
    std::int64_t i, j;
    char comma;
    std::istringstream row(line);
    if (!(row >> i >> comma >> j) || comma != ',')
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected 'i,j'");
    boxes.push_back({i, j});
  }
  if (!have_params)
    throw std::invalid_argument(path + ": missing '# k=..., n=..., ...' header");
  if (approx.k < 1 || approx.n < 1)
    throw std::invalid_argument(path + ": bad k/n in header");
  if (boxes.empty())
    throw std::invalid_argument(path + ": no boxes");

  std::int64_t ulo = 0, uhi = 0, vlo = 0, vhi = 0;
  bool first = true;
  for (BoxIndex b : boxes) {
    const std::int64_t u = detail::floor_div(b.i, approx.k);
    const std::int64_t v = detail::floor_div(b.j, approx.k);
    if (first) {
      ulo = uhi = u;
      vlo = vhi = v;
      first = false;
    } else {
      ulo = std::min(ulo, u);
      uhi = std::max(uhi, u);
      vlo = std::min(vlo, v);
      vhi = std::max(vhi, v);
    }
  }
  approx.boxes =
      BoxSet(approx.k, ulo, vlo, uhi - ulo + 1, vhi - vlo + 1);
  for (BoxIndex b : boxes) approx.boxes.insert(b.i, b.j);
  return approx;
}

// --- polygon CSV --------------------------------------------------------------

inline void write_polygon_csv(const std::string& path, const Polygon& poly) {
  detail::AtomicFile file(path);
  auto& out = file.stream();
  out << "# polygon vertices, counter-clockwise"
      << (poly.degenerate ? " (degenerate)" : "") << "\n";
  for (const Vec2& v : poly.vertices)
    out << detail::fmt_double(v.x) << "," << detail::fmt_double(v.y) << "\n";
  file.commit();
}

inline Polygon parse_polygon_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  Polygon poly;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("degenerate") != std::string::npos) poly.degenerate = true;
      continue;
    }
    double x, y;
    char comma;
    std::istringstream row(line);
    if (!(row >> x >> comma >> y) || comma != ',')
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected 'x,y'");
    poly.vertices.push_back({x, y});
  }
  if (poly.vertices.empty())
    throw std::invalid_argument(path + ": empty polygon");
  if (poly.vertices.size() < 3) poly.degenerate = true;
  return poly;
}

// --- PGM raster ---------------------------------------------------------------

// Binary P5, one pixel per box over the bounding window of Q_n*:
// occupied = 0, empty = 255. The header comments carry the affine transform
// from pixel to box index (rows run top-down, so row 0 is the highest j).
inline void write_pgm(const std::string& path, const RotationApprox& approx) {
  const BoxSet& q = approx.boxes;
  const std::int64_t w = q.max_i() - q.min_i();
  const std::int64_t h = q.max_j() - q.min_j();
  if (w <= 0 || h <= 0 || w * h > (std::int64_t{1} << 31))
    throw IoError("pgm raster too large: " + path);
  detail::AtomicFile file(path);
  auto& out = file.stream();
  out << "P5\n";
  out << "# map=" << approx.map_label << " k=" << approx.k
      << " n=" << approx.n << "\n";
  out << "# pixel (col,row) -> box (i,j) = (" << q.min_i() << "+col, "
      << q.min_j() << "+" << (h - 1)
      << "-row); normalised box corner = (i,j)/" << approx.k << "/"
      << approx.n << "\n";
  out << w << " " << h << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(w));
  for (std::int64_t r = 0; r < h; ++r) {
    const std::int64_t j = q.min_j() + (h - 1 - r);
    for (std::int64_t c = 0; c < w; ++c)
      row[static_cast<std::size_t>(c)] =
          q.contains(q.min_i() + c, j) ? 0 : 255;
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  file.commit();
}

// --- metadata -----------------------------------------------------------------

inline void write_metadata(const std::string& path,
                           const std::vector<std::pair<std::string,
                                                       std::string>>& kv) {
  detail::AtomicFile file(path);
  for (const auto& [k, v] : kv) file.stream() << k << "=" << v << "\n";
  file.commit();
}

// --- transition table cache ---------------------------------------------------
//
// Purely an optimisation; correctness never depends on it. Layout (all
// integers little-endian):
//   magic "RSTT", u32 version, u32 k, u32 m, f64 R, u64 record count,
//   u32 label length, label bytes, then per record six 32-bit fields:
//   i, j (source base box), base_i, base_j, shift_s, shift_t.

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw IoError("truncated table cache: " + path);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t get_u64(std::istream& in, const std::string& path) {
  const std::uint64_t lo = get_u32(in, path);
  return lo | (static_cast<std::uint64_t>(get_u32(in, path)) << 32);
}

inline std::uint64_t double_bits(double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  return u;
}

inline double bits_double(std::uint64_t u) {
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace detail

inline constexpr char kTableMagic[4] = {'R', 'S', 'T', 'T'};
inline constexpr std::uint32_t kTableVersion = 1;

inline void save_table(const std::string& path, const TransitionTable& table) {
  detail::AtomicFile file(path);
  auto& out = file.stream();
  out.write(kTableMagic, 4);
  detail::put_u32(out, kTableVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(table.k));
  detail::put_u32(out, static_cast<std::uint32_t>(table.m));
  detail::put_u64(out, detail::double_bits(table.reach));
  detail::put_u64(out, table.total_targets());
  detail::put_u32(out, static_cast<std::uint32_t>(table.map_label.size()));
  out.write(table.map_label.data(),
            static_cast<std::streamsize>(table.map_label.size()));
  for (int j = 0; j < table.k; ++j)
    for (int i = 0; i < table.k; ++i)
      for (const TransitionTarget& t : table.targets(i, j)) {
        detail::put_u32(out, static_cast<std::uint32_t>(i));
        detail::put_u32(out, static_cast<std::uint32_t>(j));
        detail::put_u32(out, static_cast<std::uint32_t>(t.base_i));
        detail::put_u32(out, static_cast<std::uint32_t>(t.base_j));
        detail::put_u32(out, static_cast<std::uint32_t>(t.shift_s));
        detail::put_u32(out, static_cast<std::uint32_t>(t.shift_t));
      }
  file.commit();
}

// Loads a cached table and recomputes the derived fields (eta, L, incoming
// arcs) from the stored records and the supplied map.
inline TransitionTable load_table(const std::string& path,
                                  const MapSpec& map) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kTableMagic, 4) != 0)
    throw IoError("not a table cache: " + path);
  if (detail::get_u32(in, path) != kTableVersion)
    throw IoError("unsupported table cache version: " + path);

  TransitionTable table;
  table.k = static_cast<int>(detail::get_u32(in, path));
  table.m = static_cast<int>(detail::get_u32(in, path));
  table.reach = detail::bits_double(detail::get_u64(in, path));
  const std::uint64_t count = detail::get_u64(in, path);
  const std::uint32_t label_len = detail::get_u32(in, path);
  if (table.k < 1 || table.k > 30000 || table.m < 2 || label_len > 4096)
    throw IoError("corrupt table cache header: " + path);
  std::string label(label_len, '\0');
  if (label_len &&
      !in.read(label.data(), static_cast<std::streamsize>(label_len)))
    throw IoError("truncated table cache: " + path);
  table.map_label = label;

  const int k = table.k;
  table.outgoing.resize(static_cast<std::size_t>(k) * k);
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto i = static_cast<std::int32_t>(detail::get_u32(in, path));
    const auto j = static_cast<std::int32_t>(detail::get_u32(in, path));
    TransitionTarget t;
    t.base_i = static_cast<std::int32_t>(detail::get_u32(in, path));
    t.base_j = static_cast<std::int32_t>(detail::get_u32(in, path));
    t.shift_s = static_cast<std::int32_t>(detail::get_u32(in, path));
    t.shift_t = static_cast<std::int32_t>(detail::get_u32(in, path));
    if (i < 0 || i >= k || j < 0 || j >= k || t.base_i < 0 || t.base_i >= k ||
        t.base_j < 0 || t.base_j >= k)
      throw IoError("corrupt table cache record: " + path);
    table.outgoing[static_cast<std::size_t>(j) * k + i].push_back(t);
  }

  table.lipschitz = lipschitz_bound(map);
  table.eta = std::numbers::sqrt2 / (static_cast<double>(k) * (table.m - 1));
  table.sound = table.reach >= table.lipschitz * table.eta;
  detail::rebuild_incoming(table);
  return table;
}

// --- vector CSV (direct method output) ----------------------------------------

inline void write_vectors_csv(const std::string& path,
                              const std::vector<Vec2>& vecs,
                              const std::string& header_comment) {
  detail::AtomicFile file(path);
  auto& out = file.stream();
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  for (const Vec2& v : vecs)
    out << detail::fmt_double(v.x) << "," << detail::fmt_double(v.y) << "\n";
  file.commit();
}

}  // namespace rotset
