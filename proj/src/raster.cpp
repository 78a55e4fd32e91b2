#include "sengraph/raster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sengraph/fsio.hpp"
#include "sengraph/rng.hpp"

namespace sengraph {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

[[noreturn]] void fail(const std::string& origin, std::size_t line_no,
                       const std::string& msg) {
  throw std::runtime_error(origin + ":" + std::to_string(line_no + 1) + ": " +
                           msg);
}

}  // namespace

double Raster::value_min() const {
  double best = std::numeric_limits<double>::infinity();
  for (double v : values)
    if (!std::isnan(v)) best = std::min(best, v);
  if (!std::isfinite(best))
    throw std::runtime_error("raster has no data cells");
  return best;
}

double Raster::value_max() const {
  double best = -std::numeric_limits<double>::infinity();
  for (double v : values)
    if (!std::isnan(v)) best = std::max(best, v);
  if (!std::isfinite(best))
    throw std::runtime_error("raster has no data cells");
  return best;
}

Raster synth_terrain(int n, double roughness, std::uint64_t seed, double xll,
                     double yll, double cellsize) {
  if (n < 2) throw std::invalid_argument("synth_terrain: size must be >= 2");
  if (!(roughness > 0.0) || roughness > 1.0)
    throw std::invalid_argument("synth_terrain: roughness must be in (0, 1]");
  if (!(cellsize > 0.0))
    throw std::invalid_argument("synth_terrain: cellsize must be positive");

  int k = 1;
  while ((1 << k) + 1 < n) ++k;
  int m = (1 << k) + 1;
  std::vector<double> g(static_cast<std::size_t>(m) * m, 0.0);
  auto cell = [&](int r, int c) -> double& {
    return g[static_cast<std::size_t>(r) * m + c];
  };

  Rng rng(seed);
  cell(0, 0) = rng.uniform(-1.0, 1.0);
  cell(0, m - 1) = rng.uniform(-1.0, 1.0);
  cell(m - 1, 0) = rng.uniform(-1.0, 1.0);
  cell(m - 1, m - 1) = rng.uniform(-1.0, 1.0);

  double amp = 0.5;
  for (int step = m - 1; step > 1; step /= 2) {
    int half = step / 2;
    for (int r = half; r < m; r += step)
      for (int c = half; c < m; c += step) {
        double avg = (cell(r - half, c - half) + cell(r - half, c + half) +
                      cell(r + half, c - half) + cell(r + half, c + half)) /
                     4.0;
        cell(r, c) = avg + rng.uniform(-amp, amp);
      }
    for (int r = 0; r < m; r += half) {
      int cstart = ((r / half) % 2 == 0) ? half : 0;
      for (int c = cstart; c < m; c += step) {
        double sum = 0.0;
        int cnt = 0;
        if (r - half >= 0) sum += cell(r - half, c), ++cnt;
        if (r + half < m) sum += cell(r + half, c), ++cnt;
        if (c - half >= 0) sum += cell(r, c - half), ++cnt;
        if (c + half < m) sum += cell(r, c + half), ++cnt;
        cell(r, c) = sum / cnt + rng.uniform(-amp, amp);
      }
    }
    amp *= 0.5;
  }

  Raster out;
  out.ncols = n;
  out.nrows = n;
  out.xll = xll;
  out.yll = yll;
  out.cellsize = cellsize;
  out.values.resize(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out.at(r, c) = cell(r, c);

  double lo = out.value_min();
  double hi = out.value_max();
  double target = 1000.0 * roughness;
  for (double& v : out.values)
    // (hi-lo)/(hi-lo) == 1 exactly, so the extremes land on 0 and target.
    v = (hi > lo) ? (v - lo) / (hi - lo) * target : 0.0;
  return out;
}

Raster parse_ascii_grid(std::string_view text, const std::string& origin) {
  std::vector<std::string_view> lines = split_lines(text);
  Raster r;
  std::size_t ln = 0;
  auto header = [&](const char* key) -> std::string_view {
    if (ln >= lines.size()) fail(origin, ln, std::string("missing ") + key);
    auto tk = tokens(lines[ln]);
    if (tk.size() != 2 || !iequals(tk[0], key))
      fail(origin, ln, std::string("expected '") + key + " <value>'");
    ++ln;
    return tk[1];
  };

  try {
    r.ncols = static_cast<int>(parse_int(header("ncols")));
    r.nrows = static_cast<int>(parse_int(header("nrows")));
    r.xll = parse_double(header("xllcorner"));
    r.yll = parse_double(header("yllcorner"));
    r.cellsize = parse_double(header("cellsize"));
  } catch (const std::runtime_error& e) {
    fail(origin, ln > 0 ? ln - 1 : 0, e.what());
  }
  if (r.ncols < 1 || r.nrows < 1)
    fail(origin, 0, "grid dimensions must be positive");
  if (!(r.cellsize > 0.0)) fail(origin, 4, "cellsize must be positive");

  bool has_nodata = false;
  if (ln < lines.size()) {
    auto tk = tokens(lines[ln]);
    if (tk.size() == 2 && iequals(tk[0], "NODATA_value")) {
      try {
        r.nodata = parse_double(tk[1]);
      } catch (const std::runtime_error& e) {
        fail(origin, ln, e.what());
      }
      has_nodata = true;
      ++ln;
    }
  }

  r.values.reserve(static_cast<std::size_t>(r.nrows) * r.ncols);
  int rows_read = 0;
  for (; ln < lines.size(); ++ln) {
    auto tk = tokens(lines[ln]);
    if (tk.empty()) continue;
    if (rows_read == r.nrows) fail(origin, ln, "data after final row");
    if (static_cast<int>(tk.size()) != r.ncols)
      fail(origin, ln,
           "expected " + std::to_string(r.ncols) + " values, got " +
               std::to_string(tk.size()));
    for (auto t : tk) {
      double v = 0.0;
      try {
        v = parse_double(t);
      } catch (const std::runtime_error& e) {
        fail(origin, ln, e.what());
      }
      if (has_nodata && v == r.nodata)
        v = std::numeric_limits<double>::quiet_NaN();
      r.values.push_back(v);
    }
    ++rows_read;
  }
  if (rows_read != r.nrows)
    fail(origin, lines.size() - 1,
         "expected " + std::to_string(r.nrows) + " data rows, got " +
             std::to_string(rows_read));
  return r;
}

Raster load_ascii_grid(const std::filesystem::path& path) {
  return parse_ascii_grid(read_text_file(path), path.string());
}

std::string serialize_ascii_grid(const Raster& r) {
  std::string out;
  out += "ncols " + std::to_string(r.ncols) + "\n";
  out += "nrows " + std::to_string(r.nrows) + "\n";
  out += "xllcorner " + fmt_double(r.xll) + "\n";
  out += "yllcorner " + fmt_double(r.yll) + "\n";
  out += "cellsize " + fmt_double(r.cellsize) + "\n";
  out += "NODATA_value " + fmt_double(r.nodata) + "\n";
  for (int row = 0; row < r.nrows; ++row) {
    for (int c = 0; c < r.ncols; ++c) {
      if (c > 0) out += ' ';
      double v = r.at(row, c);
      out += std::isnan(v) ? fmt_double(r.nodata) : fmt_double(v);
    }
    out += '\n';
  }
  return out;
}

void save_ascii_grid(const Raster& r, const std::filesystem::path& path) {
  atomic_write(path, serialize_ascii_grid(r));
}

double sample_point(const Raster& r, double x, double y) {
  if (!r.contains(x, y))
    throw std::invalid_argument("sample_point: (" + fmt_double(x) + ", " +
                                fmt_double(y) + ") outside raster footprint");
  auto clamp = [](double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
  };
  double u = clamp((x - r.xll) / r.cellsize - 0.5, 0.0, r.ncols - 1.0);
  double vs = clamp((y - r.yll) / r.cellsize - 0.5, 0.0, r.nrows - 1.0);
  double rf = (r.nrows - 1.0) - vs;
  int c0 = static_cast<int>(std::floor(u));
  int r0 = static_cast<int>(std::floor(rf));
  int c1 = std::min(c0 + 1, r.ncols - 1);
  int r1 = std::min(r0 + 1, r.nrows - 1);
  double du = u - c0;
  double dr = rf - r0;
  double top = (1.0 - du) * r.at(r0, c0) + du * r.at(r0, c1);
  double bot = (1.0 - du) * r.at(r1, c0) + du * r.at(r1, c1);
  return (1.0 - dr) * top + dr * bot;
}

std::vector<double> sample_patch(const Raster& r, double cx, double cy,
                                 int side, double spacing) {
  if (side < 1) throw std::invalid_argument("sample_patch: side must be >= 1");
  if (!(spacing > 0.0))
    throw std::invalid_argument("sample_patch: spacing must be positive");
  double h = 0.5 * (side - 1);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(side) * side);
  for (int i = 0; i < side; ++i) {
    double y = cy + (h - i) * spacing;
    for (int j = 0; j < side; ++j) {
      double x = cx + (j - h) * spacing;
      out.push_back(sample_point(r, x, y));
    }
  }
  return out;
}

std::vector<Point> polyline_sample_points(const std::vector<Point>& pts,
                                          int count) {
  if (pts.empty())
    throw std::invalid_argument("polyline_sample_points: empty polyline");
  if (count < 2)
    throw std::invalid_argument("polyline_sample_points: count must be >= 2");
  std::vector<Point> out;
  out.reserve(count);
  if (pts.size() == 1) {
    out.assign(count, pts[0]);
    return out;
  }
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i)
    cum[i] = cum[i - 1] + dist(pts[i - 1], pts[i]);
  double total = cum.back();
  if (total == 0.0) {
    out.assign(count, pts[0]);
    return out;
  }
  std::size_t seg = 0;
  for (int i = 0; i < count; ++i) {
    double d = total * (static_cast<double>(i) / (count - 1));
    while (seg + 2 < pts.size() && cum[seg + 1] < d) ++seg;
    double len = cum[seg + 1] - cum[seg];
    double t = len > 0.0 ? (d - cum[seg]) / len : 0.0;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    out.push_back({std::lerp(pts[seg].x, pts[seg + 1].x, t),
                   std::lerp(pts[seg].y, pts[seg + 1].y, t)});
  }
  return out;
}

std::vector<double> sample_polyline(const Raster& r,
                                    const std::vector<Point>& pts, int count) {
  std::vector<Point> where = polyline_sample_points(pts, count);
  std::vector<double> out;
  out.reserve(where.size());
  for (Point p : where) out.push_back(sample_point(r, p.x, p.y));
  return out;
}

}  // namespace sengraph
