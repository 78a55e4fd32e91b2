#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sengraph/geometry.hpp"

namespace sengraph {

/// Regular grid of cell values in world coordinates. Values are stored
/// row-major with row 0 at the northern edge; the origin (xll, yll) is the
/// south-west corner of the footprint. NODATA cells are stored as NaN.
struct Raster {
  int ncols = 0;
  int nrows = 0;
  double xll = 0.0;
  double yll = 0.0;
  double cellsize = 1.0;
  double nodata = -9999.0;
  std::vector<double> values;

  double at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * ncols + c];
  }
  double& at(int r, int c) {
    return values[static_cast<std::size_t>(r) * ncols + c];
  }

  double x_max() const { return xll + ncols * cellsize; }
  double y_max() const { return yll + nrows * cellsize; }
  bool contains(double x, double y) const {
    return x >= xll && x <= x_max() && y >= yll && y <= y_max();
  }

  /// Extremes over finite cells. Throw std::runtime_error when every cell is
  /// NODATA.
  double value_min() const;
  double value_max() const;
};

/// Fractal terrain via midpoint displacement on a (2^k+1)^2 lattice, cropped
/// to n x n. Values are rescaled to exactly [0, 1000*roughness], so relief
/// shrinks with roughness while staying within [0, 1000]. roughness must lie
/// in (0, 1].
Raster synth_terrain(int n, double roughness, std::uint64_t seed,
                     double xll = 0.0, double yll = 0.0,
                     double cellsize = 30.0);

/// ASCII grid exchange format: six "key value" header lines (ncols, nrows,
/// xllcorner, yllcorner, cellsize, optional NODATA_value) followed by nrows
/// lines of ncols values, northernmost row first. Parse failures throw
/// std::runtime_error naming the origin and 1-based line.
Raster parse_ascii_grid(std::string_view text, const std::string& origin);
Raster load_ascii_grid(const std::filesystem::path& path);
std::string serialize_ascii_grid(const Raster& r);
void save_ascii_grid(const Raster& r, const std::filesystem::path& path);

/// Bilinear interpolation between the four surrounding cell centres, with
/// edge clamping inside the half-cell margin. Returns NaN when any cell
/// touched by the interpolation is NODATA. Coordinates outside the footprint
/// throw std::invalid_argument.
double sample_point(const Raster& r, double x, double y);

/// side x side point samples centred on (cx, cy) with the given spacing
/// between sample points, row-major with the northernmost row first.
std::vector<double> sample_patch(const Raster& r, double cx, double cy,
                                 int side, double spacing);

/// count samples evenly spaced by arc length from the first to the last
/// vertex inclusive. count must be >= 2.
std::vector<double> sample_polyline(const Raster& r,
                                    const std::vector<Point>& pts, int count);

/// The sample positions used by sample_polyline, for callers that need the
/// world coordinates as well as the values.
std::vector<Point> polyline_sample_points(const std::vector<Point>& pts,
                                          int count);

}  // namespace sengraph
