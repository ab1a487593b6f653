// Copyright 2026 The Geosynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "geosynth/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "geosynth/errors.hpp"

namespace geosynth {
namespace {

double affine(double v, Interval from, Interval to) {
  return to.lo + (v - from.lo) * (to.width() / from.width());
}

Interval column_range(std::span<const double> col) {
  auto [lo, hi] = std::minmax_element(col.begin(), col.end());
  return {*lo, *hi};
}

}  // namespace

CoordTransform::CoordTransform(Interval lon_range, Interval lat_range,
                               Interval target)
    : lon_(lon_range), lat_(lat_range), target_(target) {
  if (!(lon_.width() > 0) || !(lat_.width() > 0)) {
    throw DegenerateRangeError("coordinate range has zero width");
  }
  if (!(target_.width() > 0)) {
    throw DegenerateRangeError("target interval has zero width");
  }
}

double CoordTransform::forward_lon(double v) const {
  return affine(v, lon_, target_);
}
double CoordTransform::forward_lat(double v) const {
  return affine(v, lat_, target_);
}
double CoordTransform::inverse_lon(double v) const {
  return affine(v, target_, lon_);
}
double CoordTransform::inverse_lat(double v) const {
  return affine(v, target_, lat_);
}

Point CoordTransform::forward(Point p) const {
  return {forward_lon(p.x), forward_lat(p.y)};
}

Point CoordTransform::inverse(Point p) const {
  return {inverse_lon(p.x), inverse_lat(p.y)};
}

std::pair<Dataset, CoordTransform> recode_coords(const Dataset& ds,
                                                 Interval target) {
  const std::size_t jx = ds.schema().longitude();
  const std::size_t jy = ds.schema().latitude();
  if (ds.n_rows() == 0) throw DegenerateRangeError("dataset has no rows");
  const Interval lon = column_range(ds.column(jx));
  const Interval lat = column_range(ds.column(jy));
  if (!(lon.width() > 0)) {
    throw DegenerateRangeError("longitude column '" + ds.schema()[jx].name +
                               "' is constant");
  }
  if (!(lat.width() > 0)) {
    throw DegenerateRangeError("latitude column '" + ds.schema()[jy].name +
                               "' is constant");
  }
  CoordTransform t(lon, lat, target);
  std::vector<double> xs(ds.n_rows());
  std::vector<double> ys(ds.n_rows());
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    // Pin the extremes so endpoints land on the target bounds exactly.
    const double x = ds.value(i, jx);
    const double y = ds.value(i, jy);
    xs[i] = x == lon.lo ? target.lo : x == lon.hi ? target.hi : t.forward_lon(x);
    ys[i] = y == lat.lo ? target.lo : y == lat.hi ? target.hi : t.forward_lat(y);
  }
  Dataset out = ds.with_columns({{jx, std::move(xs)}, {jy, std::move(ys)}});
  return {std::move(out), t};
}

Point record_location(const Dataset& ds, std::size_t row) {
  return {ds.value(row, ds.schema().longitude()),
          ds.value(row, ds.schema().latitude())};
}

Point polygon_centroid(const Polygon& polygon) {
  if (polygon.empty()) throw Error("centroid of an empty polygon");
  double a2 = 0;
  double cx = 0;
  double cy = 0;
  const std::size_t n = polygon.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Point p = polygon[k];
    const Point q = polygon[(k + 1) % n];
    const double cross = p.x * q.y - q.x * p.y;
    a2 += cross;
    cx += (p.x + q.x) * cross;
    cy += (p.y + q.y) * cross;
  }
  if (std::abs(a2) < 1e-300) {
    Point mean;
    for (const Point& p : polygon) {
      mean.x += p.x;
      mean.y += p.y;
    }
    return {mean.x / n, mean.y / n};
  }
  return {cx / (3.0 * a2), cy / (3.0 * a2)};
}

bool point_in_polygon(const Polygon& polygon, Point p) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t k = 0, prev = n - 1; k < n; prev = k++) {
    const Point a = polygon[prev];
    const Point b = polygon[k];
    // On-edge check.
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (std::abs(cross) <= 1e-12 * (1.0 + std::abs(b.x - a.x) + std::abs(b.y - a.y)) &&
        p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
        p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y)) {
      return true;
    }
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

RegionMap RegionMap::grid(int nx, int ny, Extent extent) {
  if (nx < 1 || ny < 1) throw ConfigError("grid dimensions must be positive");
  if (!(extent.x.width() > 0) || !(extent.y.width() > 0)) {
    throw ConfigError("grid extent has zero width");
  }
  RegionMap rm;
  rm.nx_ = nx;
  rm.ny_ = ny;
  rm.extent_ = extent;
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) rm.labels_.push_back(rm.grid_label(ix, iy));
  }
  return rm;
}

RegionMap RegionMap::polygons(
    std::vector<std::pair<std::string, Polygon>> polys) {
  if (polys.empty()) throw ConfigError("polygon region map has no polygons");
  RegionMap rm;
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& [name, poly] : polys) {
    if (poly.size() < 3) {
      throw ConfigError("region '" + name + "' has fewer than 3 vertices");
    }
    for (const Point& p : poly) {
      xlo = std::min(xlo, p.x);
      xhi = std::max(xhi, p.x);
      ylo = std::min(ylo, p.y);
      yhi = std::max(yhi, p.y);
    }
    rm.labels_.push_back(name);
  }
  rm.extent_ = {{xlo, xhi}, {ylo, yhi}};
  rm.polygons_ = std::move(polys);
  return rm;
}

RegionMap RegionMap::load_polygons_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open polygon file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("polygon file is empty");
  std::map<std::string, std::map<long, Point>> verts;
  std::vector<std::string> order;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t s = 0;
    while (true) {
      std::size_t e = line.find(',', s);
      f.push_back(line.substr(s, e == std::string::npos ? e : e - s));
      if (e == std::string::npos) break;
      s = e + 1;
    }
    if (f.size() != 4) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected region,vertex_index,x,y");
    }
    try {
      const long k = std::stol(f[1]);
      const Point p{std::stod(f[2]), std::stod(f[3])};
      if (!verts.count(f[0])) order.push_back(f[0]);
      verts[f[0]][k] = p;
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": non-numeric vertex");
    }
  }
  std::vector<std::pair<std::string, Polygon>> polys;
  for (const auto& name : order) {
    Polygon poly;
    for (const auto& [k, p] : verts[name]) poly.push_back(p);
    polys.emplace_back(name, std::move(poly));
  }
  return polygons(std::move(polys));
}

std::string RegionMap::grid_label(int ix, int iy) const {
  if (nx_ > 10 || ny_ > 10) {
    return "r" + std::to_string(ix) + "_" + std::to_string(iy);
  }
  return "r" + std::to_string(ix) + std::to_string(iy);
}

std::string RegionMap::assign(Point p) const {
  if (is_grid()) {
    if (!extent_.contains(p)) return std::string(kUnassignedRegion);
    auto cell = [](double v, Interval iv, int k) {
      int c = static_cast<int>(std::floor((v - iv.lo) * k / iv.width()));
      return std::clamp(c, 0, k - 1);
    };
    return grid_label(cell(p.x, extent_.x, nx_), cell(p.y, extent_.y, ny_));
  }
  for (const auto& [name, poly] : polygons_) {
    if (point_in_polygon(poly, p)) return name;
  }
  return std::string(kUnassignedRegion);
}

std::vector<std::string> RegionMap::assign_all(const Dataset& ds) const {
  std::vector<std::string> out(ds.n_rows());
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    out[i] = assign(record_location(ds, i));
  }
  return out;
}

}  // namespace geosynth
