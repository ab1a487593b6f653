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

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geosynth/dataset.hpp"

namespace geosynth {

// A location; x is longitude, y is latitude.
struct Point {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Interval {
  double lo = 0;
  double hi = 0;
  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct Extent {
  Interval x;
  Interval y;
  bool contains(Point p) const { return x.contains(p.x) && y.contains(p.y); }
};

// Recoded coordinate domain used throughout the library.
inline constexpr Interval kRecodedRange{1.0, 100.0};

// Per-axis affine map from source coordinate ranges onto a target interval.
class CoordTransform {
 public:
  CoordTransform(Interval lon_range, Interval lat_range,
                 Interval target = kRecodedRange);

  Point forward(Point p) const;
  Point inverse(Point p) const;
  double forward_lon(double v) const;
  double forward_lat(double v) const;
  double inverse_lon(double v) const;
  double inverse_lat(double v) const;

  Interval lon_range() const { return lon_; }
  Interval lat_range() const { return lat_; }
  Interval target() const { return target_; }

 private:
  Interval lon_;
  Interval lat_;
  Interval target_;
};

// Maps both coordinate columns onto `target`. Throws DegenerateRangeError for
// a constant coordinate column.
std::pair<Dataset, CoordTransform> recode_coords(
    const Dataset& ds, Interval target = kRecodedRange);

Point record_location(const Dataset& ds, std::size_t row);

using Polygon = std::vector<Point>;

// Area-weighted centroid of a simple polygon; falls back to the vertex mean
// for zero-area input.
Point polygon_centroid(const Polygon& polygon);

// Even-odd point-in-polygon test. Points on an edge count as inside.
bool point_in_polygon(const Polygon& polygon, Point p);

inline constexpr std::string_view kUnassignedRegion = "unassigned";

// Assigns locations to named regions, either on a rectangular grid or by
// polygon membership (first listed polygon wins).
class RegionMap {
 public:
  // Grid cells are half-open [lo, hi) on both axes except the topmost edge,
  // which is closed. Labels are "r<ix><iy>" (x index first); when either
  // dimension exceeds 10 the indices are separated by an underscore.
  static RegionMap grid(int nx, int ny, Extent extent);
  static RegionMap polygons(std::vector<std::pair<std::string, Polygon>> polys);
  // CSV with header region,vertex_index,x,y.
  static RegionMap load_polygons_csv(const std::string& path);

  std::string assign(Point p) const;
  std::vector<std::string> assign_all(const Dataset& ds) const;
  const std::vector<std::string>& labels() const { return labels_; }

  bool is_grid() const { return nx_ > 0; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const Extent& extent() const { return extent_; }

 private:
  RegionMap() = default;
  std::string grid_label(int ix, int iy) const;

  int nx_ = 0;
  int ny_ = 0;
  Extent extent_;
  std::vector<std::pair<std::string, Polygon>> polygons_;
  std::vector<std::string> labels_;
};

}  // namespace geosynth
