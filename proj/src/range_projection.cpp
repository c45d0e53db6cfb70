#include "osmmcl/range_projection.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "osmmcl/csv.hpp"
#include "osmmcl/error.hpp"

namespace osmmcl {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

SphericalCoord to_spherical(const CloudPoint3& p) {
  const double r = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
  if (!(r > 0.0)) throw Error(ErrorCode::kDegenerate, "point at the sensor origin has no direction");
  const double theta = std::acos(std::clamp(p.z / r, -1.0, 1.0));
  double phi = std::atan2(p.y, p.x);
  if (phi <= -std::numbers::pi) phi = std::numbers::pi;
  return {r, theta, phi};
}

CloudPoint3 from_spherical(const SphericalCoord& s) {
  const double st = std::sin(s.theta);
  return {s.r * st * std::cos(s.phi), s.r * st * std::sin(s.phi), s.r * std::cos(s.theta), 0.0, 0.0};
}

void FieldOfView::validate() const {
  if (!(azimuth_span_deg > 0.0 && azimuth_span_deg <= 360.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fov.azimuth_span_deg must be in (0, 360]");
  }
  if (!(azimuth_resolution_deg > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fov.azimuth_resolution_deg must be > 0");
  }
  if (!(max_altitude_deg > min_altitude_deg)) {
    throw Error(ErrorCode::kInvalidArgument, "fov.max_altitude_deg must exceed fov.min_altitude_deg");
  }
}

double FieldOfView::phi_min() const { return -0.5 * azimuth_span_deg * kDeg; }
double FieldOfView::azimuth_resolution() const { return azimuth_resolution_deg * kDeg; }
double FieldOfView::theta_min() const { return (90.0 - max_altitude_deg) * kDeg; }
double FieldOfView::vertical_resolution() const {
  return (max_altitude_deg - min_altitude_deg) * kDeg / kImageRows;
}

PixelIndex pixel_for(const SphericalCoord& s, const FieldOfView& fov) {
  const double phi_min = fov.phi_min();
  if (s.phi < phi_min || s.phi > -phi_min) return {};
  const double col = std::floor((s.phi - phi_min) / fov.azimuth_resolution());
  const double row = std::floor((s.theta - fov.theta_min()) / fov.vertical_resolution());
  return {static_cast<int>(std::clamp(row, 0.0, kImageRows - 1.0)),
          static_cast<int>(std::clamp(col, 0.0, kImageCols - 1.0))};
}

RangeImage::RangeImage()
    : range(kImageRows * kImageCols, 0.0f),
      intensity(kImageRows * kImageCols, 0.0f),
      reflectivity(kImageRows * kImageCols, 0.0f),
      occupied(kImageRows * kImageCols, 0),
      source(kImageRows * kImageCols, -1) {}

std::size_t RangeImage::occupancy() const {
  return static_cast<std::size_t>(std::count(occupied.begin(), occupied.end(), std::uint8_t{1}));
}

RangeImage project(std::span<const CloudPoint3> cloud, const FieldOfView& fov) {
  fov.validate();
  RangeImage img;
  std::vector<double> best_range(img.range.size(), 0.0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud[i];
    if (p.x == 0.0 && p.y == 0.0 && p.z == 0.0) continue;
    const SphericalCoord s = to_spherical(p);
    const PixelIndex px = pixel_for(s, fov);
    if (!px.valid()) continue;
    const auto k = RangeImage::index(px.row, px.col);
    if (img.occupied[k] != 0 && best_range[k] <= s.r) continue;
    img.occupied[k] = 1;
    best_range[k] = s.r;
    img.source[k] = static_cast<std::int64_t>(i);
    img.range[k] = static_cast<float>(s.r);
    img.intensity[k] = static_cast<float>(p.intensity);
    img.reflectivity[k] = static_cast<float>(p.reflectivity);
  }
  return img;
}

std::vector<std::uint8_t> backproject_labels(const RangeImage& image, const PixelMask& mask,
                                             std::size_t cloud_len) {
  if (mask.rows != kImageRows || mask.cols != kImageCols ||
      mask.values.size() != static_cast<std::size_t>(kImageRows) * kImageCols) {
    throw Error(ErrorCode::kInvalidArgument, "label mask must be 128 x 512");
  }
  std::vector<std::uint8_t> labels(cloud_len, 0);
  for (std::size_t k = 0; k < image.source.size(); ++k) {
    if (image.occupied[k] == 0) continue;
    const auto src = image.source[k];
    if (src < 0 || static_cast<std::size_t>(src) >= cloud_len) {
      throw Error(ErrorCode::kInvalidArgument, "range image references a point beyond the cloud");
    }
    labels[static_cast<std::size_t>(src)] = mask.values[k] != 0 ? 1 : 0;
  }
  return labels;
}

std::vector<CloudPoint3> read_cloud_csv(const std::filesystem::path& path) {
  const CsvReader csv(path, {"x", "y", "z", "intensity", "reflectivity"});
  std::vector<CloudPoint3> cloud;
  cloud.reserve(csv.rows().size());
  for (const auto& r : csv.rows()) cloud.push_back({r[0], r[1], r[2], r[3], r[4]});
  return cloud;
}

void write_cloud_csv(const std::filesystem::path& path, std::span<const CloudPoint3> cloud) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << "x,y,z,intensity,reflectivity\n";
  for (const auto& p : cloud) {
    out << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(p.z) << ','
        << format_double(p.intensity) << ',' << format_double(p.reflectivity) << '\n';
  }
}

std::vector<CloudPoint3> read_cloud_binary(const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::uint32_t count = 0;
  if (!in.read(reinterpret_cast<char*>(&count), sizeof(count))) {
    throw Error(ErrorCode::kIo, path.string() + ": missing point count");
  }
  std::vector<CloudPoint3> cloud(count);
  for (auto& p : cloud) {
    std::array<float, 5> v{};
    if (!in.read(reinterpret_cast<char*>(v.data()), sizeof(v))) {
      throw Error(ErrorCode::kIo, path.string() + ": truncated point data");
    }
    p = {v[0], v[1], v[2], v[3], v[4]};
  }
  return cloud;
}

void write_cloud_binary(const std::filesystem::path& path, std::span<const CloudPoint3> cloud) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  const auto count = static_cast<std::uint32_t>(cloud.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& p : cloud) {
    const std::array<float, 5> v{static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z),
                                 static_cast<float>(p.intensity), static_cast<float>(p.reflectivity)};
    out.write(reinterpret_cast<const char*>(v.data()), sizeof(v));
  }
}

void write_pgm_triplet(const std::filesystem::path& prefix, const RangeImage& image,
                       const std::vector<std::string>& comment) {
  auto write_one = [&](const std::string& suffix, const std::vector<float>& channel, double scale) {
    const std::filesystem::path path = prefix.string() + "_" + suffix + ".pgm";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
    out << "P5\n# channel: " << suffix << "\n";
    for (const auto& line : comment) out << "# " << line << "\n";
    out << kImageCols << ' ' << kImageRows << "\n65535\n";
    for (float v : channel) {
      const double scaled = std::clamp(std::round(static_cast<double>(v) * scale), 0.0, 65535.0);
      const auto word = static_cast<std::uint16_t>(scaled);
      const std::array<char, 2> be{static_cast<char>(word >> 8), static_cast<char>(word & 0xff)};
      out.write(be.data(), 2);
    }
  };
  write_one("range", image.range, 100.0);
  write_one("intensity", image.intensity, 65535.0);
  write_one("reflectivity", image.reflectivity, 65535.0);
}

}  // namespace osmmcl
