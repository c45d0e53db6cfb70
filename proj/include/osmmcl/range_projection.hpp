#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace osmmcl {

struct CloudPoint3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;
  double reflectivity = 0.0;
};

/// r in meters, theta inclination from +z in [0, pi], phi azimuth in (-pi, pi].
struct SphericalCoord {
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

/// r = |p|, theta = acos(z / r), phi = atan2(y, x) with -pi mapped to pi and phi = 0 on the
/// z axis. Throws Error(kDegenerate) for r == 0.
SphericalCoord to_spherical(const CloudPoint3& p);
/// Cartesian (x, y, z) of a spherical coordinate; intensity and reflectivity are zero.
CloudPoint3 from_spherical(const SphericalCoord& s);

inline constexpr int kImageRows = 128;
inline constexpr int kImageCols = 512;

/// Angular layout of the range image. Columns bin azimuth from -span/2 at a fixed
/// resolution; rows bin inclination uniformly over [90 - max_alt, 90 - min_alt] degrees.
struct FieldOfView {
  double azimuth_span_deg = 180.0;
  double azimuth_resolution_deg = 0.35;
  double min_altitude_deg = -22.5;
  double max_altitude_deg = 22.5;

  void validate() const;
  [[nodiscard]] double phi_min() const;
  [[nodiscard]] double azimuth_resolution() const;
  [[nodiscard]] double theta_min() const;
  [[nodiscard]] double vertical_resolution() const;
};

/// Pixel (row, col) a spherical coordinate falls in, or nullopt-equivalent {-1, -1} when
/// the azimuth lies outside the span.
struct PixelIndex {
  int row = -1;
  int col = -1;
  [[nodiscard]] bool valid() const { return row >= 0 && col >= 0; }
};
PixelIndex pixel_for(const SphericalCoord& s, const FieldOfView& fov);

/// 128 x 512 three-channel front-view image, row-major.
struct RangeImage {
  std::vector<float> range;
  std::vector<float> intensity;
  std::vector<float> reflectivity;
  std::vector<std::uint8_t> occupied;
  std::vector<std::int64_t> source;  // index into the projected cloud, -1 when empty

  RangeImage();
  [[nodiscard]] static std::size_t index(int row, int col) {
    return static_cast<std::size_t>(row) * kImageCols + static_cast<std::size_t>(col);
  }
  [[nodiscard]] std::size_t occupancy() const;
};

/// Projects a cloud; on pixel collisions the smaller range wins (lower index on ties).
/// Zero-range points and points outside the azimuth span are skipped.
RangeImage project(std::span<const CloudPoint3> cloud, const FieldOfView& fov = {});

struct PixelMask {
  int rows = kImageRows;
  int cols = kImageCols;
  std::vector<std::uint8_t> values;
};

/// Per-point labels: the mask value of the pixel that kept the point, 0 for points no
/// pixel references. Throws Error(kInvalidArgument) if the mask is not 128 x 512.
std::vector<std::uint8_t> backproject_labels(const RangeImage& image, const PixelMask& mask,
                                             std::size_t cloud_len);

/// CSV with header "x,y,z,intensity,reflectivity".
std::vector<CloudPoint3> read_cloud_csv(const std::filesystem::path& path);
void write_cloud_csv(const std::filesystem::path& path, std::span<const CloudPoint3> cloud);
/// u32 count then count * 5 f32 (x, y, z, intensity, reflectivity), little-endian.
std::vector<CloudPoint3> read_cloud_binary(const std::filesystem::path& path);
void write_cloud_binary(const std::filesystem::path& path, std::span<const CloudPoint3> cloud);

/// Writes <prefix>_range.pgm, <prefix>_intensity.pgm and <prefix>_reflectivity.pgm as
/// 16-bit binary PGMs. Range is stored in centimeters (saturating), the unit channels
/// scaled to 0..65535. `comment` lines are embedded in each header.
void write_pgm_triplet(const std::filesystem::path& prefix, const RangeImage& image,
                       const std::vector<std::string>& comment = {});

}  // namespace osmmcl
