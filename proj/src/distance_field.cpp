#include "osmmcl/distance_field.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "osmmcl/error.hpp"
#include "osmmcl/parallel.hpp"
#include "osmmcl/segment_index.hpp"

namespace osmmcl {
namespace {

static_assert(std::endian::native == std::endian::little, "MCDF I/O assumes a little-endian host");

constexpr double kTileSize = 32.0;

template <class T>
void put(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  out.write(bytes.data(), bytes.size());
}

template <class T>
T get(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) throw Error(ErrorCode::kIo, "truncated MCDF stream");
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

DistanceField::DistanceField(MapPoint origin, double cell_size, std::uint32_t width, std::uint32_t height,
                             std::vector<double> values)
    : origin_(origin),
      cell_size_(cell_size),
      inv_cell_(1.0 / cell_size),
      width_(width),
      height_(height),
      values_(std::move(values)) {
  if (!(cell_size > 0.0) || width == 0 || height == 0) {
    throw Error(ErrorCode::kInvalidArgument, "distance field needs a positive cell size and extent");
  }
  if (values_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kInvalidArgument, "distance field value count does not match its extent");
  }
}

Rect DistanceField::bounds() const {
  return {origin_.e, origin_.n, origin_.e + width_ * cell_size_, origin_.n + height_ * cell_size_};
}

double DistanceField::lookup_outside(MapPoint p) const {
  const auto clamp_index = [](double f, std::uint32_t count) {
    if (!(f >= 0.0)) return std::uint32_t{0};
    if (f >= count) return count - 1;
    return static_cast<std::uint32_t>(f);
  };
  const auto ix = clamp_index((p.e - origin_.e) * inv_cell_, width_);
  const auto iy = clamp_index((p.n - origin_.n) * inv_cell_, height_);
  return value(ix, iy) + distance(p, cell_center(ix, iy));
}

DistanceField build_distance_field(const RoadGraph& graph, const Rect& bounds, const DistanceFieldOptions& options) {
  if (graph.segments().empty()) throw Error(ErrorCode::kEmptyMap, "road graph has no segments");
  if (bounds.degenerate()) throw Error(ErrorCode::kInvalidArgument, "distance field bounds are degenerate");
  if (!(options.cell_size > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cell size must be positive");

  const double w = std::ceil(bounds.width() / options.cell_size);
  const double h = std::ceil(bounds.height() / options.cell_size);
  if (w * h > static_cast<double>(options.cell_budget) || w > UINT32_MAX || h > UINT32_MAX) {
    throw Error(ErrorCode::kResource, "grid of " + std::to_string(static_cast<std::uint64_t>(w)) + "x" +
                                          std::to_string(static_cast<std::uint64_t>(h)) +
                                          " cells exceeds the cell budget of " + std::to_string(options.cell_budget));
  }
  const auto width = static_cast<std::uint32_t>(w);
  const auto height = static_cast<std::uint32_t>(h);
  const MapPoint origin{bounds.min_e, bounds.min_n};
  const Rect grid_rect{origin.e, origin.n, origin.e + width * options.cell_size,
                       origin.n + height * options.cell_size};
  const SegmentIndex index(graph.segments(), grid_rect, kTileSize);

  std::vector<double> values(static_cast<std::size_t>(width) * height);
  parallel_for_blocks(height, options.workers, [&](std::size_t iy) {
    for (std::uint32_t ix = 0; ix < width; ++ix) {
      const MapPoint c{origin.e + (ix + 0.5) * options.cell_size, origin.n + (iy + 0.5) * options.cell_size};
      values[iy * width + ix] = index.nearest_distance(c);
    }
  });
  return DistanceField(origin, options.cell_size, width, height, std::move(values));
}

void write_mcdf(std::ostream& out, const DistanceField& field) {
  out.write("MCDF", 4);
  put<std::uint32_t>(out, kMcdfVersion);
  put<double>(out, field.origin().e);
  put<double>(out, field.origin().n);
  put<double>(out, field.cell_size());
  put<std::uint32_t>(out, field.width());
  put<std::uint32_t>(out, field.height());
  for (double v : field.values()) put<float>(out, static_cast<float>(v));
  if (!out) throw Error(ErrorCode::kIo, "failed writing MCDF stream");
}

DistanceField read_mcdf(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || std::memcmp(magic.data(), "MCDF", 4) != 0) {
    throw Error(ErrorCode::kParse, "not an MCDF stream");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kMcdfVersion) {
    throw Error(ErrorCode::kParse, "unsupported MCDF version " + std::to_string(version));
  }
  const MapPoint origin{get<double>(in), get<double>(in)};
  const auto cell_size = get<double>(in);
  const auto width = get<std::uint32_t>(in);
  const auto height = get<std::uint32_t>(in);
  std::vector<double> values(static_cast<std::size_t>(width) * height);
  for (auto& v : values) v = get<float>(in);
  return DistanceField(origin, cell_size, width, height, std::move(values));
}

void write_mcdf_file(const std::filesystem::path& path, const DistanceField& field) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  write_mcdf(out, field);
}

DistanceField read_mcdf_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read_mcdf(in);
}

}  // namespace osmmcl
