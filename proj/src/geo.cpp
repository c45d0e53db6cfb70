#include "osmmcl/geo.hpp"

#include <numbers>
#include <sstream>

#include "osmmcl/error.hpp"

namespace osmmcl {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

MapPoint geo_to_map(GeoPoint p, GeoPoint origin) {
  if (!(std::abs(p.lat - origin.lat) < 1.0)) {
    std::ostringstream msg;
    msg << "latitude " << p.lat << " is more than 1 degree from origin latitude " << origin.lat;
    throw Error(ErrorCode::kOutOfExtent, msg.str());
  }
  const double scale = kEarthRadiusM * std::cos(origin.lat * kDegToRad);
  return {scale * (p.lon - origin.lon) * kDegToRad, kEarthRadiusM * (p.lat - origin.lat) * kDegToRad};
}

GeoPoint map_to_geo(MapPoint p, GeoPoint origin) {
  const double scale = kEarthRadiusM * std::cos(origin.lat * kDegToRad);
  return {origin.lat + p.n / kEarthRadiusM / kDegToRad, origin.lon + p.e / scale / kDegToRad};
}

}  // namespace osmmcl
