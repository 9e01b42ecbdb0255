#include "aos/camera.h"

#include "aos/errors.h"

namespace aos {
namespace {

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

double height_above(const CameraPose& pose, double ground_height_m) {
  const double h = pose.position.z - ground_height_m;
  if (!(h > 0.0)) {
    throw ProjectionError("camera is not above the ground plane");
  }
  return h;
}

}  // namespace

double CameraIntrinsics::focal_px() const {
  return 0.5 * width / std::tan(0.5 * deg2rad(fov_deg));
}

Vec3 CameraPose::column_axis() const {
  const double a = deg2rad(yaw_deg);
  return {std::cos(a), std::sin(a), 0.0};
}

Vec3 CameraPose::row_axis() const {
  const double a = deg2rad(yaw_deg);
  return {std::sin(a), -std::cos(a), 0.0};
}

void validate_pose(const CameraPose& pose) {
  if (!(pose.position.z > 0.0)) {
    throw ParameterError("camera altitude must be positive");
  }
  const auto& in = pose.intrinsics;
  if (in.width <= 0 || in.height <= 0) {
    throw ParameterError("camera resolution must be positive");
  }
  if (!(in.fov_deg > 0.0 && in.fov_deg < 180.0)) {
    throw ParameterError("camera fov must be in (0, 180) degrees");
  }
  if (!std::isfinite(pose.position.x) || !std::isfinite(pose.position.y) ||
      !std::isfinite(pose.yaw_deg)) {
    throw ParameterError("camera pose must be finite");
  }
}

Vec3 pixel_ray_dir(const CameraPose& pose, PixelCoord pixel) {
  const auto& in = pose.intrinsics;
  const double f = in.focal_px();
  const double du = (pixel.x - in.cx()) / f;
  const double dv = (pixel.y - in.cy()) / f;
  return pose.column_axis() * du + pose.row_axis() * dv + Vec3{0.0, 0.0, -1.0};
}

GroundPoint project_to_ground(const CameraPose& pose, PixelCoord pixel,
                              double ground_height_m) {
  const double h = height_above(pose, ground_height_m);
  const Vec3 d = pixel_ray_dir(pose, pixel);
  return {pose.position.x + h * d.x, pose.position.y + h * d.y};
}

PixelCoord ground_to_image(const CameraPose& pose, GroundPoint g,
                           double ground_height_m) {
  const double h = height_above(pose, ground_height_m);
  const auto& in = pose.intrinsics;
  const double s = in.focal_px() / h;
  const Vec3 d{g.x - pose.position.x, g.y - pose.position.y, 0.0};
  return {in.cx() + s * dot(d, pose.column_axis()),
          in.cy() + s * dot(d, pose.row_axis())};
}

std::optional<PixelCoord> backproject_to_center(GroundPoint g,
                                                const CameraPose& center,
                                                double ground_height_m) {
  const PixelCoord p = ground_to_image(center, g, ground_height_m);
  // A small slack absorbs rounding for points exactly on the frame edge.
  constexpr double kEps = 1e-9;
  const auto& in = center.intrinsics;
  if (p.x < -0.5 - kEps || p.y < -0.5 - kEps || p.x > in.width - 0.5 + kEps ||
      p.y > in.height - 0.5 + kEps) {
    return std::nullopt;
  }
  return p;
}

ImageAffine view_to_view_affine(const CameraPose& dst, const CameraPose& src,
                                double ground_height_m) {
  const double hd = height_above(dst, ground_height_m);
  const double hs = height_above(src, ground_height_m);
  const double kd = hd / dst.intrinsics.focal_px();  // meters per dst pixel
  const double ks = src.intrinsics.focal_px() / hs;  // src pixels per meter
  const Vec3 du = dst.column_axis();
  const Vec3 dv = dst.row_axis();
  const Vec3 su = src.column_axis();
  const Vec3 sv = src.row_axis();

  ImageAffine a{};
  a.m00 = ks * kd * dot(du, su);
  a.m01 = ks * kd * dot(dv, su);
  a.m10 = ks * kd * dot(du, sv);
  a.m11 = ks * kd * dot(dv, sv);
  // Ground point of dst pixel (0, 0), then its src image coordinate.
  const Vec3 offset = dst.position - src.position +
                      du * (-dst.intrinsics.cx() * kd) +
                      dv * (-dst.intrinsics.cy() * kd);
  a.b0 = src.intrinsics.cx() + ks * dot(Vec3{offset.x, offset.y, 0.0}, su);
  a.b1 = src.intrinsics.cy() + ks * dot(Vec3{offset.x, offset.y, 0.0}, sv);
  return a;
}

double footprint_half_m(const CameraPose& pose, double ground_height_m) {
  const double h = height_above(pose, ground_height_m);
  return h * std::tan(0.5 * deg2rad(pose.intrinsics.fov_deg));
}

}  // namespace aos
