#ifndef AOS_CAMERA_H_
#define AOS_CAMERA_H_

#include <cmath>
#include <numbers>
#include <optional>

#include "aos/geometry.h"
#include "aos/surface_field.h"

namespace aos {

// Full field of view that gives a 22 m square ground footprint from 35 m.
inline const double kDefaultFovDeg =
    2.0 * std::atan(11.0 / 35.0) * 180.0 / std::numbers::pi;

// Square-pixel pinhole; fov_deg spans the image width.
struct CameraIntrinsics {
  int width = 512;
  int height = 512;
  double fov_deg = kDefaultFovDeg;

  double focal_px() const;
  double cx() const { return (width - 1) * 0.5; }
  double cy() const { return (height - 1) * 0.5; }

  bool operator==(const CameraIntrinsics&) const = default;
};

// Nadir-looking camera in a local east-north-up frame. With yaw 0 image
// columns run east and rows run south; yaw rotates counter-clockwise.
struct CameraPose {
  Vec3 position;  // z is the altitude above the ground datum
  double yaw_deg = 0.0;
  CameraIntrinsics intrinsics;

  // Ground-plane directions of increasing column and increasing row.
  Vec3 column_axis() const;
  Vec3 row_axis() const;
};

// Throws ParameterError unless altitude > 0 and the intrinsics are sane.
void validate_pose(const CameraPose& pose);

// Unnormalized viewing direction through a continuous pixel coordinate.
Vec3 pixel_ray_dir(const CameraPose& pose, PixelCoord pixel);

// Intersection of the pixel's viewing ray with the plane z = ground_height_m.
// Throws ProjectionError when the camera is not above that plane.
GroundPoint project_to_ground(const CameraPose& pose, PixelCoord pixel,
                              double ground_height_m = 0.0);

// Inverse projection without bounds checking.
PixelCoord ground_to_image(const CameraPose& pose, GroundPoint g,
                           double ground_height_m = 0.0);

// Image coordinate of a ground point in the given (center) view, or nullopt
// when it falls outside the image frame [-0.5, w-0.5] x [-0.5, h-0.5].
std::optional<PixelCoord> backproject_to_center(GroundPoint g,
                                                 const CameraPose& center,
                                                 double ground_height_m = 0.0);

// Pixel-to-pixel map between two nadir views of a flat ground plane. It is
// affine: src = m * dst + b.
struct ImageAffine {
  double m00, m01, m10, m11;
  double b0, b1;

  PixelCoord apply(double x, double y) const {
    return {m00 * x + m01 * y + b0, m10 * x + m11 * y + b1};
  }
};

ImageAffine view_to_view_affine(const CameraPose& dst, const CameraPose& src,
                                double ground_height_m = 0.0);

// Half side length of the ground footprint.
double footprint_half_m(const CameraPose& pose, double ground_height_m = 0.0);

}  // namespace aos

#endif  // AOS_CAMERA_H_
