#ifndef FACESIG_SIGNALS_HPP
#define FACESIG_SIGNALS_HPP

#include "facesig/types.hpp"

#include <array>
#include <optional>

namespace facesig {

/// Generic 6-point face model (4 eye corners + 2 mouth corners) used
/// by the weak-perspective pose fit. Coordinates are a calibration
/// artifact; the default is a plausible frontal configuration in
/// interocular-width units with the inner eye corners slightly in
/// front of the outer ones (face curvature), which keeps the centered
/// configuration at full rank 3 as the pose fit requires.
struct FaceModel3D {
    // order matches EyeIndexMap::eye_corners then mouth_corners:
    // outer-right, inner-right, inner-left, outer-left, mouth-right, mouth-left
    std::array<std::array<double, 3>, 6> points{{
        {-0.50, 0.0, 0.00},
        {-0.15, 0.0, 0.10},
        {0.15, 0.0, 0.10},
        {0.50, 0.0, 0.00},
        {-0.25, 0.55, 0.05},
        {0.25, 0.55, 0.05},
    }};
    double interocular_width = 1.0;
    double focal_length_px = 500.0;

    void validate() const; // throws InvalidSpec
};

/// Intrinsic x-y-z Euler angles (pitch about x, yaw about y, roll
/// about z) plus the recovered weak-perspective scale in px per
/// model unit.
struct HeadPose {
    double pitch_rad = 0.0;
    double yaw_rad = 0.0;
    double roll_rad = 0.0;
    double scale = 0.0;
};

struct FrameSignals {
    double ear_left = 0.0;
    double ear_right = 0.0;
    double head_pitch = 0.0;
    double head_yaw = 0.0;
    double head_roll = 0.0;
    double head_distance = 0.0;
    std::optional<GazeAngles> gaze_left;
    std::optional<GazeAngles> gaze_right;
};

/// Eye aspect ratio: (||p2-p6|| + ||p3-p5||) / (2 ||p1-p4||).
/// Throws DegenerateEye when the horizontal corners coincide.
double compute_ear(const std::array<Point2, 6>& eye_points);

/// Weak-perspective pose fit of the 6-point model to image points:
/// both point sets are centered, the least-squares 2x3 linear map is
/// completed to scale times a proper rotation via SVD, and intrinsic
/// x-y-z angles are extracted. Throws DegenerateConfiguration when the
/// centered image points have rank < 2.
HeadPose fit_head_pose(const std::array<Point2, 6>& image_points, const FaceModel3D& model);

/// Pinhole distance from the recovered scale: focal_length_px / scale.
double head_distance(double scale, const FaceModel3D& model);

/// Forward weak-perspective projection of the model under intrinsic
/// x-y-z angles; the fit's inverse, used for synthesis and testing.
std::array<Point2, 6> project_model(const FaceModel3D& model, double pitch_rad,
                                    double yaw_rad, double roll_rad, double scale,
                                    double center_x = 0.0, double center_y = 0.0);

/// Rotation matrix for intrinsic x-y-z angles, row-major.
std::array<std::array<double, 3>, 3> rotation_xyz(double pitch_rad, double yaw_rad,
                                                  double roll_rad);

/// Per-frame composition: EAR per eye, head pose + distance, gaze
/// pass-through. Returns nullopt (never throws) when the frame is
/// invalid or a per-frame computation degenerates.
std::optional<FrameSignals> frame_signals(const LandmarkFrame& frame, const EyeIndexMap& map,
                                          const FaceModel3D& model);

} // namespace facesig

#endif
