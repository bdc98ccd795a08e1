#include "facesig/signals.hpp"
#include "facesig/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace facesig {

void FaceModel3D::validate() const {
    if (interocular_width <= 0.0) throw InvalidSpec("interocular_width must be positive");
    if (focal_length_px <= 0.0) throw InvalidSpec("focal_length_px must be positive");
    Eigen::Matrix<double, 3, 6> m;
    for (int i = 0; i < 6; ++i)
        m.col(i) = Eigen::Vector3d(points[i][0], points[i][1], points[i][2]);
    Eigen::Vector3d centroid = m.rowwise().mean();
    m.colwise() -= centroid;
    Eigen::JacobiSVD<Eigen::Matrix<double, 3, 6>> svd(m);
    // the pose fit needs a genuinely 3-dimensional configuration
    if (svd.singularValues()(2) < 1e-9 * std::max(1.0, svd.singularValues()(0)))
        throw InvalidSpec("model points are rank-deficient");
}

double compute_ear(const std::array<Point2, 6>& p) {
    auto dist = [](const Point2& a, const Point2& b) {
        return std::hypot(a.x - b.x, a.y - b.y);
    };
    double horizontal = dist(p[0], p[3]);
    if (horizontal < 1e-9) throw DegenerateEye("eye corners coincide");
    return (dist(p[1], p[5]) + dist(p[2], p[4])) / (2.0 * horizontal);
}

std::array<std::array<double, 3>, 3> rotation_xyz(double pitch, double yaw, double roll) {
    double ca = std::cos(pitch), sa = std::sin(pitch);
    double cb = std::cos(yaw), sb = std::sin(yaw);
    double cc = std::cos(roll), sc = std::sin(roll);
    // R = Rx(pitch) * Ry(yaw) * Rz(roll)
    return {{{cb * cc, -cb * sc, sb},
             {ca * sc + sa * sb * cc, ca * cc - sa * sb * sc, -sa * cb},
             {sa * sc - ca * sb * cc, sa * cc + ca * sb * sc, ca * cb}}};
}

std::array<Point2, 6> project_model(const FaceModel3D& model, double pitch, double yaw,
                                    double roll, double scale, double cx, double cy) {
    auto R = rotation_xyz(pitch, yaw, roll);
    std::array<Point2, 6> out;
    for (int i = 0; i < 6; ++i) {
        const auto& p = model.points[i];
        double x = R[0][0] * p[0] + R[0][1] * p[1] + R[0][2] * p[2];
        double y = R[1][0] * p[0] + R[1][1] * p[1] + R[1][2] * p[2];
        out[i] = Point2{scale * x + cx, scale * y + cy};
    }
    return out;
}

HeadPose fit_head_pose(const std::array<Point2, 6>& image_points, const FaceModel3D& model) {
    Eigen::Matrix<double, 3, 6> m;
    Eigen::Matrix<double, 2, 6> x;
    for (int i = 0; i < 6; ++i) {
        m.col(i) = Eigen::Vector3d(model.points[i][0], model.points[i][1], model.points[i][2]);
        x.col(i) = Eigen::Vector2d(image_points[i].x, image_points[i].y);
    }
    Eigen::Vector3d mc = m.rowwise().mean();
    Eigen::Vector2d xc = x.rowwise().mean();
    m.colwise() -= mc;
    x.colwise() -= xc;

    {
        Eigen::JacobiSVD<Eigen::Matrix<double, 2, 6>> rank_check(x);
        const auto& sv = rank_check.singularValues();
        if (sv(1) < 1e-9 * std::max(1.0, sv(0)))
            throw DegenerateConfiguration("centered image points have rank < 2");
    }

    // least-squares 2x3 linear map, then polar completion to scale * rotation
    Eigen::Matrix3d mmt = m * m.transpose();
    Eigen::Matrix<double, 2, 3> a =
        (x * m.transpose()) * mmt.completeOrthogonalDecomposition().pseudoInverse();

    Eigen::JacobiSVD<Eigen::Matrix<double, 2, 3>> svd(
        a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double scale = 0.5 * (sv(0) + sv(1));
    Eigen::Matrix<double, 2, 3> top =
        svd.matrixU() * svd.matrixV().leftCols<2>().transpose();

    Eigen::Vector3d r0 = top.row(0), r1 = top.row(1);
    Eigen::Vector3d r2 = r0.cross(r1); // completes a proper rotation, det +1

    HeadPose pose;
    pose.yaw_rad = std::asin(std::clamp(top(0, 2), -1.0, 1.0));
    pose.roll_rad = std::atan2(-top(0, 1), top(0, 0));
    pose.pitch_rad = std::atan2(-top(1, 2), r2(2));
    pose.scale = scale;
    return pose;
}

double head_distance(double scale, const FaceModel3D& model) {
    if (scale <= 0.0) throw NonPositiveScale("projection scale must be positive");
    return model.focal_length_px / scale;
}

std::optional<FrameSignals> frame_signals(const LandmarkFrame& frame, const EyeIndexMap& map,
                                          const FaceModel3D& model) {
    if (!frame.valid) return std::nullopt;
    auto gather6 = [&](const std::array<int, 6>& idx) {
        std::array<Point2, 6> pts;
        for (int i = 0; i < 6; ++i) pts[i] = frame.landmarks[idx[i]];
        return pts;
    };
    try {
        FrameSignals s;
        s.ear_left = compute_ear(gather6(map.left_eye));
        s.ear_right = compute_ear(gather6(map.right_eye));
        std::array<Point2, 6> pose_pts;
        for (int i = 0; i < 4; ++i) pose_pts[i] = frame.landmarks[map.eye_corners[i]];
        for (int i = 0; i < 2; ++i) pose_pts[4 + i] = frame.landmarks[map.mouth_corners[i]];
        HeadPose pose = fit_head_pose(pose_pts, model);
        s.head_pitch = pose.pitch_rad;
        s.head_yaw = pose.yaw_rad;
        s.head_roll = pose.roll_rad;
        s.head_distance = head_distance(pose.scale, model);
        s.gaze_left = frame.gaze_left;
        s.gaze_right = frame.gaze_right;
        return s;
    } catch (const DegenerateEye&) {
        return std::nullopt;
    } catch (const DegenerateConfiguration&) {
        return std::nullopt;
    } catch (const NonPositiveScale&) {
        return std::nullopt;
    }
}

} // namespace facesig
