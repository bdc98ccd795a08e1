#include "facesig/errors.hpp"
#include "facesig/signals.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace facesig;

namespace {

std::array<Point2, 6> transform_eye(const std::array<Point2, 6>& eye, double angle,
                                    double scale, double tx, double ty) {
    std::array<Point2, 6> out;
    const double c = std::cos(angle), s = std::sin(angle);
    for (int i = 0; i < 6; ++i) {
        out[i].x = scale * (c * eye[i].x - s * eye[i].y) + tx;
        out[i].y = scale * (s * eye[i].x + c * eye[i].y) + ty;
    }
    return out;
}

std::array<std::array<double, 3>, 3> matmul(const std::array<std::array<double, 3>, 3>& a,
                                            const std::array<std::array<double, 3>, 3>& b) {
    std::array<std::array<double, 3>, 3> r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

} // namespace

TEST_SUITE("signals") {

TEST_CASE("hand-computed eye aspect ratio") {
    // horizontal extent 2, both vertical extents 1 -> (1+1)/(2*2) = 0.5
    std::array<Point2, 6> eye = {{{0, 0}, {0.6, -0.5}, {1.4, -0.5}, {2, 0}, {1.4, 0.5}, {0.6, 0.5}}};
    CHECK(compute_ear(eye) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("closed eye gives zero") {
    std::array<Point2, 6> eye = {{{0, 0}, {0.6, 0}, {1.4, 0}, {2, 0}, {1.4, 0}, {0.6, 0}}};
    CHECK(compute_ear(eye) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("degenerate horizontal corners throw") {
    std::array<Point2, 6> eye = {{{1, 1}, {0.6, 0}, {1.4, 0}, {1, 1}, {1.4, 1}, {0.6, 1}}};
    CHECK_THROWS_AS(compute_ear(eye), DegenerateEye);
}

TEST_CASE("ear is invariant under similarity transforms") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> angle(-3.14, 3.14);
    std::uniform_real_distribution<double> scale(0.1, 50.0);
    for (int it = 0; it < 300; ++it) {
        std::array<Point2, 6> eye = {{{0, 0},
                                      {0.6 + 0.1 * u(rng), -0.5 + 0.1 * u(rng)},
                                      {1.4 + 0.1 * u(rng), -0.5 + 0.1 * u(rng)},
                                      {2 + 0.1 * u(rng), 0.1 * u(rng)},
                                      {1.4 + 0.1 * u(rng), 0.5 + 0.1 * u(rng)},
                                      {0.6 + 0.1 * u(rng), 0.5 + 0.1 * u(rng)}}};
        double base = compute_ear(eye);
        auto moved = transform_eye(eye, angle(rng), scale(rng), 100 * u(rng), 100 * u(rng));
        CHECK(compute_ear(moved) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("rotation matrices are proper rotations") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> a(-1.0, 1.0);
    for (int it = 0; it < 50; ++it) {
        auto r = rotation_xyz(a(rng), a(rng), a(rng));
        // R * R^T = I
        std::array<std::array<double, 3>, 3> rt{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) rt[i][j] = r[j][i];
        auto id = matmul(r, rt);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(id[i][j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
        double det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) -
                     r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0]) +
                     r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
        CHECK(det == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("pose round trip recovers the planted angles") {
    FaceModel3D model;
    std::mt19937_64 rng(17);
    const double deg = std::numbers::pi / 180.0;
    std::uniform_real_distribution<double> py(-59 * deg, 59 * deg);
    std::uniform_real_distribution<double> rl(-45 * deg, 45 * deg);
    std::uniform_real_distribution<double> sc(50.0, 800.0);
    for (int it = 0; it < 200; ++it) {
        double pitch = py(rng), yaw = py(rng), roll = rl(rng), scale = sc(rng);
        auto pts = project_model(model, pitch, yaw, roll, scale, 320.0, 240.0);
        HeadPose pose = fit_head_pose(pts, model);
        CHECK(pose.pitch_rad == doctest::Approx(pitch).epsilon(1e-6));
        CHECK(pose.yaw_rad == doctest::Approx(yaw).epsilon(1e-6));
        CHECK(pose.roll_rad == doctest::Approx(roll).epsilon(1e-6));
        CHECK(pose.scale == doctest::Approx(scale).epsilon(1e-6));
    }
}

TEST_CASE("head distance is focal length over scale") {
    FaceModel3D model;
    CHECK(head_distance(250.0, model) == doctest::Approx(2.0));
    CHECK_THROWS_AS(head_distance(0.0, model), NonPositiveScale);
    CHECK_THROWS_AS(head_distance(-1.0, model), NonPositiveScale);
}

TEST_CASE("collinear image points degenerate") {
    FaceModel3D model;
    std::array<Point2, 6> pts;
    for (int i = 0; i < 6; ++i) pts[i] = Point2{static_cast<double>(i), 2.0 * i};
    CHECK_THROWS_AS(fit_head_pose(pts, model), DegenerateConfiguration);
}

TEST_CASE("frame signals pass gaze through and reject invalid frames") {
    EyeIndexMap map;
    FaceModel3D model;
    LandmarkFrame frame;
    frame.valid = false;
    CHECK_FALSE(frame_signals(frame, map, model).has_value());

    // build a valid frontal frame from the projected model
    frame.valid = true;
    frame.landmarks.assign(kNumLandmarks, Point2{0, 0});
    auto pts = project_model(model, 0.05, -0.1, 0.02, 300.0, 320.0, 240.0);
    frame.landmarks[map.eye_corners[0]] = pts[0];
    frame.landmarks[map.eye_corners[1]] = pts[1];
    frame.landmarks[map.eye_corners[2]] = pts[2];
    frame.landmarks[map.eye_corners[3]] = pts[3];
    frame.landmarks[map.mouth_corners[0]] = pts[4];
    frame.landmarks[map.mouth_corners[1]] = pts[5];
    auto eye_fill = [&](const std::array<int, 6>& eye) {
        const Point2 p1 = frame.landmarks[eye[0]];
        const Point2 p4 = frame.landmarks[eye[3]];
        frame.landmarks[eye[1]] = Point2{p1.x + (p4.x - p1.x) / 3, p1.y - 5};
        frame.landmarks[eye[5]] = Point2{p1.x + (p4.x - p1.x) / 3, p1.y + 5};
        frame.landmarks[eye[2]] = Point2{p1.x + 2 * (p4.x - p1.x) / 3, p1.y - 5};
        frame.landmarks[eye[4]] = Point2{p1.x + 2 * (p4.x - p1.x) / 3, p1.y + 5};
    };
    eye_fill(map.left_eye);
    eye_fill(map.right_eye);
    frame.gaze_left = GazeAngles{0.2, -0.1};
    frame.gaze_right = GazeAngles{0.25, -0.12};

    auto sig = frame_signals(frame, map, model);
    REQUIRE(sig.has_value());
    CHECK(sig->head_pitch == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(sig->head_yaw == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(sig->head_roll == doctest::Approx(0.02).epsilon(1e-6));
    CHECK(sig->head_distance == doctest::Approx(model.focal_length_px / 300.0).epsilon(1e-6));
    REQUIRE(sig->gaze_left.has_value());
    CHECK(sig->gaze_left->pitch_rad == doctest::Approx(0.2));
    CHECK(sig->ear_left > 0.0);
    CHECK(sig->ear_right > 0.0);
}

TEST_CASE("face model validation") {
    FaceModel3D model;
    CHECK_NOTHROW(model.validate());
    model.focal_length_px = 0.0;
    CHECK_THROWS_AS(model.validate(), InvalidSpec);
}

} // TEST_SUITE
