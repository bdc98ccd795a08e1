#ifndef FACESIG_TYPES_HPP
#define FACESIG_TYPES_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace facesig {

enum class RiskLabel { Low, Medium, High };

constexpr int kNumRiskLevels = 3;
constexpr int kNumLandmarks = 68;

const char* to_string(RiskLabel label);
RiskLabel risk_label_from_string(const std::string& s); // throws UnknownRiskLabel
char risk_label_letter(RiskLabel label);                // 'L', 'M', 'H'

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct GazeAngles {
    double pitch_rad = 0.0;
    double yaw_rad = 0.0;
};

/// One video frame's 68 landmarks plus optional per-eye gaze angles.
struct LandmarkFrame {
    std::int64_t frame_index = 0;
    double timestamp_s = 0.0;
    std::vector<Point2> landmarks;      // 68 points when valid
    std::optional<GazeAngles> gaze_left;
    std::optional<GazeAngles> gaze_right;
    bool valid = false;
};

struct Recording {
    std::string subject_id;
    RiskLabel risk_label = RiskLabel::Low;
    double fps = 0.0;
    std::vector<LandmarkFrame> frames;

    double duration_s() const {
        return fps > 0.0 ? static_cast<double>(frames.size()) / fps : 0.0;
    }
};

/// Which landmark indices feed the eye and pose computations.
/// Defaults follow the standard 68-point annotation: right eye 36-41,
/// left eye 42-47, mouth corners 48 and 54. Each eye is listed in
/// p1..p6 order with p1/p4 the outer/inner horizontal corners and
/// (p2,p6), (p3,p5) the two vertical pairs.
struct EyeIndexMap {
    std::array<int, 6> left_eye{45, 44, 43, 42, 47, 46};
    std::array<int, 6> right_eye{36, 37, 38, 39, 40, 41};
    std::array<int, 4> eye_corners{36, 39, 42, 45}; // outer R, inner R, inner L, outer L
    std::array<int, 2> mouth_corners{48, 54};

    void validate() const; // throws InvalidSpec on out-of-range or duplicate indices
};

} // namespace facesig

#endif
