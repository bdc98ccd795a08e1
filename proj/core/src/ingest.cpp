#include "facesig/ingest.hpp"
#include "facesig/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace facesig {

using nlohmann::json;

const char* to_string(RiskLabel label) {
    switch (label) {
        case RiskLabel::Low: return "low";
        case RiskLabel::Medium: return "medium";
        case RiskLabel::High: return "high";
    }
    return "?";
}

RiskLabel risk_label_from_string(const std::string& s) {
    std::string v = s;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "low" || v == "l") return RiskLabel::Low;
    if (v == "medium" || v == "m") return RiskLabel::Medium;
    if (v == "high" || v == "h") return RiskLabel::High;
    throw UnknownRiskLabel("unknown risk label: " + s);
}

char risk_label_letter(RiskLabel label) {
    switch (label) {
        case RiskLabel::Low: return 'L';
        case RiskLabel::Medium: return 'M';
        case RiskLabel::High: return 'H';
    }
    return '?';
}

void EyeIndexMap::validate() const {
    auto check_group = [](const auto& group, const char* name) {
        for (size_t i = 0; i < group.size(); ++i) {
            if (group[i] < 0 || group[i] >= kNumLandmarks)
                throw InvalidSpec(std::string(name) + ": landmark index out of range");
            for (size_t j = i + 1; j < group.size(); ++j)
                if (group[i] == group[j])
                    throw InvalidSpec(std::string(name) + ": duplicate landmark index");
        }
    };
    check_group(left_eye, "left_eye");
    check_group(right_eye, "right_eye");
    check_group(eye_corners, "eye_corners");
    check_group(mouth_corners, "mouth_corners");
}

RecordingFormat recording_format_from_string(const std::string& s) {
    if (s == "csv") return RecordingFormat::Csv;
    if (s == "jsonl") return RecordingFormat::Jsonl;
    throw ConfigError("unknown recording format: " + s);
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

struct HeaderMeta {
    std::string subject_id;
    std::string risk_label;
    double fps = -1.0;
    bool has_subject = false, has_label = false, has_fps = false;
};

void apply_meta_line(HeaderMeta& meta, const std::string& key, const std::string& value) {
    if (key == "subject_id") {
        meta.subject_id = value;
        meta.has_subject = true;
    } else if (key == "risk_label") {
        meta.risk_label = value;
        meta.has_label = true;
    } else if (key == "fps") {
        if (!parse_double(value, meta.fps)) throw MissingHeaderField("fps is not a number: " + value);
        meta.has_fps = true;
    }
}

void require_meta(const HeaderMeta& meta, const std::string& origin) {
    if (!meta.has_subject) throw MissingHeaderField(origin + ": header missing subject_id");
    if (!meta.has_label) throw MissingHeaderField(origin + ": header missing risk_label");
    if (!meta.has_fps) throw MissingHeaderField(origin + ": header missing fps");
    if (meta.fps <= 0.0) throw MissingHeaderField(origin + ": fps must be positive");
}

bool all_finite(const LandmarkFrame& f) {
    for (const auto& p : f.landmarks)
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
    auto gaze_ok = [](const std::optional<GazeAngles>& g) {
        return !g || (std::isfinite(g->pitch_rad) && std::isfinite(g->yaw_rad));
    };
    return gaze_ok(f.gaze_left) && gaze_ok(f.gaze_right);
}

Recording parse_csv(std::istream& in, const std::string& origin) {
    HeaderMeta meta;
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            size_t eq = line.find('=');
            if (eq != std::string::npos)
                apply_meta_line(meta, line.substr(1, eq - 1), line.substr(eq + 1));
            continue;
        }
        header = split_csv_line(line);
        break;
    }
    require_meta(meta, origin);
    if (header.empty()) throw MissingHeaderField(origin + ": missing CSV header row");

    Recording rec;
    rec.subject_id = meta.subject_id;
    rec.risk_label = risk_label_from_string(meta.risk_label);
    rec.fps = meta.fps;

    // column layout: frame_index, timestamp_s, x0..y67, optional gaze columns
    bool has_gaze = std::find(header.begin(), header.end(), "gazeL_pitch") != header.end();
    const size_t base_cols = 2 + 2 * kNumLandmarks;
    const size_t expect_cols = base_cols + (has_gaze ? 4 : 0);

    std::int64_t prev_index = -1;
    double prev_ts = -1.0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_csv_line(line);
        LandmarkFrame frame;
        double fi = 0.0;
        if (cells.size() < 2 || !parse_double(cells[0], fi) || !parse_double(cells[1], frame.timestamp_s))
            throw MissingHeaderField(origin + ": malformed frame row");
        frame.frame_index = static_cast<std::int64_t>(fi);
        if (frame.frame_index <= prev_index)
            throw NonMonotonicFrameIndex(origin + ": frame_index not strictly increasing at " +
                                         std::to_string(frame.frame_index));
        if (frame.timestamp_s < prev_ts)
            throw NonMonotonicFrameIndex(origin + ": timestamps decrease at frame " +
                                         std::to_string(frame.frame_index));
        prev_index = frame.frame_index;
        prev_ts = frame.timestamp_s;

        frame.valid = cells.size() == expect_cols;
        if (frame.valid) {
            frame.landmarks.resize(kNumLandmarks);
            for (int i = 0; i < kNumLandmarks && frame.valid; ++i) {
                frame.valid = parse_double(cells[2 + 2 * i], frame.landmarks[i].x) &&
                              parse_double(cells[3 + 2 * i], frame.landmarks[i].y);
            }
            if (frame.valid && has_gaze) {
                GazeAngles gl, gr;
                frame.valid = parse_double(cells[base_cols + 0], gl.pitch_rad) &&
                              parse_double(cells[base_cols + 1], gl.yaw_rad) &&
                              parse_double(cells[base_cols + 2], gr.pitch_rad) &&
                              parse_double(cells[base_cols + 3], gr.yaw_rad);
                frame.gaze_left = gl;
                frame.gaze_right = gr;
            }
            if (frame.valid) frame.valid = all_finite(frame);
        }
        if (!frame.valid) {
            frame.landmarks.clear();
            frame.gaze_left.reset();
            frame.gaze_right.reset();
        }
        rec.frames.push_back(std::move(frame));
    }
    return rec;
}

Recording parse_jsonl(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) throw MissingHeaderField(origin + ": empty JSONL file");
    json hdr = json::parse(line);
    HeaderMeta meta;
    if (hdr.contains("subject_id")) { meta.subject_id = hdr["subject_id"]; meta.has_subject = true; }
    if (hdr.contains("risk_label")) { meta.risk_label = hdr["risk_label"]; meta.has_label = true; }
    if (hdr.contains("fps")) { meta.fps = hdr["fps"]; meta.has_fps = true; }
    require_meta(meta, origin);

    Recording rec;
    rec.subject_id = meta.subject_id;
    rec.risk_label = risk_label_from_string(meta.risk_label);
    rec.fps = meta.fps;

    std::int64_t prev_index = -1;
    double prev_ts = -1.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json row = json::parse(line);
        LandmarkFrame frame;
        frame.frame_index = row.at("frame_index");
        frame.timestamp_s = row.at("timestamp_s");
        if (frame.frame_index <= prev_index)
            throw NonMonotonicFrameIndex(origin + ": frame_index not strictly increasing");
        if (frame.timestamp_s < prev_ts)
            throw NonMonotonicFrameIndex(origin + ": timestamps decrease");
        prev_index = frame.frame_index;
        prev_ts = frame.timestamp_s;

        frame.valid = row.contains("landmarks") && row["landmarks"].is_array() &&
                      row["landmarks"].size() == 2 * kNumLandmarks;
        if (frame.valid) {
            frame.landmarks.resize(kNumLandmarks);
            for (int i = 0; i < kNumLandmarks; ++i) {
                frame.landmarks[i].x = row["landmarks"][2 * i];
                frame.landmarks[i].y = row["landmarks"][2 * i + 1];
            }
            if (row.contains("gaze_left")) {
                frame.gaze_left = GazeAngles{row["gaze_left"][0], row["gaze_left"][1]};
                frame.gaze_right = GazeAngles{row["gaze_right"][0], row["gaze_right"][1]};
            }
            frame.valid = all_finite(frame);
        }
        if (!frame.valid) {
            frame.landmarks.clear();
            frame.gaze_left.reset();
            frame.gaze_right.reset();
        }
        rec.frames.push_back(std::move(frame));
    }
    return rec;
}

} // namespace

Recording parse_recording_stream(std::istream& in, RecordingFormat format, const std::string& origin) {
    return format == RecordingFormat::Csv ? parse_csv(in, origin) : parse_jsonl(in, origin);
}

Recording parse_recording(const std::string& path, RecordingFormat format) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open recording: " + path);
    return parse_recording_stream(in, format, path);
}

void serialize_recording(const Recording& rec, std::ostream& out, RecordingFormat format) {
    bool has_gaze = std::any_of(rec.frames.begin(), rec.frames.end(),
                                [](const LandmarkFrame& f) { return f.gaze_left.has_value(); });
    if (format == RecordingFormat::Csv) {
        out << "#subject_id=" << rec.subject_id << "\n";
        out << "#risk_label=" << to_string(rec.risk_label) << "\n";
        out << "#fps=" << format_double(rec.fps) << "\n";
        out << "frame_index,timestamp_s";
        for (int i = 0; i < kNumLandmarks; ++i) out << ",x" << i << ",y" << i;
        if (has_gaze) out << ",gazeL_pitch,gazeL_yaw,gazeR_pitch,gazeR_yaw";
        out << "\n";
        for (const auto& f : rec.frames) {
            out << f.frame_index << "," << format_double(f.timestamp_s);
            if (f.valid) {
                for (const auto& p : f.landmarks)
                    out << "," << format_double(p.x) << "," << format_double(p.y);
                if (has_gaze && f.gaze_left && f.gaze_right) {
                    out << "," << format_double(f.gaze_left->pitch_rad)
                        << "," << format_double(f.gaze_left->yaw_rad)
                        << "," << format_double(f.gaze_right->pitch_rad)
                        << "," << format_double(f.gaze_right->yaw_rad);
                }
            }
            out << "\n";
        }
    } else {
        json hdr{{"subject_id", rec.subject_id},
                 {"risk_label", to_string(rec.risk_label)},
                 {"fps", rec.fps}};
        out << hdr.dump() << "\n";
        for (const auto& f : rec.frames) {
            json row{{"frame_index", f.frame_index}, {"timestamp_s", f.timestamp_s}};
            if (f.valid) {
                json lm = json::array();
                for (const auto& p : f.landmarks) {
                    lm.push_back(p.x);
                    lm.push_back(p.y);
                }
                row["landmarks"] = std::move(lm);
                if (f.gaze_left && f.gaze_right) {
                    row["gaze_left"] = {f.gaze_left->pitch_rad, f.gaze_left->yaw_rad};
                    row["gaze_right"] = {f.gaze_right->pitch_rad, f.gaze_right->yaw_rad};
                }
            }
            out << row.dump() << "\n";
        }
    }
}

void write_recording(const Recording& rec, const std::string& path, RecordingFormat format) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write recording: " + path);
    serialize_recording(rec, out, format);
}

int predicted_segments(const Recording& rec, double window_s, double hop_s) {
    auto window = static_cast<std::int64_t>(std::llround(rec.fps * window_s));
    auto hop = static_cast<std::int64_t>(std::llround(rec.fps * hop_s));
    auto n = static_cast<std::int64_t>(rec.frames.size());
    if (window <= 0 || hop <= 0 || n < window) return 0;
    return static_cast<int>((n - window) / hop + 1);
}

CohortSummary validate_cohort(const std::vector<Recording>& recordings,
                              double window_s, double hop_s) {
    if (recordings.empty()) throw EmptyCohort("cohort is empty");
    CohortSummary summary;
    std::array<std::vector<std::string>, kNumRiskLevels> subjects;
    for (const auto& rec : recordings) {
        auto level = static_cast<int>(rec.risk_label);
        auto& ids = subjects[level];
        if (std::find(ids.begin(), ids.end(), rec.subject_id) == ids.end())
            ids.push_back(rec.subject_id);
        double minutes = rec.duration_s() / 60.0;
        summary.per_level[level].total_minutes += minutes;
        summary.per_level[level].predicted_segments += predicted_segments(rec, window_s, hop_s);
    }
    for (int level = 0; level < kNumRiskLevels; ++level) {
        summary.per_level[level].n_subjects = static_cast<int>(subjects[level].size());
        summary.total_subjects += summary.per_level[level].n_subjects;
        summary.total_minutes += summary.per_level[level].total_minutes;
        summary.total_predicted_segments += summary.per_level[level].predicted_segments;
    }
    return summary;
}

std::vector<Recording> load_cohort(const Config& manifest, const std::string& base_dir,
                                   RecordingFormat format) {
    const auto& rows = manifest.tables("recording");
    if (rows.empty()) throw EmptyCohort("manifest lists no recordings");
    std::vector<Recording> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        auto it = row.find("path");
        if (it == row.end()) throw ConfigError("manifest [[recording]] missing path");
        std::filesystem::path p = it->second;
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        Recording rec = parse_recording(p.string(), format);
        if (auto s = row.find("subject_id"); s != row.end()) rec.subject_id = s->second;
        if (auto l = row.find("risk_label"); l != row.end())
            rec.risk_label = risk_label_from_string(l->second);
        if (auto f = row.find("fps"); f != row.end()) rec.fps = std::stod(f->second);
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<Recording> load_cohort(const std::string& manifest_path, RecordingFormat format) {
    Config manifest = Config::parse_file(manifest_path);
    std::string base = std::filesystem::path(manifest_path).parent_path().string();
    if (base.empty()) base = ".";
    return load_cohort(manifest, base, format);
}

} // namespace facesig
