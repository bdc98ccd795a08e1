#ifndef FACESIG_INGEST_HPP
#define FACESIG_INGEST_HPP

#include "facesig/config.hpp"
#include "facesig/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace facesig {

enum class RecordingFormat { Csv, Jsonl };

RecordingFormat recording_format_from_string(const std::string& s);

/// Parse one per-frame landmark stream.
///
/// CSV files start with `#subject_id=`, `#risk_label=` and `#fps=`
/// metadata lines followed by a header row; JSONL files start with a
/// header object on the first line. Rows with a wrong landmark count
/// or non-finite values become valid=false frames.
Recording parse_recording(const std::string& path, RecordingFormat format);
Recording parse_recording_stream(std::istream& in, RecordingFormat format,
                                 const std::string& origin = "<stream>");

void serialize_recording(const Recording& rec, std::ostream& out, RecordingFormat format);
void write_recording(const Recording& rec, const std::string& path, RecordingFormat format);

struct CohortSummary {
    struct LevelStats {
        int n_subjects = 0;
        double total_minutes = 0.0;
        int predicted_segments = 0;
    };
    LevelStats per_level[kNumRiskLevels];
    int total_subjects = 0;
    double total_minutes = 0.0;
    int total_predicted_segments = 0;
};

/// Per-level subject counts, durations and predicted 2-minute segment
/// counts (120 s window, 60 s hop, partial trailing windows dropped).
CohortSummary validate_cohort(const std::vector<Recording>& recordings,
                              double window_s = 120.0, double hop_s = 60.0);

/// Predicted segment count for one recording at the given window/hop.
int predicted_segments(const Recording& rec, double window_s = 120.0, double hop_s = 60.0);

/// Load every recording listed in a cohort manifest. Each `[[recording]]`
/// block needs `path`; `subject_id`, `risk_label` and `fps` override the
/// file's own metadata when present. Relative paths resolve against the
/// manifest's directory.
std::vector<Recording> load_cohort(const std::string& manifest_path,
                                   RecordingFormat format);
std::vector<Recording> load_cohort(const Config& manifest, const std::string& base_dir,
                                   RecordingFormat format);

} // namespace facesig

#endif
