#include "facesig/functionals.hpp"
#include "facesig/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace facesig {

const std::vector<std::string> kStatNames = {
    "max", "min", "range", "mean", "var", "std",
    "skew", "kurt", "npeaks", "nvalleys",
};

std::vector<double> StatBlock::as_vector() const {
    return {max, min, range, mean, variance, std_dev, skewness, kurtosis, n_peaks, n_valleys};
}

std::vector<double> derivative(const std::vector<double>& values,
                               const std::vector<bool>& valid, int order) {
    std::vector<double> cur;
    std::vector<double> out;
    auto flush_run = [&](std::vector<double>& run) {
        for (int k = 0; k < order; ++k) {
            if (run.size() < 2) { run.clear(); return; }
            std::vector<double> next(run.size() - 1);
            for (size_t i = 0; i + 1 < run.size(); ++i) next[i] = run[i + 1] - run[i];
            run = std::move(next);
        }
        out.insert(out.end(), run.begin(), run.end());
        run.clear();
    };
    for (size_t i = 0; i < values.size(); ++i) {
        if (i < valid.size() && valid[i]) {
            cur.push_back(values[i]);
        } else {
            flush_run(cur);
        }
    }
    flush_run(cur);
    if (out.empty()) throw TooShort("no valid run long enough for derivative order " +
                                    std::to_string(order));
    return out;
}

namespace {

// Count strict local extrema; a plateau counts once, judged by the
// values flanking the whole plateau.
void count_extrema(const std::vector<double>& s, double& peaks, double& valleys) {
    peaks = valleys = 0.0;
    const size_t n = s.size();
    size_t i = 1;
    while (i + 1 <= n - 1 && n >= 3) {
        size_t j = i;
        while (j + 1 < n && s[j + 1] == s[i]) ++j; // plateau [i, j]
        if (j + 1 < n) {
            if (s[i - 1] < s[i] && s[j + 1] < s[i]) peaks += 1.0;
            if (s[i - 1] > s[i] && s[j + 1] > s[i]) valleys += 1.0;
        }
        i = j + 1;
    }
}

} // namespace

StatBlock stat_block(const std::vector<double>& s) {
    if (s.empty()) throw EmptySeries("stat_block on empty series");
    StatBlock b;
    const double n = static_cast<double>(s.size());
    b.max = *std::max_element(s.begin(), s.end());
    b.min = *std::min_element(s.begin(), s.end());
    b.range = b.max - b.min;
    double sum = 0.0;
    for (double v : s) sum += v;
    b.mean = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : s) {
        double d = v - b.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    b.variance = m2;
    b.std_dev = std::sqrt(m2);
    if (m2 < 1e-12) {
        b.skewness = 0.0;
        b.kurtosis = 0.0;
    } else {
        b.skewness = m3 / std::pow(m2, 1.5);
        b.kurtosis = m4 / (m2 * m2) - 3.0;
    }
    if (s.size() >= 3) count_extrema(s, b.n_peaks, b.n_valleys);
    return b;
}

std::vector<std::string> feature_names(const std::vector<std::string>& channel_names) {
    std::vector<std::string> names;
    names.reserve(channel_names.size() * 30);
    for (const auto& ch : channel_names)
        for (int d = 0; d <= 2; ++d)
            for (const auto& stat : kStatNames)
                names.push_back(ch + "-d" + std::to_string(d) + "_" + stat);
    return names;
}

SegmentFeatures featurize(const Segment& segment) {
    SegmentFeatures out;
    out.subject_id = segment.subject_id;
    out.risk_label = segment.risk_label;
    out.segment_index = segment.segment_index;
    out.features.reserve(segment.channels.size() * 30);
    for (const auto& ch : segment.channels) {
        if (ch.n_valid() < 3) {
            out.features.insert(out.features.end(), 30, 0.0);
            out.degenerate_channels.push_back(ch.name);
            continue;
        }
        std::vector<double> d0;
        d0.reserve(ch.size());
        for (size_t i = 0; i < ch.size(); ++i)
            if (ch.valid[i]) d0.push_back(ch.values[i]);
        for (int order = 0; order <= 2; ++order) {
            std::vector<double> series;
            if (order == 0) {
                series = d0;
            } else {
                try {
                    series = derivative(ch.values, ch.valid, order);
                } catch (const TooShort&) {
                    series.clear();
                }
            }
            if (series.empty()) {
                out.features.insert(out.features.end(), 10, 0.0);
                continue;
            }
            auto block = stat_block(series).as_vector();
            out.features.insert(out.features.end(), block.begin(), block.end());
        }
    }
    return out;
}

FeatureTable featurize_all(const std::vector<Segment>& segments,
                           const std::vector<std::string>& channel_names) {
    FeatureTable table;
    table.names = feature_names(channel_names);
    table.rows.reserve(segments.size());
    for (const auto& seg : segments) table.rows.push_back(featurize(seg));
    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [](const SegmentFeatures& a, const SegmentFeatures& b) {
                         return std::tie(a.subject_id, a.segment_index) <
                                std::tie(b.subject_id, b.segment_index);
                     });
    return table;
}

namespace {
std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}
} // namespace

void FeatureTable::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write features csv: " + path);
    out << "subject_id,risk_label,segment_index";
    for (const auto& n : names) out << "," << n;
    out << "\n";
    for (const auto& row : rows) {
        out << row.subject_id << "," << to_string(row.risk_label) << "," << row.segment_index;
        for (double v : row.features) out << "," << fmt(v);
        out << "\n";
    }
}

FeatureTable FeatureTable::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open features csv: " + path);
    FeatureTable table;
    std::string line;
    if (!std::getline(in, line)) throw Error("empty features csv: " + path);
    {
        std::stringstream ss(line);
        std::string cell;
        int col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col++ >= 3) table.names.push_back(cell);
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        SegmentFeatures row;
        std::getline(ss, row.subject_id, ',');
        std::getline(ss, cell, ',');
        row.risk_label = risk_label_from_string(cell);
        std::getline(ss, cell, ',');
        row.segment_index = std::stoi(cell);
        while (std::getline(ss, cell, ',')) row.features.push_back(std::stod(cell));
        if (row.features.size() != table.names.size())
            throw Error("features csv row width mismatch in " + path);
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace facesig
