#include "facesig/pipeline.hpp"
#include "facesig/errors.hpp"
#include "facesig/splits.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <map>
#include <fstream>
#include <sstream>

namespace facesig {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kAllowedKeys = {
    "schema_version", "seed",
    "input.manifest", "input.format",
    "synth.enabled", "synth.subjects_low", "synth.subjects_medium", "synth.subjects_high",
    "synth.minutes_low", "synth.minutes_medium", "synth.minutes_high",
    "synth.fps", "synth.noise_sigma", "synth.dropout_rate", "synth.emit_gaze",
    "synth.preset",
    "postproc.smoothing_window", "postproc.window_s", "postproc.hop_s",
    "postproc.min_valid_fraction",
    "stats.alpha",
    "select.methods", "select.k_folds", "select.runs", "select.threshold_grid",
    "select.bts_min", "select.m_min", "select.top_fraction",
    "classify.model", "classify.sampling", "classify.trials", "classify.extend_c_grid",
    "classify.run_controls", "classify.representative_margin",
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t b = item.find_first_not_of(" \t");
        size_t e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), h, 16);
    return std::string(buf, p);
}

// stage cache: outputs are reusable when the stored key matches
bool cache_hit(const fs::path& dir, const std::string& key) {
    std::ifstream in(dir / "stage.key");
    std::string stored;
    return in && std::getline(in, stored) && stored == key;
}

void store_key(const fs::path& dir, const std::string& key) {
    std::ofstream out(dir / "stage.key");
    out << key << "\n";
}

void write_channels_csv(const std::vector<ChannelSeries>& channels, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write signals csv: " + path.string());
    out << "frame";
    for (const auto& ch : channels) out << "," << ch.name;
    out << "\n";
    if (channels.empty()) return;
    for (size_t i = 0; i < channels.front().size(); ++i) {
        bool all_valid = true;
        for (const auto& ch : channels)
            if (!ch.valid[i]) { all_valid = false; break; }
        if (!all_valid) continue;
        out << i;
        for (const auto& ch : channels) out << "," << fmt(ch.values[i]);
        out << "\n";
    }
}

} // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
    Config cfg = Config::parse_file(path);
    std::string base = fs::path(path).parent_path().string();
    if (base.empty()) base = ".";
    return from_config(cfg, base);
}

PipelineConfig PipelineConfig::from_config(const Config& cfg, const std::string& base_dir) {
    cfg.reject_unknown_keys(kAllowedKeys);
    if (cfg.get_int("schema_version", 1) != 1)
        throw ConfigError("unsupported schema_version");

    PipelineConfig pc;
    pc.raw = cfg;
    pc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));

    pc.use_synth = cfg.get_bool("synth.enabled", false);
    if (pc.use_synth) {
        pc.synth_spec = cfg.get_string("synth.preset", "default") == "weak"
                            ? CohortSpec::weak_spec()
                            : CohortSpec::default_spec();
        pc.synth_spec.n_subjects_per_level = {
            static_cast<int>(cfg.get_int("synth.subjects_low", 4)),
            static_cast<int>(cfg.get_int("synth.subjects_medium", 4)),
            static_cast<int>(cfg.get_int("synth.subjects_high", 2))};
        pc.synth_spec.minutes_per_level_subject = {cfg.get_double("synth.minutes_low", 15.0),
                                                   cfg.get_double("synth.minutes_medium", 17.0),
                                                   cfg.get_double("synth.minutes_high", 15.0)};
        pc.synth_spec.fps = cfg.get_double("synth.fps", 10.0);
        pc.synth_spec.noise_sigma = cfg.get_double("synth.noise_sigma", pc.synth_spec.noise_sigma);
        pc.synth_spec.dropout_rate = cfg.get_double("synth.dropout_rate", pc.synth_spec.dropout_rate);
        pc.synth_spec.emit_gaze = cfg.get_bool("synth.emit_gaze", true);
        pc.synth_spec.seed = pc.seed;
    } else {
        if (!cfg.has("input.manifest"))
            throw ConfigError("config needs input.manifest or synth.enabled = true");
        fs::path m = cfg.get_string("input.manifest");
        if (m.is_relative()) m = fs::path(base_dir) / m;
        pc.manifest_path = m.string();
        pc.format = recording_format_from_string(cfg.get_string("input.format", "csv"));
    }

    pc.smoothing_window = static_cast<int>(cfg.get_int("postproc.smoothing_window", 7));
    pc.slice.window_s = cfg.get_double("postproc.window_s", 120.0);
    pc.slice.hop_s = cfg.get_double("postproc.hop_s", 60.0);
    pc.slice.min_valid_fraction = cfg.get_double("postproc.min_valid_fraction", 0.8);
    pc.alpha = cfg.get_double("stats.alpha", 0.05);

    if (cfg.has("select.methods")) {
        pc.selection.methods.clear();
        for (const auto& m : split_list(cfg.get_string("select.methods")))
            pc.selection.methods.push_back(selector_method_from_string(m));
    }
    pc.selection.k_folds = static_cast<int>(cfg.get_int("select.k_folds", 10));
    pc.selection.runs = static_cast<int>(cfg.get_int("select.runs", 2));
    if (cfg.has("select.threshold_grid")) {
        pc.selection.threshold_grid.clear();
        for (const auto& t : split_list(cfg.get_string("select.threshold_grid")))
            pc.selection.threshold_grid.push_back(std::stod(t));
    }
    pc.selection.bts_min = cfg.get_double("select.bts_min", 0.5);
    pc.selection.m_min = static_cast<int>(cfg.get_int("select.m_min", 0));
    pc.selection.top_fraction = cfg.get_double("select.top_fraction", 0.10);
    pc.selection.seed = pc.seed;

    pc.model = model_kind_from_string(cfg.get_string("classify.model", "svm-linear"));
    pc.sampling = sampling_mode_from_string(cfg.get_string("classify.sampling", "none"));
    pc.trials = static_cast<int>(cfg.get_int("classify.trials", 10));
    pc.extend_c_grid = cfg.get_bool("classify.extend_c_grid", false);
    pc.run_controls = cfg.get_bool("classify.run_controls", true);
    pc.representative_margin = cfg.get_double("classify.representative_margin", 0.03);
    return pc;
}

PipelineSummary run_pipeline(const PipelineConfig& config, const std::string& run_dir) {
    PipelineSummary summary;
    summary.config_hash = config.raw.content_hash();
    summary.seed = config.seed;
    const std::string base_key = hash_hex(summary.config_hash) + ":" + hash_hex(config.seed);

    fs::path root(run_dir);
    for (const char* sub : {"signals", "features", "stats", "selection", "models", "summary"})
        fs::create_directories(root / sub);

    // --- input + low-level + features -----------------------------------
    fs::path features_csv = root / "features" / "features.csv";
    const std::string features_key = base_key + ":features";
    FeatureTable table;
    std::vector<std::string> channel_names;
    if (cache_hit(root / "features", features_key) && fs::exists(features_csv)) {
        table = FeatureTable::read_csv(features_csv.string());
        summary.skipped_stages.push_back("features");
        std::map<std::string, bool> seen;
        for (const auto& n : table.names) {
            std::string ch = n.substr(0, n.find("-d"));
            if (!seen.count(ch)) {
                seen[ch] = true;
                channel_names.push_back(ch);
            }
        }
        summary.n_recordings = -1; // unknown when served from cache
    } else {
        std::vector<Recording> cohort =
            config.use_synth ? generate_cohort(config.synth_spec)
                             : load_cohort(config.manifest_path, config.format);
        summary.n_recordings = static_cast<int>(cohort.size());

        EyeIndexMap map;
        FaceModel3D model;
        std::vector<Segment> segments;
        for (const auto& rec : cohort) {
            auto channels = extract_channels(rec, map, model, config.smoothing_window);
            if (channel_names.empty())
                for (const auto& ch : channels) channel_names.push_back(ch.name);
            write_channels_csv(channels, root / "signals" / (rec.subject_id + ".csv"));
            auto sliced = slice_segments(channels, rec.subject_id, rec.risk_label, config.slice);
            segments.insert(segments.end(), sliced.segments.begin(), sliced.segments.end());
        }
        table = featurize_all(segments, channel_names);
        table.write_csv(features_csv.string());
        store_key(root / "features", features_key);
    }
    summary.n_segments = static_cast<int>(table.rows.size());
    summary.n_features = static_cast<int>(table.n_features());

    // --- statistics ------------------------------------------------------
    const std::string stats_key = base_key + ":stats";
    StatReport stat_report;
    if (cache_hit(root / "stats", stats_key) && fs::exists(root / "stats" / "summary.json")) {
        std::ifstream in(root / "stats" / "summary.json");
        json j = json::parse(in);
        summary.n_significant = static_cast<int>(j["significant"].size());
        summary.skipped_stages.push_back("stats");
    } else {
        stat_report = run_stat_suite(table, config.alpha);
        stat_report.write_csv((root / "stats" / "report.csv").string());
        stat_report.write_json((root / "stats" / "summary.json").string());
        summary.n_significant = static_cast<int>(stat_report.significant.size());
        store_key(root / "stats", stats_key);
    }

    // --- feature selection -----------------------------------------------
    const std::string select_key = base_key + ":select";
    std::vector<std::string> selected;
    if (cache_hit(root / "selection", select_key) &&
        fs::exists(root / "selection" / "report.json")) {
        std::ifstream in(root / "selection" / "report.json");
        json j = json::parse(in);
        for (const auto& name : j["final_set"]) selected.push_back(name);
        summary.skipped_stages.push_back("selection");
    } else {
        StabilityOptions opts = config.selection;
        SelectionReport sel =
            stability_run(feature_matrix(table), feature_labels(table), table.names, opts);
        sel.write_json((root / "selection" / "report.json").string());
        sel.write_csv((root / "selection" / "report.csv").string());
        auto annotated = explain_selection(sel, table);
        std::ofstream ann(root / "selection" / "directions.csv");
        ann << "feature,mean_L,mean_M,mean_H,direction,bts\n";
        for (const auto& info : annotated)
            ann << info.name << "," << fmt(info.mean_low) << "," << fmt(info.mean_medium) << ","
                << fmt(info.mean_high) << "," << info.direction.order << "," << fmt(info.bts)
                << "\n";
        selected = sel.final_set;
        store_key(root / "selection", select_key);
    }
    summary.n_selected = static_cast<int>(selected.size());

    // --- classification: all features, then the selected subset ----------
    Dataset all = dataset_from_table(table);
    ModelSpec spec;
    spec.kind = config.model;
    spec.sampling = config.sampling;
    spec.extend_c_grid = config.extend_c_grid;

    auto all_result = run_experiment(all, spec, config.trials, config.seed);
    all_result.write_json((root / "models" / "all_features.json").string());
    summary.all_features_accuracy = all_result.avg_accuracy;
    summary.all_features_mcc = all_result.avg_mcc;

    ExperimentResult sel_result;
    if (!selected.empty()) {
        Dataset restricted = restrict_features(all, table.names, selected);
        sel_result = run_experiment(restricted, spec, config.trials, config.seed);
        sel_result.write_json((root / "models" / "selected_features.json").string());
        summary.selected_features_accuracy = sel_result.avg_accuracy;
        summary.selected_features_mcc = sel_result.avg_mcc;
        summary.selection_representative =
            summary.all_features_accuracy - summary.selected_features_accuracy <=
            config.representative_margin;
    }

    ControlResults controls;
    if (config.run_controls) {
        controls = randomization_controls(all, spec, config.trials, derive_seed(config.seed, 999));
        controls.shuffled_labels.write_json((root / "models" / "control_shuffled_labels.json").string());
        controls.shuffled_features.write_json(
            (root / "models" / "control_shuffled_features.json").string());
        summary.control_label_accuracy = controls.shuffled_labels.avg_accuracy;
        summary.control_label_mcc = controls.shuffled_labels.avg_mcc;
        summary.control_feature_accuracy = controls.shuffled_features.avg_accuracy;
        summary.control_feature_mcc = controls.shuffled_features.avg_mcc;
    }

    std::vector<std::pair<std::string, const ExperimentResult*>> blocks;
    blocks.emplace_back("all_features", &all_result);
    if (!selected.empty()) blocks.emplace_back("selected_features", &sel_result);
    if (config.run_controls) {
        blocks.emplace_back("shuffled_features", &controls.shuffled_features);
        blocks.emplace_back("shuffled_labels", &controls.shuffled_labels);
    }
    write_results_csv(blocks, (root / "models" / "results.csv").string());

    // --- run summary -------------------------------------------------------
    json j;
    j["config_hash"] = hash_hex(summary.config_hash);
    j["seed"] = summary.seed;
    j["n_segments"] = summary.n_segments;
    j["n_features"] = summary.n_features;
    j["n_significant"] = summary.n_significant;
    j["n_selected"] = summary.n_selected;
    j["all_features"] = {{"avg_accuracy", summary.all_features_accuracy},
                         {"avg_mcc", summary.all_features_mcc}};
    j["selected_features"] = {{"avg_accuracy", summary.selected_features_accuracy},
                              {"avg_mcc", summary.selected_features_mcc}};
    if (config.run_controls) {
        j["controls"] = {{"shuffled_labels_accuracy", summary.control_label_accuracy},
                         {"shuffled_labels_mcc", summary.control_label_mcc},
                         {"shuffled_features_accuracy", summary.control_feature_accuracy},
                         {"shuffled_features_mcc", summary.control_feature_mcc}};
    }
    j["selection_representative"] = summary.selection_representative;
    j["resolved_config"] = config.raw.entries();
    std::ofstream out(root / "summary" / "summary.json");
    out << j.dump(2) << "\n";

    return summary;
}

} // namespace facesig
