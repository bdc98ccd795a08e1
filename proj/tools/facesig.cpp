#include "facesig/classify.hpp"
#include "facesig/config.hpp"
#include "facesig/errors.hpp"
#include "facesig/functionals.hpp"
#include "facesig/ingest.hpp"
#include "facesig/pipeline.hpp"
#include "facesig/postproc.hpp"
#include "facesig/select.hpp"
#include "facesig/signals.hpp"
#include "facesig/splits.hpp"
#include "facesig/stats.hpp"
#include "facesig/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace facesig;

namespace {

std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

std::vector<Recording> load_recordings(const std::string& manifest, const std::string& format) {
    return load_cohort(manifest, recording_format_from_string(format));
}

std::vector<Segment> recordings_to_segments(const std::vector<Recording>& cohort,
                                            const SliceOptions& slice_opts, int smoothing,
                                            std::vector<std::string>& channel_names) {
    EyeIndexMap map;
    FaceModel3D model;
    std::vector<Segment> segments;
    for (const auto& rec : cohort) {
        auto channels = extract_channels(rec, map, model, smoothing);
        if (channel_names.empty())
            for (const auto& ch : channels) channel_names.push_back(ch.name);
        auto sliced = slice_segments(channels, rec.subject_id, rec.risk_label, slice_opts);
        segments.insert(segments.end(), sliced.segments.begin(), sliced.segments.end());
    }
    return segments;
}

void write_signals_csv(const std::vector<ChannelSeries>& channels, std::ostream& out) {
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

int main(int argc, char** argv) {
    CLI::App app{"facial-landmark behavior analysis pipeline"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic cohort");
    std::string synth_out = "synth_cohort";
    std::uint64_t synth_seed = 1;
    std::string synth_preset = "default";
    double synth_fps = 10.0;
    synth_cmd->add_option("--out", synth_out, "output directory");
    synth_cmd->add_option("--seed", synth_seed, "cohort seed");
    synth_cmd->add_option("--preset", synth_preset, "default or weak");
    synth_cmd->add_option("--fps", synth_fps, "frames per second");

    // ---- ingest ----
    auto* ingest_cmd = app.add_subcommand("ingest", "validate a cohort manifest");
    std::string ingest_manifest, ingest_format = "csv";
    ingest_cmd->add_option("--manifest", ingest_manifest, "cohort manifest")->required();
    ingest_cmd->add_option("--format", ingest_format, "csv or jsonl");

    // ---- signals ----
    auto* signals_cmd = app.add_subcommand("signals", "per-frame low-level signals as CSV");
    std::string sig_input, sig_format = "csv", sig_out;
    int sig_window = 7;
    signals_cmd->add_option("--input", sig_input, "recording file")->required();
    signals_cmd->add_option("--format", sig_format, "csv or jsonl");
    signals_cmd->add_option("--out", sig_out, "output CSV (default stdout)");
    signals_cmd->add_option("--smoothing-window", sig_window, "moving-average window");

    // ---- slice / featurize ----
    auto* slice_cmd = app.add_subcommand("slice", "report segment counts for a cohort");
    auto* feat_cmd = app.add_subcommand("featurize", "segment functionals as CSV");
    std::string pf_manifest, pf_format = "csv", pf_out = "features.csv";
    double pf_window = 120.0, pf_hop = 60.0, pf_min_valid = 0.8;
    int pf_smoothing = 7;
    for (auto* cmd : {slice_cmd, feat_cmd}) {
        cmd->add_option("--manifest", pf_manifest, "cohort manifest")->required();
        cmd->add_option("--format", pf_format, "csv or jsonl");
        cmd->add_option("--window-s", pf_window, "segment window seconds");
        cmd->add_option("--hop-s", pf_hop, "segment hop seconds");
        cmd->add_option("--min-valid-fraction", pf_min_valid, "segment validity threshold");
        cmd->add_option("--smoothing-window", pf_smoothing, "moving-average window");
    }
    feat_cmd->add_option("--out", pf_out, "features CSV path");

    // ---- stats ----
    auto* stats_cmd = app.add_subcommand("stats", "hypothesis-testing suite over a feature table");
    std::string stats_features, stats_out = "stats";
    double stats_alpha = 0.05;
    stats_cmd->add_option("--features", stats_features, "features CSV")->required();
    stats_cmd->add_option("--out", stats_out, "output directory");
    stats_cmd->add_option("--alpha", stats_alpha, "significance level");

    // ---- select ----
    auto* select_cmd = app.add_subcommand("select", "stability-validated feature selection");
    std::string select_features, select_out = "selection";
    int select_folds = 10, select_runs = 2, select_mmin = 0;
    double select_bts = 0.5, select_top = 0.10;
    std::uint64_t select_seed = 1;
    select_cmd->add_option("--features", select_features, "features CSV")->required();
    select_cmd->add_option("--out", select_out, "output directory");
    select_cmd->add_option("--k-folds", select_folds, "cross-validation folds");
    select_cmd->add_option("--runs", select_runs, "fold-shuffle repetitions");
    select_cmd->add_option("--bts-min", select_bts, "per-method stability threshold");
    select_cmd->add_option("--m-min", select_mmin, "methods required (0 = half)");
    select_cmd->add_option("--top-fraction", select_top, "final-set size cap fraction");
    select_cmd->add_option("--seed", select_seed, "fold seed");

    // ---- train / evaluate ----
    auto* train_cmd = app.add_subcommand("train", "run the stratified-trial experiment");
    auto* eval_cmd = app.add_subcommand("evaluate", "experiment plus randomization controls");
    std::string clf_features, clf_model = "svm-linear", clf_sampling = "none";
    std::string clf_select_json, clf_out = "experiment";
    int clf_trials = 10;
    std::uint64_t clf_seed = 1;
    bool clf_extend_c = false;
    for (auto* cmd : {train_cmd, eval_cmd}) {
        cmd->add_option("--features", clf_features, "features CSV")->required();
        cmd->add_option("--model", clf_model, "mlp, svm-linear or svm-rbf");
        cmd->add_option("--sampling", clf_sampling, "none, over or under");
        cmd->add_option("--trials", clf_trials, "stratified trials");
        cmd->add_option("--seed", clf_seed, "master seed");
        cmd->add_option("--select", clf_select_json, "selection JSON restricting features");
        cmd->add_option("--out", clf_out, "output directory");
        cmd->add_flag("--extend-c-grid", clf_extend_c, "allow C above 1 in the grid");
    }

    // ---- run / report ----
    auto* run_cmd = app.add_subcommand("run", "full pipeline from a config file");
    std::string run_config, run_out = "run_output";
    run_cmd->add_option("--config", run_config, "pipeline config")->required();
    run_cmd->add_option("--out", run_out, "run directory");

    auto* report_cmd = app.add_subcommand("report", "print a run directory's summary");
    std::string report_dir;
    report_cmd->add_option("--run", report_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth_cmd) {
            CohortSpec spec =
                synth_preset == "weak" ? CohortSpec::weak_spec() : CohortSpec::default_spec();
            spec.seed = synth_seed;
            spec.fps = synth_fps;
            auto cohort = generate_cohort(spec);
            fs::create_directories(synth_out);
            std::ofstream manifest(fs::path(synth_out) / "cohort.toml");
            manifest << "schema_version = 1\n";
            for (const auto& rec : cohort) {
                std::string name = rec.subject_id + ".csv";
                write_recording(rec, (fs::path(synth_out) / name).string(),
                                RecordingFormat::Csv);
                manifest << "\n[[recording]]\npath = \"" << name << "\"\n";
            }
            std::cout << "wrote " << cohort.size() << " recordings to " << synth_out << "\n";
        } else if (*ingest_cmd) {
            auto cohort = load_recordings(ingest_manifest, ingest_format);
            auto summary = validate_cohort(cohort);
            std::cout << "risk_level,n_subjects,total_minutes,predicted_segments\n";
            const char* names[] = {"low", "medium", "high"};
            for (int level = 0; level < kNumRiskLevels; ++level)
                std::cout << names[level] << "," << summary.per_level[level].n_subjects << ","
                          << fmt(summary.per_level[level].total_minutes) << ","
                          << summary.per_level[level].predicted_segments << "\n";
            std::cout << "total," << summary.total_subjects << "," << fmt(summary.total_minutes)
                      << "," << summary.total_predicted_segments << "\n";
        } else if (*signals_cmd) {
            Recording rec =
                parse_recording(sig_input, recording_format_from_string(sig_format));
            auto channels = extract_channels(rec, EyeIndexMap{}, FaceModel3D{}, sig_window);
            if (sig_out.empty()) {
                write_signals_csv(channels, std::cout);
            } else {
                std::ofstream out(sig_out);
                write_signals_csv(channels, out);
            }
        } else if (*slice_cmd) {
            auto cohort = load_recordings(pf_manifest, pf_format);
            SliceOptions opts{pf_window, pf_hop, pf_min_valid};
            std::vector<std::string> channel_names;
            auto segments = recordings_to_segments(cohort, opts, pf_smoothing, channel_names);
            std::map<std::string, int> per_subject;
            for (const auto& seg : segments) ++per_subject[seg.subject_id];
            std::cout << "subject_id,segments\n";
            for (const auto& [id, count] : per_subject) std::cout << id << "," << count << "\n";
            std::cout << "total," << segments.size() << "\n";
        } else if (*feat_cmd) {
            auto cohort = load_recordings(pf_manifest, pf_format);
            SliceOptions opts{pf_window, pf_hop, pf_min_valid};
            std::vector<std::string> channel_names;
            auto segments = recordings_to_segments(cohort, opts, pf_smoothing, channel_names);
            auto table = featurize_all(segments, channel_names);
            table.write_csv(pf_out);
            std::cout << "wrote " << table.rows.size() << " segments x " << table.n_features()
                      << " features to " << pf_out << "\n";
        } else if (*stats_cmd) {
            auto table = FeatureTable::read_csv(stats_features);
            auto report = run_stat_suite(table, stats_alpha);
            fs::create_directories(stats_out);
            report.write_csv((fs::path(stats_out) / "report.csv").string());
            report.write_json((fs::path(stats_out) / "summary.json").string());
            std::cout << report.significant.size() << " significant of " << report.n_tests
                      << " (corrected alpha " << fmt(report.corrected_alpha) << ")\n";
        } else if (*select_cmd) {
            auto table = FeatureTable::read_csv(select_features);
            StabilityOptions opts;
            opts.k_folds = select_folds;
            opts.runs = select_runs;
            opts.bts_min = select_bts;
            opts.m_min = select_mmin;
            opts.top_fraction = select_top;
            opts.seed = select_seed;
            auto report = stability_run(feature_matrix(table), feature_labels(table),
                                        table.names, opts);
            fs::create_directories(select_out);
            report.write_json((fs::path(select_out) / "report.json").string());
            report.write_csv((fs::path(select_out) / "report.csv").string());
            std::cout << "selected " << report.final_set.size() << " features (cap "
                      << report.cap << ")\n";
            for (const auto& name : report.final_set) std::cout << "  " << name << "\n";
        } else if (*train_cmd || *eval_cmd) {
            auto table = FeatureTable::read_csv(clf_features);
            Dataset data = dataset_from_table(table);
            if (!clf_select_json.empty()) {
                std::ifstream in(clf_select_json);
                if (!in) throw Error("cannot open selection json: " + clf_select_json);
                auto j = nlohmann::json::parse(in);
                std::vector<std::string> keep = j.at("final_set");
                data = restrict_features(data, table.names, keep);
            }
            ModelSpec spec;
            spec.kind = model_kind_from_string(clf_model);
            spec.sampling = sampling_mode_from_string(clf_sampling);
            spec.extend_c_grid = clf_extend_c;
            fs::create_directories(clf_out);
            auto result = run_experiment(data, spec, clf_trials, clf_seed);
            result.write_json((fs::path(clf_out) / "experiment.json").string());
            std::vector<std::pair<std::string, const ExperimentResult*>> blocks;
            blocks.emplace_back("experiment", &result);
            ControlResults controls;
            if (*eval_cmd) {
                controls = randomization_controls(data, spec, clf_trials,
                                                  derive_seed(clf_seed, 999));
                controls.shuffled_labels.write_json(
                    (fs::path(clf_out) / "control_shuffled_labels.json").string());
                controls.shuffled_features.write_json(
                    (fs::path(clf_out) / "control_shuffled_features.json").string());
                blocks.emplace_back("shuffled_features", &controls.shuffled_features);
                blocks.emplace_back("shuffled_labels", &controls.shuffled_labels);
            }
            write_results_csv(blocks, (fs::path(clf_out) / "results.csv").string());
            std::cout << "avg accuracy " << fmt(result.avg_accuracy) << ", std "
                      << fmt(result.std_accuracy) << ", avg MCC " << fmt(result.avg_mcc) << "\n";
        } else if (*run_cmd) {
            auto config = PipelineConfig::load(run_config);
            auto summary = run_pipeline(config, run_out);
            std::cout << "segments: " << summary.n_segments
                      << ", significant: " << summary.n_significant
                      << ", selected: " << summary.n_selected << "\n";
            std::cout << "all-features accuracy " << fmt(summary.all_features_accuracy)
                      << ", selected " << fmt(summary.selected_features_accuracy) << "\n";
            std::cout << "run directory: " << run_out << "\n";
        } else if (*report_cmd) {
            std::ifstream in(fs::path(report_dir) / "summary" / "summary.json");
            if (!in) throw Error("no summary.json under " + report_dir);
            std::cout << in.rdbuf();
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
