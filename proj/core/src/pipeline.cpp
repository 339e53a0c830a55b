#include "spamdet/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <utility>

#include "json.hpp"

#include "internal/io_util.hpp"
#include "spamdet/errors.hpp"
#include "spamdet/parallel.hpp"

namespace spamdet {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::string require_artifact(const std::string& path, const char* produced_by) {
    try {
        return detail::read_file(path);
    } catch (const DataError&) {
        throw DataError("missing artifact " + path + "; run '" + produced_by + "' first");
    }
}

std::optional<std::string> try_read(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) return std::nullopt;
    probe.close();
    return detail::read_file(path);
}

ordered_json parse_artifact(const std::string& text, const std::string& path) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw DataError(path + ": invalid JSON artifact");
    return j;
}

void check_digest(const std::string& found, const PipelineConfig& config,
                  const std::string& artifact) {
    if (found != config.digest())
        throw DataError(artifact + ": written under config digest " + found +
                        " but the current config digests to " + config.digest() +
                        "; re-run the earlier stages");
}

ordered_json stats_json(const CorpusStats& s) {
    return {{"total_read", s.total_read},
            {"kept", s.kept},
            {"dropped_null", s.dropped_null},
            {"dropped_duplicate", s.dropped_duplicate},
            {"dropped_malformed", s.dropped_malformed}};
}

std::string record_line(const ReviewRecord& r) {
    ordered_json j;
    j["reviewerID"] = r.reviewer_id;
    j["asin"] = r.product_id;
    j["reviewText"] = r.review_text;
    j["summary"] = r.summary;
    j["overall"] = r.rating;
    j["helpful"] = {r.helpful_votes, r.total_votes};
    j["unixReviewTime"] = r.unix_review_time;
    j["class"] = r.label;
    return j.dump();
}

void write_corpus(const std::string& path, std::span<const ReviewRecord> records) {
    std::string out;
    out.reserve(records.size() * 160);
    for (const auto& r : records) {
        out += record_line(r);
        out += '\n';
    }
    detail::write_file(path, out);
}

/// Reads stats.json, validating the embedded digest. Gate for every stage that
/// consumes prepare outputs.
ordered_json read_stats_artifact(const PipelineConfig& config) {
    const std::string path = join_path(config.output_dir, artifacts::stats);
    ordered_json j = parse_artifact(require_artifact(path, "prepare"), path);
    check_digest(j.value("config_digest", ""), config, path);
    return j;
}

std::vector<ReviewRecord> load_artifact_corpus(const PipelineConfig& config, const char* name,
                                               unsigned workers) {
    const std::string path = join_path(config.output_dir, name);
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw DataError("missing artifact " + path + "; run 'prepare' first");
    probe.close();
    return load_corpus(path, ErrorPolicy::abort, workers).first;
}

/// Keeps only `selected` columns (ascending) of a full-space matrix, renumbering
/// indices to the compact space.
FeatureMatrix project_matrix(FeatureMatrix full, const std::vector<std::uint32_t>& selected) {
    FeatureMatrix out;
    out.labels = std::move(full.labels);
    out.column_names.reserve(selected.size());
    for (std::uint32_t c : selected) out.column_names.push_back(std::move(full.column_names[c]));
    out.rows.resize(full.rows.size());
    const auto dim = static_cast<std::uint32_t>(selected.size());
    for (std::size_t i = 0; i < full.rows.size(); ++i) {
        SparseVector row;
        row.dimension = dim;
        auto sel = selected.begin();
        std::uint32_t new_index = 0;
        for (const auto& e : full.rows[i].entries) {
            while (sel != selected.end() && *sel < e.index) {
                ++sel;
                ++new_index;
            }
            if (sel == selected.end()) break;
            if (*sel == e.index) row.entries.push_back({new_index, e.value});
        }
        out.rows[i] = std::move(row);
    }
    return out;
}

struct RecordFeatures {
    std::vector<TokenSeq> docs;
    std::vector<BehavioralFeatures> behavioral;
    std::vector<int> labels;
};

/// One tokenization pass per record feeds both the TF-IDF document and the
/// length-based behavioral columns.
RecordFeatures featurize_records(std::span<const ReviewRecord> records,
                                 const ReviewerCounts& counts, unsigned workers) {
    RecordFeatures out;
    const std::size_t n = records.size();
    out.docs.resize(n);
    out.behavioral.resize(n);
    out.labels.resize(n);
    const auto& stoplist = default_stopwords();
    parallel_for_each(
        n, workers,
        [&](std::size_t i) {
            const ReviewRecord& r = records[i];
            TokenSeq text = tokenize(r.review_text);
            TokenSeq summary = tokenize(r.summary);
            BehavioralFeatures b;
            b.review_length = static_cast<std::uint32_t>(text.size());
            b.summary_length = static_cast<std::uint32_t>(summary.size());
            b.helpfulness_ratio = r.total_votes == 0
                                      ? 0.0
                                      : static_cast<double>(r.helpful_votes) /
                                            static_cast<double>(r.total_votes);
            const auto it = counts.find(r.reviewer_id);
            b.reviewer_frequency = it == counts.end() ? 0 : it->second;
            text.insert(text.end(), std::make_move_iterator(summary.begin()),
                        std::make_move_iterator(summary.end()));
            out.docs[i] = remove_stopwords(text, stoplist);
            out.behavioral[i] = b;
            out.labels[i] = r.label;
        },
        64);
    return out;
}

std::vector<SparseVector> transform_all(const std::vector<TokenSeq>& docs, const TfIdfModel& model,
                                        unsigned workers) {
    std::vector<SparseVector> out(docs.size());
    parallel_for_each(
        docs.size(), workers, [&](std::size_t i) { out[i] = transform(docs[i], model); }, 64);
    return out;
}

TrainedModel train_one(const ModelSpec& m, const FeatureMatrix& matrix, unsigned workers) {
    if (m.name == "lr") return train_logistic(matrix, m.train);
    if (m.name == "svm") return train_linear_svm(matrix, m.train);
    if (m.name == "dt") return train_decision_tree(matrix, m.train, workers);
    if (m.name == "rf") return train_random_forest(matrix, m.train, workers);
    if (m.name == "gb") return train_gradient_boosting(matrix, m.train, nullptr, workers);
    throw UsageError("unknown model name '" + m.name + "'");
}

} // namespace

namespace artifacts {
std::string model_file(const std::string& name) { return "model_" + name + ".json"; }
std::string metrics_file(const std::string& name) { return "metrics_" + name + ".json"; }
} // namespace artifacts

TokenSeq document_tokens(const ReviewRecord& record) {
    TokenSeq tokens = tokenize(record.review_text);
    TokenSeq summary = tokenize(record.summary);
    tokens.insert(tokens.end(), std::make_move_iterator(summary.begin()),
                  std::make_move_iterator(summary.end()));
    return tokens;
}

std::string FeatureSpace::to_json(const std::string& config_digest) const {
    ordered_json j;
    j["schema_version"] = 1;
    j["kind"] = "feature_space";
    j["config_digest"] = config_digest;
    j["tfidf"] = ordered_json::parse(tfidf.to_json());
    j["scaler"] = {{"min", scaler.min}, {"max", scaler.max}};
    std::vector<std::pair<std::string_view, std::uint32_t>> sorted_counts(
        reviewer_counts.begin(), reviewer_counts.end());
    std::sort(sorted_counts.begin(), sorted_counts.end());
    ordered_json rc = ordered_json::object();
    for (const auto& [id, count] : sorted_counts) rc[std::string(id)] = count;
    j["reviewer_counts"] = std::move(rc);
    if (selected)
        j["selected"] = *selected;
    else
        j["selected"] = nullptr;
    return j.dump();
}

FeatureSpace FeatureSpace::from_json(std::string_view text, std::string* config_digest) {
    const ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw DataError("feature space: invalid JSON");
    try {
        if (j.at("schema_version").get<int>() != 1)
            throw DataError("feature space: unsupported schema version");
        if (j.at("kind").get<std::string>() != "feature_space")
            throw DataError("feature space: wrong artifact kind");
        if (config_digest) *config_digest = j.at("config_digest").get<std::string>();
        FeatureSpace space;
        space.tfidf = TfIdfModel::from_json(j.at("tfidf").dump());
        const auto& scaler = j.at("scaler");
        const auto mins = scaler.at("min").get<std::vector<double>>();
        const auto maxs = scaler.at("max").get<std::vector<double>>();
        if (mins.size() != 4 || maxs.size() != 4)
            throw DataError("feature space: scaler must carry 4 bounds");
        std::copy(mins.begin(), mins.end(), space.scaler.min.begin());
        std::copy(maxs.begin(), maxs.end(), space.scaler.max.begin());
        for (const auto& [id, count] : j.at("reviewer_counts").items())
            space.reviewer_counts[id] = count.get<std::uint32_t>();
        if (!j.at("selected").is_null())
            space.selected = j.at("selected").get<std::vector<std::uint32_t>>();
        space.column_names.assign(space.tfidf.vocabulary.terms.begin(),
                                  space.tfidf.vocabulary.terms.end());
        for (const char* b : kBehavioralNames) space.column_names.emplace_back(b);
        return space;
    } catch (const ordered_json::exception& ex) {
        throw DataError(std::string("feature space: ") + ex.what());
    }
}

FittedFeatures fit_features(std::span<const ReviewRecord> train, const PipelineConfig& config,
                            unsigned workers) {
    if (train.empty()) throw DataError("cannot fit features on an empty training split");

    ReviewerCounts counts = count_reviewers(train);
    RecordFeatures rec = featurize_records(train, counts, workers);

    FittedFeatures out;
    out.space.tfidf =
        fit_idf(build_vocabulary(rec.docs, config.vocab_max_terms, config.vocab_min_df, workers));
    out.space.reviewer_counts = std::move(counts);
    out.space.scaler = BehavioralScaler::fit(rec.behavioral);

    std::vector<SparseVector> text_vectors = transform_all(rec.docs, out.space.tfidf, workers);
    FeatureMatrix full =
        assemble_matrix(std::move(text_vectors), out.space.tfidf.vocabulary.terms, rec.behavioral,
                        out.space.scaler, rec.labels);
    out.space.column_names = full.column_names;
    out.scores = chi_square_scores(full, workers);

    const std::uint32_t text_dim = out.space.tfidf.vocabulary.size();
    const std::vector<ChiSquareScore> text_scores(out.scores.begin(),
                                                  out.scores.begin() + text_dim);
    std::vector<std::uint32_t> selected = select_top_k(text_scores, config.selection_k);
    for (std::uint32_t b = 0; b < kBehavioralNames.size(); ++b)
        selected.push_back(text_dim + b);  // behavioral columns always survive selection
    out.space.selected = std::move(selected);
    out.train_matrix = project_matrix(std::move(full), *out.space.selected);
    return out;
}

FeatureMatrix apply_features(std::span<const ReviewRecord> records, const FeatureSpace& space,
                             unsigned workers) {
    RecordFeatures rec = featurize_records(records, space.reviewer_counts, workers);
    std::vector<SparseVector> text_vectors = transform_all(rec.docs, space.tfidf, workers);
    return assemble_matrix(std::move(text_vectors), space.tfidf.vocabulary.terms, rec.behavioral,
                           space.scaler, rec.labels, space.selected);
}

PrepareResult run_prepare(const PipelineConfig& config) {
    config.validate();
    if (config.input_path.empty()) throw UsageError("config: input_path is required for prepare");
    const unsigned workers = effective_workers(config.worker_count);
    try {
        fs::create_directories(config.output_dir);
    } catch (const fs::filesystem_error& e) {
        throw DataError("cannot create output directory " + config.output_dir + ": " + e.what());
    }

    auto [records, load_stats] = load_corpus(config.input_path, config.on_error, workers);
    auto [cleaned, clean_stats] = clean(std::move(records));
    if (cleaned.empty()) throw DataError("no records survived cleaning");
    auto [train, test] = split(cleaned, config.split_spec());

    write_corpus(join_path(config.output_dir, artifacts::train_corpus), train);
    write_corpus(join_path(config.output_dir, artifacts::test_corpus), test);

    ordered_json j;
    j["schema_version"] = 1;
    j["config_digest"] = config.digest();
    j["load"] = stats_json(load_stats);
    j["clean"] = stats_json(clean_stats);
    j["split"] = {{"train", train.size()}, {"test", test.size()}};
    detail::write_file(join_path(config.output_dir, artifacts::stats), j.dump(2) + "\n");

    return {load_stats, clean_stats, train.size(), test.size()};
}

bool TrainResult::all_ok() const {
    return std::all_of(models.begin(), models.end(),
                       [](const ModelStatus& s) { return s.ok; });
}

TrainResult run_train(const PipelineConfig& config) {
    config.validate();
    const unsigned workers = effective_workers(config.worker_count);
    const std::string digest = config.digest();
    read_stats_artifact(config);

    const auto train = load_artifact_corpus(config, artifacts::train_corpus, workers);
    FittedFeatures ff = fit_features(train, config, workers);

    detail::write_file(join_path(config.output_dir, artifacts::tfidf_model),
                       ff.space.tfidf.to_json());
    detail::write_file(join_path(config.output_dir, artifacts::feature_space),
                       ff.space.to_json(digest));

    std::vector<ChiSquareScore> ranked = ff.scores;
    std::sort(ranked.begin(), ranked.end(), [](const ChiSquareScore& a, const ChiSquareScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.column < b.column;
    });
    std::string csv = "column,name,score\n";
    for (const auto& s : ranked) {
        csv += std::to_string(s.column);
        csv += ',';
        csv += ff.space.column_names[s.column];
        csv += ',';
        csv += detail::format_fixed(s.score, 6);
        csv += '\n';
    }
    detail::write_file(join_path(config.output_dir, artifacts::chi_square), csv);

    TrainResult result;
    result.vocabulary_size = ff.space.tfidf.vocabulary.size();
    result.selected_columns = ff.train_matrix.dimension();
    for (const auto& m : config.models) {
        try {
            TrainedModel model = train_one(m, ff.train_matrix, workers);
            model.threshold = config.threshold;
            detail::write_file(join_path(config.output_dir, artifacts::model_file(m.name)),
                               model.to_json({{"name", m.name}, {"config_digest", digest}}));
            result.models.push_back({m.name, true, {}});
        } catch (const TrainError& e) {
            result.models.push_back({m.name, false, e.what()});
        }
    }
    return result;
}

EvaluateResult run_evaluate(const PipelineConfig& config) {
    config.validate();
    const unsigned workers = effective_workers(config.worker_count);
    const std::string digest = config.digest();
    read_stats_artifact(config);

    const auto test = load_artifact_corpus(config, artifacts::test_corpus, workers);
    const std::string space_path = join_path(config.output_dir, artifacts::feature_space);
    std::string space_digest;
    const FeatureSpace space =
        FeatureSpace::from_json(require_artifact(space_path, "train"), &space_digest);
    check_digest(space_digest, config, space_path);
    const FeatureMatrix matrix = apply_features(test, space, workers);

    std::vector<MetricsReport> reports;
    for (const auto& m : config.models) {
        const std::string model_path = join_path(config.output_dir, artifacts::model_file(m.name));
        std::vector<std::pair<std::string, std::string>> meta;
        const TrainedModel model =
            TrainedModel::from_json(require_artifact(model_path, "train"), &meta);
        std::string model_digest;
        for (const auto& [key, value] : meta)
            if (key == "config_digest") model_digest = value;
        check_digest(model_digest, config, model_path);
        if (model.dimension != matrix.dimension())
            throw DataError("model '" + m.name + "' expects dimension " +
                            std::to_string(model.dimension) + " but the test features have " +
                            std::to_string(matrix.dimension()) + "; re-run train");

        std::vector<double> predictions(matrix.n_rows());
        parallel_for_each(
            matrix.n_rows(), workers,
            [&](std::size_t i) { predictions[i] = model.predict(matrix.rows[i]); }, 64);
        const ConfusionMatrix cm = confusion(predictions, matrix.labels, config.threshold);
        MetricsReport report = metrics(cm, m.name);

        ordered_json j;
        j["schema_version"] = 1;
        j["config_digest"] = digest;
        j["report"] = ordered_json::parse(report.to_json());
        detail::write_file(join_path(config.output_dir, artifacts::metrics_file(m.name)),
                           j.dump(2) + "\n");
        reports.push_back(std::move(report));
    }

    EvaluateResult result{compare_models(std::move(reports))};
    detail::write_file(join_path(config.output_dir, artifacts::comparison),
                       result.table.to_csv());
    return result;
}

AnalyzeResult run_analyze(const PipelineConfig& config) {
    config.validate();
    const unsigned workers = effective_workers(config.worker_count);
    read_stats_artifact(config);

    std::vector<ReviewRecord> all = load_artifact_corpus(config, artifacts::train_corpus, workers);
    {
        auto test = load_artifact_corpus(config, artifacts::test_corpus, workers);
        all.insert(all.end(), std::make_move_iterator(test.begin()),
                   std::make_move_iterator(test.end()));
    }

    AnalyzeResult result;
    result.series = monthly_series(all);
    result.segments = segment_reviewers(all, config.segment_a, config.segment_b);

    const ReviewerCounts counts = count_reviewers(all);
    const std::size_t n = all.size();
    std::vector<std::vector<double>> variables(6, std::vector<double>(n));
    parallel_for_each(
        n, workers,
        [&](std::size_t i) {
            const ReviewRecord& r = all[i];
            variables[0][i] = static_cast<double>(r.label);
            variables[1][i] = static_cast<double>(r.rating);
            variables[2][i] = static_cast<double>(tokenize(r.review_text).size());
            variables[3][i] = static_cast<double>(tokenize(r.summary).size());
            variables[4][i] = r.total_votes == 0 ? 0.0
                                                 : static_cast<double>(r.helpful_votes) /
                                                       static_cast<double>(r.total_votes);
            variables[5][i] = static_cast<double>(counts.at(r.reviewer_id));
        },
        64);
    const std::vector<std::string> names = {"class",          "rating",
                                            "review_length",  "summary_length",
                                            "helpfulness_ratio", "reviewer_frequency"};
    result.correlation = pearson_correlation_matrix(names, variables, workers);

    detail::write_file(join_path(config.output_dir, artifacts::time_series),
                       time_series_to_csv(result.series));
    detail::write_file(join_path(config.output_dir, artifacts::segments),
                       segments_to_csv(result.segments));
    detail::write_file(join_path(config.output_dir, artifacts::correlation),
                       result.correlation.to_csv());
    return result;
}

std::string run_report(const PipelineConfig& config) {
    config.validate();
    const std::string digest = config.digest();

    ordered_json j;
    j["schema_version"] = 1;
    j["config_digest"] = digest;

    if (auto stats = try_read(join_path(config.output_dir, artifacts::stats))) {
        ordered_json s = parse_artifact(*stats, artifacts::stats);
        check_digest(s.value("config_digest", ""), config, artifacts::stats);
        j["prepare"] = {{"load", s.at("load")}, {"clean", s.at("clean")}, {"split", s.at("split")}};
    } else {
        j["prepare"] = nullptr;
    }

    if (auto space_text = try_read(join_path(config.output_dir, artifacts::feature_space))) {
        std::string space_digest;
        const FeatureSpace space = FeatureSpace::from_json(*space_text, &space_digest);
        check_digest(space_digest, config, artifacts::feature_space);
        ordered_json models = ordered_json::array();
        for (const auto& m : config.models)
            if (try_read(join_path(config.output_dir, artifacts::model_file(m.name))))
                models.push_back(m.name);
        j["train"] = {{"vocabulary_size", space.tfidf.vocabulary.size()},
                      {"selected_columns",
                       space.selected ? space.selected->size() : space.column_names.size()},
                      {"models", std::move(models)}};
    } else {
        j["train"] = nullptr;
    }

    ordered_json reports = ordered_json::array();
    for (const auto& m : config.models) {
        if (auto text = try_read(join_path(config.output_dir, artifacts::metrics_file(m.name)))) {
            ordered_json r = parse_artifact(*text, artifacts::metrics_file(m.name));
            check_digest(r.value("config_digest", ""), config, artifacts::metrics_file(m.name));
            reports.push_back(r.at("report"));
        }
    }
    if (!reports.empty()) {
        j["evaluate"] = {{"reports", std::move(reports)}};
        if (auto csv = try_read(join_path(config.output_dir, artifacts::comparison)))
            j["evaluate"]["comparison_csv"] = *csv;
    } else {
        j["evaluate"] = nullptr;
    }

    const auto series_csv = try_read(join_path(config.output_dir, artifacts::time_series));
    const auto segments_csv = try_read(join_path(config.output_dir, artifacts::segments));
    const auto correlation_csv = try_read(join_path(config.output_dir, artifacts::correlation));
    if (series_csv || segments_csv || correlation_csv) {
        const auto row_count = [](const std::string& csv) {
            const auto lines = std::count(csv.begin(), csv.end(), '\n');
            return lines > 0 ? lines - 1 : 0;  // header
        };
        j["analyze"] = ordered_json::object();
        j["analyze"]["time_series_rows"] = series_csv ? row_count(*series_csv) : 0;
        j["analyze"]["segments_csv"] = segments_csv ? ordered_json(*segments_csv) : nullptr;
        j["analyze"]["correlation_csv"] =
            correlation_csv ? ordered_json(*correlation_csv) : nullptr;
    } else {
        j["analyze"] = nullptr;
    }

    const std::string text = j.dump(2) + "\n";
    try {
        fs::create_directories(config.output_dir);
    } catch (const fs::filesystem_error& e) {
        throw DataError("cannot create output directory " + config.output_dir + ": " + e.what());
    }
    detail::write_file(join_path(config.output_dir, artifacts::summary), text);
    return text;
}

} // namespace spamdet
