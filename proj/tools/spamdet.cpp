#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "spamdet/errors.hpp"
#include "spamdet/pipeline.hpp"

namespace {

struct Overrides {
    std::optional<std::string> config_path;
    std::optional<std::string> input;
    std::optional<std::string> output;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> on_error;
};

spamdet::PipelineConfig resolve(const Overrides& o) {
    spamdet::PipelineConfig config = o.config_path
                                         ? spamdet::PipelineConfig::from_file(*o.config_path)
                                         : spamdet::PipelineConfig::defaults();
    if (o.input) config.input_path = *o.input;
    if (o.output) config.output_dir = *o.output;
    if (o.seed) {
        config.seed = *o.seed;
        for (auto& m : config.models) m.train.seed = *o.seed;
    }
    if (o.workers) config.worker_count = *o.workers;
    if (o.on_error) {
        if (*o.on_error == "skip")
            config.on_error = spamdet::ErrorPolicy::skip;
        else if (*o.on_error == "abort")
            config.on_error = spamdet::ErrorPolicy::abort;
        else
            throw spamdet::UsageError("--on-error must be 'skip' or 'abort'");
    }
    return config;
}

void print_stats(const char* label, const spamdet::CorpusStats& s) {
    std::printf("%s: read %zu, kept %zu (null %zu, duplicate %zu, malformed %zu)\n", label,
                s.total_read, s.kept, s.dropped_null, s.dropped_duplicate, s.dropped_malformed);
}

int run_stage(const std::string& stage, const Overrides& overrides) {
    const spamdet::PipelineConfig config = resolve(overrides);
    if (stage == "prepare") {
        const auto r = spamdet::run_prepare(config);
        print_stats("load", r.load_stats);
        print_stats("clean", r.clean_stats);
        std::printf("split: train %zu, test %zu\n", r.train_records, r.test_records);
        return 0;
    }
    if (stage == "train") {
        const auto r = spamdet::run_train(config);
        std::printf("vocabulary: %zu terms, %zu columns after selection\n", r.vocabulary_size,
                    r.selected_columns);
        for (const auto& m : r.models) {
            if (m.ok)
                std::printf("model %s: ok\n", m.name.c_str());
            else
                std::fprintf(stderr, "model %s: FAILED (%s)\n", m.name.c_str(), m.error.c_str());
        }
        return r.all_ok() ? 0 : 3;
    }
    if (stage == "evaluate") {
        const auto r = spamdet::run_evaluate(config);
        std::fputs(r.table.to_csv().c_str(), stdout);
        return 0;
    }
    if (stage == "analyze") {
        const auto r = spamdet::run_analyze(config);
        std::printf("time series: %zu months\n", r.series.size());
        for (const auto& s : r.segments)
            std::printf("segment %s: %zu reviewers, %zu reviews, spam rate %.4f\n",
                        to_string(s.name), s.reviewer_count, s.review_count, s.spam_rate);
        return 0;
    }
    const std::string text = spamdet::run_report(config);
    std::fputs(text.c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spam review detection pipeline"};
    app.require_subcommand(1);

    Overrides overrides;
    std::string stage;
    for (const auto& [name, help] :
         {std::pair{"prepare", "load, clean, and split the corpus"},
          std::pair{"train", "fit features and train the configured models"},
          std::pair{"evaluate", "score trained models on the test split"},
          std::pair{"analyze", "temporal and reviewer-behavior analysis"},
          std::pair{"report", "aggregate stage outputs into summary.json"}}) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", overrides.config_path, "config file (key = value lines)");
        sub->add_option("--input", overrides.input, "input corpus path (.jsonl or .jsonl.gz)");
        sub->add_option("--output", overrides.output, "artifact directory");
        sub->add_option("--seed", overrides.seed, "RNG seed for split and models");
        sub->add_option("--workers", overrides.workers, "worker threads (0 = all cores)");
        sub->add_option("--on-error", overrides.on_error, "malformed input policy: skip|abort");
        sub->callback([&stage, name = std::string(name)] { stage = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        return run_stage(stage, overrides);
    } catch (const spamdet::UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const spamdet::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const spamdet::TrainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 2;
    }
}
