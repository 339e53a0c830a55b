#include "spamdet/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <string_view>

#include "internal/io_util.hpp"
#include "spamdet/errors.hpp"

namespace spamdet {

namespace {

constexpr const char* kModelNames[] = {"lr", "svm", "dt", "rf", "gb"};

TrainConfig model_defaults(std::string_view name) {
    if (name == "lr") return logistic_defaults();
    if (name == "svm") return svm_defaults();
    if (name == "dt") return decision_tree_defaults();
    if (name == "rf") return random_forest_defaults();
    if (name == "gb") return gradient_boosting_defaults();
    throw UsageError("unknown model name '" + std::string(name) + "'");
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
    const std::string v(value);
    errno = 0;
    char* end = nullptr;
    const unsigned long long out = std::strtoull(v.c_str(), &end, 10);
    if (errno != 0 || end != v.c_str() + v.size() || v.empty() || v[0] == '-')
        throw UsageError("config key '" + std::string(key) + "': expected a non-negative integer, got '" +
                         v + "'");
    return out;
}

double parse_double(std::string_view key, std::string_view value) {
    const std::string v(value);
    errno = 0;
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (errno != 0 || end != v.c_str() + v.size() || v.empty())
        throw UsageError("config key '" + std::string(key) + "': expected a number, got '" + v +
                         "'");
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw UsageError("config key '" + std::string(key) + "': expected true or false, got '" +
                     std::string(value) + "'");
}

ModelSpec* find_model(PipelineConfig& c, std::string_view name) {
    for (auto& m : c.models)
        if (m.name == name) return &m;
    return nullptr;
}

// Per-model keys look like "rf.n_trees". Returns false for unknown field names.
bool apply_model_key(TrainConfig& t, std::string_view field, std::string_view key,
                     std::string_view value) {
    if (field == "seed")
        t.seed = parse_u64(key, value);
    else if (field == "epochs")
        t.epochs = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (field == "learning_rate")
        t.learning_rate = parse_double(key, value);
    else if (field == "l2_penalty")
        t.l2_penalty = parse_double(key, value);
    else if (field == "batch_size")
        t.batch_size = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (field == "max_depth")
        t.max_depth = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (field == "min_samples_leaf")
        t.min_samples_leaf = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (field == "n_trees")
        t.n_trees = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (field == "feature_subsample_ratio") {
        if (value == "sqrt")
            t.feature_subsample_ratio = std::nullopt;
        else
            t.feature_subsample_ratio = parse_double(key, value);
    } else if (field == "bootstrap")
        t.bootstrap = parse_bool(key, value);
    else
        return false;
    return true;
}

} // namespace

PipelineConfig PipelineConfig::defaults() {
    PipelineConfig c;
    for (const char* name : kModelNames) c.models.push_back({name, model_defaults(name)});
    return c;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::string text;
    try {
        text = detail::read_file(path);
    } catch (const DataError& e) {
        throw UsageError(e.what());
    }

    PipelineConfig c = defaults();
    bool global_seed_set = false;
    std::vector<std::string> seeded_models;  // models with an explicit per-model seed

    std::string_view rest(text);
    std::size_t line_no = 0;
    while (!rest.empty()) {
        const std::size_t nl = rest.find('\n');
        std::string_view line = rest.substr(0, nl);
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        ++line_no;

        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw UsageError(path + ": line " + std::to_string(line_no) +
                             ": expected 'key = value'");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty())
            throw UsageError(path + ": line " + std::to_string(line_no) + ": empty key");

        if (key == "input_path")
            c.input_path = value;
        else if (key == "output_dir")
            c.output_dir = value;
        else if (key == "seed") {
            c.seed = parse_u64(key, value);
            global_seed_set = true;
        } else if (key == "workers")
            c.worker_count = static_cast<unsigned>(parse_u64(key, value));
        else if (key == "on_error") {
            if (value == "skip")
                c.on_error = ErrorPolicy::skip;
            else if (value == "abort")
                c.on_error = ErrorPolicy::abort;
            else
                throw UsageError("config key 'on_error': expected skip or abort");
        } else if (key == "split_fraction")
            c.split_fraction = parse_double(key, value);
        else if (key == "split_stratified")
            c.split_stratified = parse_bool(key, value);
        else if (key == "vocab_max_terms")
            c.vocab_max_terms = static_cast<std::uint32_t>(parse_u64(key, value));
        else if (key == "vocab_min_df")
            c.vocab_min_df = static_cast<std::uint32_t>(parse_u64(key, value));
        else if (key == "selection_k")
            c.selection_k = static_cast<std::uint32_t>(parse_u64(key, value));
        else if (key == "threshold")
            c.threshold = parse_double(key, value);
        else if (key == "segment_a")
            c.segment_a = static_cast<std::uint32_t>(parse_u64(key, value));
        else if (key == "segment_b")
            c.segment_b = static_cast<std::uint32_t>(parse_u64(key, value));
        else if (key == "models") {
            c.models.clear();
            std::string_view list = value;
            while (!list.empty()) {
                const std::size_t comma = list.find(',');
                const std::string_view name = trim(list.substr(0, comma));
                list = comma == std::string_view::npos ? std::string_view{}
                                                       : list.substr(comma + 1);
                if (name.empty()) throw UsageError("config key 'models': empty model name");
                if (find_model(c, name))
                    throw UsageError("config key 'models': duplicate model '" +
                                     std::string(name) + "'");
                c.models.push_back({std::string(name), model_defaults(name)});
            }
            if (c.models.empty()) throw UsageError("config key 'models': list is empty");
        } else {
            const std::size_t dot = key.find('.');
            bool handled = false;
            if (dot != std::string_view::npos) {
                const std::string_view model_name = key.substr(0, dot);
                const std::string_view field = key.substr(dot + 1);
                if (ModelSpec* m = find_model(c, model_name)) {
                    handled = apply_model_key(m->train, field, key, value);
                    if (handled && field == "seed") seeded_models.emplace_back(model_name);
                }
            }
            if (!handled)
                throw UsageError(path + ": line " + std::to_string(line_no) +
                                 ": unknown config key '" + std::string(key) + "'");
        }
    }

    // The global seed flows into each model unless that model pinned its own.
    if (global_seed_set)
        for (auto& m : c.models)
            if (std::find(seeded_models.begin(), seeded_models.end(), m.name) ==
                seeded_models.end())
                m.train.seed = c.seed;
    return c;
}

void PipelineConfig::validate() const {
    const auto fail = [](const std::string& what) { throw UsageError("config: " + what); };
    if (output_dir.empty()) fail("output_dir is required");
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        fail("split_fraction must lie in (0, 1)");
    if (vocab_max_terms < 1) fail("vocab_max_terms must be at least 1");
    if (vocab_min_df < 1) fail("vocab_min_df must be at least 1");
    if (selection_k < 1) fail("selection_k must be at least 1");
    if (!(threshold >= 0.0 && threshold <= 1.0)) fail("threshold must lie in [0, 1]");
    if (segment_a < 1 || segment_a >= segment_b) fail("segmentation bounds need 1 <= a < b");
    if (models.empty()) fail("at least one model is required");
    for (const auto& m : models) {
        const std::string p = "model '" + m.name + "': ";
        const bool known = std::any_of(std::begin(kModelNames), std::end(kModelNames),
                                       [&](const char* n) { return m.name == n; });
        if (!known) fail(p + "unknown model");
        const TrainConfig& t = m.train;
        if (m.name == "lr" || m.name == "svm") {
            if (t.epochs < 1) fail(p + "epochs must be at least 1");
            if (!(t.learning_rate > 0.0)) fail(p + "learning_rate must be positive");
            if (t.l2_penalty < 0.0) fail(p + "l2_penalty must be non-negative");
            if (t.batch_size < 1) fail(p + "batch_size must be at least 1");
        } else {
            if (t.min_samples_leaf < 1) fail(p + "min_samples_leaf must be at least 1");
            if (m.name == "rf" && t.n_trees < 1) fail(p + "n_trees must be at least 1");
            if (m.name == "gb" && !(t.learning_rate > 0.0 && t.learning_rate <= 1.0))
                fail(p + "learning_rate must lie in (0, 1]");
            if (t.feature_subsample_ratio.has_value() &&
                !(*t.feature_subsample_ratio > 0.0 && *t.feature_subsample_ratio <= 1.0))
                fail(p + "feature_subsample_ratio must lie in (0, 1]");
        }
    }
}

std::string PipelineConfig::canonical_semantic() const {
    std::vector<std::string> lines;
    const auto add = [&](const std::string& key, const std::string& value) {
        lines.push_back(key + "=" + value);
    };
    add("seed", std::to_string(seed));
    add("split_fraction", detail::format_general(split_fraction));
    add("split_stratified", split_stratified ? "true" : "false");
    add("vocab_max_terms", std::to_string(vocab_max_terms));
    add("vocab_min_df", std::to_string(vocab_min_df));
    add("selection_k", std::to_string(selection_k));
    add("threshold", detail::format_general(threshold));
    add("segment_a", std::to_string(segment_a));
    add("segment_b", std::to_string(segment_b));
    std::string model_list;
    for (const auto& m : models) {
        if (!model_list.empty()) model_list += ',';
        model_list += m.name;
        const TrainConfig& t = m.train;
        add(m.name + ".seed", std::to_string(t.seed));
        add(m.name + ".epochs", std::to_string(t.epochs));
        add(m.name + ".learning_rate", detail::format_general(t.learning_rate));
        add(m.name + ".l2_penalty", detail::format_general(t.l2_penalty));
        add(m.name + ".batch_size", std::to_string(t.batch_size));
        add(m.name + ".max_depth", std::to_string(t.max_depth));
        add(m.name + ".min_samples_leaf", std::to_string(t.min_samples_leaf));
        add(m.name + ".n_trees", std::to_string(t.n_trees));
        add(m.name + ".feature_subsample_ratio",
            t.feature_subsample_ratio ? detail::format_general(*t.feature_subsample_ratio)
                                      : "sqrt");
        add(m.name + ".bootstrap", t.bootstrap ? "true" : "false");
    }
    add("models", model_list);
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

std::string PipelineConfig::digest() const { return detail::hex64(detail::fnv1a64(canonical_semantic())); }

} // namespace spamdet
