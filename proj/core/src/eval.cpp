#include "spamdet/eval.hpp"

#include <algorithm>

#include "json.hpp"

#include "internal/io_util.hpp"
#include "spamdet/errors.hpp"

namespace spamdet {

ConfusionMatrix confusion(std::span<const double> predictions, std::span<const int> labels,
                          double threshold) {
    if (predictions.size() != labels.size())
        throw DataError("confusion: prediction/label length mismatch");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool predicted = predictions[i] >= threshold;
        const bool actual = labels[i] == 1;
        if (predicted && actual)
            ++cm.tp;
        else if (predicted && !actual)
            ++cm.fp;
        else if (!predicted && actual)
            ++cm.fn;
        else
            ++cm.tn;
    }
    return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm, std::string model_name) {
    MetricsReport r;
    r.model_name = std::move(model_name);
    r.confusion = cm;
    const auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.accuracy = ratio(cm.tp + cm.tn, cm.total());
    r.precision = ratio(cm.tp, cm.tp + cm.fp);
    r.recall = ratio(cm.tp, cm.tp + cm.fn);
    // 2PR/(P+R), evaluated in its exact rational form 2tp/(2tp+fp+fn); defined
    // only when P and R are and P+R > 0 (i.e. tp > 0)
    if (r.precision && r.recall && cm.tp > 0)
        r.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn);
    return r;
}

std::string MetricsReport::to_json() const {
    nlohmann::ordered_json j;
    j["model"] = model_name;
    const auto put = [&](const char* key, const std::optional<double>& v) {
        if (v)
            j[key] = *v;
        else
            j[key] = nullptr;
    };
    put("accuracy", accuracy);
    put("precision", precision);
    put("recall", recall);
    put("f1", f1);
    j["confusion"] = {{"tp", confusion.tp},
                      {"fp", confusion.fp},
                      {"tn", confusion.tn},
                      {"fn", confusion.fn}};
    return j.dump();
}

ComparisonTable compare_models(std::vector<MetricsReport> reports) {
    std::sort(reports.begin(), reports.end(), [](const MetricsReport& a, const MetricsReport& b) {
        const double aa = a.accuracy.value_or(-1.0);
        const double ba = b.accuracy.value_or(-1.0);
        if (aa != ba) return aa > ba;
        return a.model_name < b.model_name;
    });
    return {std::move(reports)};
}

std::string ComparisonTable::to_csv() const {
    std::string out = "model,accuracy,precision,recall,f1\n";
    for (const auto& r : rows) {
        out += r.model_name;
        for (const auto& v : {r.accuracy, r.precision, r.recall, r.f1}) {
            out += ',';
            if (v) out += detail::format_fixed(*v * 100.0, 2);
        }
        out += '\n';
    }
    return out;
}

} // namespace spamdet
