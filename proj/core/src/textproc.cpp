#include "spamdet/textproc.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

#include "spamdet/errors.hpp"
#include "spamdet/parallel.hpp"

namespace spamdet {

namespace {

const char* const kStopwordData[] = {
#include "stopwords_data.inc"
};

constexpr int kTfIdfSchemaVersion = 1;

} // namespace

TokenSeq tokenize(std::string_view text) {
    TokenSeq out;
    std::string cur;
    for (unsigned char c : text) {
        if (is_token_char(c)) {
            if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
            cur.push_back(static_cast<char>(c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

TokenSeq remove_stopwords(const TokenSeq& tokens, const std::unordered_set<std::string>& stoplist) {
    TokenSeq out;
    out.reserve(tokens.size());
    for (const auto& t : tokens)
        if (stoplist.find(t) == stoplist.end()) out.push_back(t);
    return out;
}

const std::unordered_set<std::string>& default_stopwords() {
    static const std::unordered_set<std::string> set(std::begin(kStopwordData),
                                                     std::end(kStopwordData));
    return set;
}

Vocabulary build_vocabulary(const std::vector<TokenSeq>& documents, std::uint32_t max_terms,
                            std::uint32_t min_df, unsigned workers) {
    using DfMap = std::unordered_map<std::string, std::uint32_t>;

    // Integer df counts merge commutatively, so any fixed chunking gives the
    // same totals; the final ordering below is a full sort and owes nothing to
    // map iteration order.
    DfMap df = chunked_reduce<DfMap>(
        documents.size(), workers, DfMap{},
        [&](std::size_t begin, std::size_t end) {
            DfMap local;
            std::vector<std::string_view> uniq;
            for (std::size_t d = begin; d < end; ++d) {
                uniq.assign(documents[d].begin(), documents[d].end());
                std::sort(uniq.begin(), uniq.end());
                uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
                for (auto t : uniq) ++local[std::string(t)];
            }
            return local;
        },
        [](DfMap& acc, DfMap& part) {
            for (auto& [term, count] : part) acc[term] += count;
        });

    std::vector<std::pair<std::string, std::uint32_t>> retained;
    retained.reserve(df.size());
    for (auto& [term, count] : df)
        if (count >= min_df) retained.emplace_back(term, count);

    if (retained.size() > max_terms) {
        std::sort(retained.begin(), retained.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;  // highest df first
            return a.first < b.first;                              // then lexicographic
        });
        retained.resize(max_terms);
    }
    std::sort(retained.begin(), retained.end());  // index assignment is lexicographic

    Vocabulary v;
    v.n_documents = documents.size();
    v.terms.reserve(retained.size());
    v.document_frequency.reserve(retained.size());
    for (std::uint32_t i = 0; i < retained.size(); ++i) {
        v.term_to_index.emplace(retained[i].first, i);
        v.terms.push_back(std::move(retained[i].first));
        v.document_frequency.push_back(retained[i].second);
    }
    return v;
}

TfIdfModel fit_idf(Vocabulary vocabulary) {
    TfIdfModel m;
    m.idf.reserve(vocabulary.size());
    const double n = static_cast<double>(vocabulary.n_documents);
    for (std::uint32_t df : vocabulary.document_frequency)
        m.idf.push_back(std::log((n + 1.0) / (static_cast<double>(df) + 1.0)) + 1.0);
    m.vocabulary = std::move(vocabulary);
    return m;
}

SparseVector transform(const TokenSeq& tokens, const TfIdfModel& model) {
    SparseVector v;
    v.dimension = model.vocabulary.size();

    for (const auto& t : tokens) {
        auto it = model.vocabulary.term_to_index.find(t);
        if (it != model.vocabulary.term_to_index.end())
            v.entries.push_back({it->second, 1.0});  // raw counts merge below
    }
    if (v.entries.empty()) return v;

    v.normalize_layout();
    double sq = 0.0;
    for (auto& e : v.entries) {
        e.value *= model.idf[e.index];
        sq += e.value * e.value;
    }
    const double norm = std::sqrt(sq);
    if (norm > 0.0)
        for (auto& e : v.entries) e.value /= norm;
    return v;
}

std::string TfIdfModel::to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = kTfIdfSchemaVersion;
    j["kind"] = "tfidf";
    j["n_documents"] = vocabulary.n_documents;
    j["terms"] = vocabulary.terms;
    j["document_frequency"] = vocabulary.document_frequency;
    return j.dump();
}

TfIdfModel TfIdfModel::from_json(std::string_view text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw DataError("tfidf model: malformed JSON");
    if (j.value("schema_version", -1) != kTfIdfSchemaVersion)
        throw DataError("tfidf model: unsupported schema_version");
    if (j.value("kind", "") != "tfidf") throw DataError("tfidf model: wrong kind");

    Vocabulary v;
    v.n_documents = j.at("n_documents").get<std::uint64_t>();
    v.terms = j.at("terms").get<std::vector<std::string>>();
    v.document_frequency = j.at("document_frequency").get<std::vector<std::uint32_t>>();
    if (v.terms.size() != v.document_frequency.size())
        throw DataError("tfidf model: terms/df length mismatch");
    v.term_to_index.reserve(v.terms.size());
    for (std::uint32_t i = 0; i < v.terms.size(); ++i) v.term_to_index.emplace(v.terms[i], i);
    return fit_idf(std::move(v));
}

} // namespace spamdet
