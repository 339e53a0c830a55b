#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "spamdet/sparse.hpp"

namespace spamdet {

using TokenSeq = std::vector<std::string>;

/// Token characters are ASCII letters/digits plus any byte >= 0x80, so multi-byte
/// UTF-8 sequences stay intact. Everything else separates tokens.
inline bool is_token_char(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           c >= 0x80;
}

/// Splits on every maximal run of non-token characters, lowercases ASCII, drops
/// empty fragments. Preserves surface order.
TokenSeq tokenize(std::string_view text);

/// Order-preserving filter; exact string match against the (lowercase) stoplist.
TokenSeq remove_stopwords(const TokenSeq& tokens, const std::unordered_set<std::string>& stoplist);

/// The stop-word list shipped with the repository (one word per line in
/// core/resources/stopwords_en.txt, embedded at build time). 179 entries.
const std::unordered_set<std::string>& default_stopwords();

struct Vocabulary {
    std::vector<std::string> terms;                        // index -> term, lexicographic
    std::unordered_map<std::string, std::uint32_t> term_to_index;
    std::vector<std::uint32_t> document_frequency;         // per index
    std::uint64_t n_documents = 0;

    std::uint32_t size() const { return static_cast<std::uint32_t>(terms.size()); }
};

/// Counts document frequencies over stop-word-filtered documents, drops terms
/// with df < min_df, caps at the max_terms highest-df terms (ties broken by
/// ascending term), and assigns indices in lexicographic term order. The df
/// count is merged from fixed-size chunks, so the result is identical for any
/// worker count.
Vocabulary build_vocabulary(const std::vector<TokenSeq>& documents, std::uint32_t max_terms,
                            std::uint32_t min_df, unsigned workers = 1);

struct TfIdfModel {
    Vocabulary vocabulary;
    std::vector<double> idf;  // idf[t] = ln((N+1)/(df[t]+1)) + 1, always >= 1

    /// Versioned JSON round-trip (terms, df, N); idf is refit on load.
    std::string to_json() const;
    static TfIdfModel from_json(std::string_view text);
};

TfIdfModel fit_idf(Vocabulary vocabulary);

/// Raw term count times idf per in-vocabulary term, L2-normalized. Out-of-vocab
/// tokens are ignored; an all-zero result stays the zero vector of dimension V.
SparseVector transform(const TokenSeq& tokens, const TfIdfModel& model);

} // namespace spamdet
