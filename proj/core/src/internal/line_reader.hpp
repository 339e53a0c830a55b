#pragma once

#include <string>
#include <vector>

#include <zlib.h>

#include "spamdet/errors.hpp"

namespace spamdet::detail {

/// Streams a newline-delimited file in bounded-memory batches. zlib's gz layer
/// inspects the magic bytes itself, so plain and gzip-compressed files read
/// through the same path. Lines keep no terminator; a trailing newline at EOF
/// does not produce an extra empty line.
class LineReader {
public:
    explicit LineReader(const std::string& path) : file_(gzopen(path.c_str(), "rb")) {
        if (file_ == nullptr) throw DataError("cannot open file: " + path);
        gzbuffer(file_, 1u << 20);
        buf_.resize(1u << 20);
    }

    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    ~LineReader() {
        if (file_ != nullptr) gzclose(file_);
    }

    /// Appends up to max_lines lines to `out`. Returns false once the file is
    /// exhausted and no line was produced.
    bool next_batch(std::vector<std::string>& out, std::size_t max_lines) {
        std::size_t produced = 0;
        while (produced < max_lines) {
            std::size_t nl = pending_.find('\n', pos_);
            if (nl != std::string::npos) {
                out.emplace_back(pending_, pos_, nl - pos_);
                pos_ = nl + 1;
                ++produced;
                continue;
            }
            if (eof_) {
                if (pos_ < pending_.size()) {
                    out.emplace_back(pending_, pos_, std::string::npos);
                    pos_ = pending_.size();
                    ++produced;
                }
                break;
            }
            pending_.erase(0, pos_);  // compact consumed prefix before refilling
            pos_ = 0;
            int n = gzread(file_, buf_.data(), static_cast<unsigned>(buf_.size()));
            if (n < 0) {
                int err = 0;
                const char* msg = gzerror(file_, &err);
                throw DataError(std::string("read error: ") + (msg != nullptr ? msg : "gzread"));
            }
            if (n == 0) {
                eof_ = true;
            } else {
                pending_.append(buf_.data(), static_cast<std::size_t>(n));
            }
        }
        return produced > 0;
    }

private:
    gzFile file_ = nullptr;
    std::vector<char> buf_;
    std::string pending_;
    std::size_t pos_ = 0;
    bool eof_ = false;
};

} // namespace spamdet::detail
