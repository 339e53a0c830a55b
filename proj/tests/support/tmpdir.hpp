#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

namespace testsupport {

/// Unique directory under the system temp root, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<std::uint64_t> counter{0};
        std::random_device rd;
        const auto tag = std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1));
        path_ = std::filesystem::temp_directory_path() / ("spamdet-test-" + tag);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

} // namespace testsupport
