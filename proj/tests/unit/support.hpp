#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include <doctest.h>

namespace reflex::testing {

inline std::filesystem::path golden_path(const std::string& name) { return std::filesystem::path(REFLEX_GOLDEN_DIR) / name; }

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Compares `actual` with a committed golden file. With REFLEX_UPDATE_GOLDEN=1
/// the file is (re)written instead; a missing golden fails the test.
inline void check_golden(const std::string& name, const std::string& actual) {
    const auto path = golden_path(name);
    if (const char* update = std::getenv("REFLEX_UPDATE_GOLDEN"); update && std::string(update) == "1") {
        std::ofstream(path, std::ios::binary | std::ios::trunc) << actual;
        return;
    }
    REQUIRE_MESSAGE(std::filesystem::exists(path), "missing golden " << path);
    CHECK(read_file(path) == actual);
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("reflex-test-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace reflex::testing
