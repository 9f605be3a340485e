#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace reflex::store {

/// Content-addressed blobs under <data_dir>/blobs/<sha256>.
class BlobStore {
public:
    explicit BlobStore(std::filesystem::path data_dir);

    /// Writes `bytes` (if not already present) and returns its hash.
    std::string put(const std::string& bytes) const;
    std::optional<std::string> get(const std::string& hash) const;

private:
    std::filesystem::path dir_;
};

} // namespace reflex::store
