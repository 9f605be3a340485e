#include "reflex/store/blob_store.hpp"

#include <fstream>
#include <sstream>

#include "reflex/backends/digest.hpp"
#include "reflex/core/error.hpp"

namespace reflex::store {

BlobStore::BlobStore(std::filesystem::path data_dir) : dir_(std::move(data_dir) / "blobs") {}

std::string BlobStore::put(const std::string& bytes) const {
    const auto hash = sha256_hex(bytes);
    const auto path = dir_ / hash;
    if (std::filesystem::exists(path)) return hash;
    std::filesystem::create_directories(dir_);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorCode::IoError, "cannot write blob " + tmp);
    }
    std::filesystem::rename(tmp, path);
    return hash;
}

std::optional<std::string> BlobStore::get(const std::string& hash) const {
    // Hashes are lower-case hex; anything else cannot name a blob.
    if (hash.size() != 64 || hash.find_first_not_of("0123456789abcdef") != std::string::npos) return std::nullopt;
    std::ifstream in(dir_ / hash, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace reflex::store
