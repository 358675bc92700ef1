#include "coursevec/io.hpp"

#include "coursevec/error.hpp"

#include <fstream>
#include <unistd.h>

namespace coursevec {

namespace fs = std::filesystem;

namespace {

fs::path temp_sibling(const fs::path& path, const char* tag) {
    auto name = path.filename().string();
    if (name.empty()) name = "out";
    return path.parent_path() / ("." + name + tag + std::to_string(::getpid()));
}

}  // namespace

void write_file_atomically(const fs::path& path, const std::function<void(std::ostream&)>& write) {
    const auto tmp = temp_sibling(path, ".tmp.");
    try {
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw DataError("cannot write " + tmp.string());
            write(out);
            out.flush();
            if (!out) throw DataError("write failed for " + path.string());
        }
        fs::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

void write_directory_atomically(const fs::path& dir,
                                const std::function<void(const fs::path&)>& fill) {
    const auto tmp = temp_sibling(dir, ".tmpdir.");
    const auto old = temp_sibling(dir, ".old.");
    std::error_code ec;
    fs::remove_all(tmp, ec);
    try {
        fs::create_directories(tmp);
        fill(tmp);
        if (fs::exists(dir)) {
            fs::remove_all(old, ec);
            fs::rename(dir, old);
            fs::rename(tmp, dir);
            fs::remove_all(old, ec);
        } else {
            fs::rename(tmp, dir);
        }
    } catch (...) {
        fs::remove_all(tmp, ec);
        throw;
    }
}

}  // namespace coursevec
