#ifndef COURSEVEC_IO_HPP
#define COURSEVEC_IO_HPP

#include <filesystem>
#include <functional>
#include <iosfwd>

namespace coursevec {

/// Runs `write` against a temporary sibling of `path` and renames it into
/// place once the stream is flushed. On any failure the temporary is removed
/// and `path` is left untouched.
void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& write);

/// Same contract for a directory: `fill` populates a fresh temporary
/// directory that then replaces `dir`.
void write_directory_atomically(const std::filesystem::path& dir,
                                const std::function<void(const std::filesystem::path&)>& fill);

}  // namespace coursevec

#endif
