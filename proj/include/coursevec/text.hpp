#ifndef COURSEVEC_TEXT_HPP
#define COURSEVEC_TEXT_HPP

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace coursevec {

/// Porter (1980) suffix-stripping stemmer. Expects a lowercase ASCII word;
/// words of length <= 2 are returned unchanged.
std::string porter_stem(std::string_view word);

using WordSet = std::set<std::string, std::less<>>;

/// A small English stopword list used when no list file is supplied.
const WordSet& default_stopwords();

/// Reads one entry per line, skipping blank lines. Entries are trimmed.
std::vector<std::string> read_line_list(std::istream& in);
std::vector<std::string> read_line_list(const std::filesystem::path& path);

/// Splits text into sentences on '.', '!' or '?' followed by whitespace or
/// end of text. Sentences are trimmed and keep their terminator.
std::vector<std::string> split_sentences(std::string_view text);

/// Catalog-description cleanup for bag-of-words features:
///  1. drop sentences that match a boilerplate entry (case-insensitive,
///     whitespace-collapsed, terminator ignored),
///  2. lowercase and replace ASCII punctuation with spaces,
///  3. drop stopwords,
///  4. Porter-stem, dropping any stem that is itself a stopword.
/// Tokens keep their original order.
std::vector<std::string> preprocess_description(std::string_view text,
                                                const std::vector<std::string>& boilerplate,
                                                const WordSet& stopwords);

}  // namespace coursevec

#endif
