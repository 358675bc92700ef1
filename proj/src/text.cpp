#include "coursevec/text.hpp"

#include "coursevec/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>

namespace coursevec {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

// Lowercase, drop the sentence terminator, collapse whitespace runs.
std::string sentence_key(std::string_view sentence) {
    sentence = trim(sentence);
    while (!sentence.empty() &&
           (sentence.back() == '.' || sentence.back() == '!' || sentence.back() == '?'))
        sentence.remove_suffix(1);
    std::string key;
    bool pending_space = false;
    for (char c : trim(sentence)) {
        if (is_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space) key.push_back(' ');
        pending_space = false;
        key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return key;
}

}  // namespace

const WordSet& default_stopwords() {
    static const WordSet words = {
        "a",       "about",   "above",  "after",  "again",  "against", "all",    "am",
        "an",      "and",     "any",    "are",    "as",     "at",      "be",     "because",
        "been",    "before",  "being",  "below",  "between", "both",   "but",    "by",
        "can",     "could",   "did",    "do",     "does",   "doing",   "down",   "during",
        "each",    "few",     "for",    "from",   "further", "had",    "has",    "have",
        "having",  "he",      "her",    "here",   "hers",   "herself", "him",    "himself",
        "his",     "how",     "i",      "if",     "in",     "into",    "is",     "it",
        "its",     "itself",  "just",   "may",    "me",     "more",    "most",   "must",
        "my",      "myself",  "no",     "nor",    "not",    "now",     "of",     "off",
        "on",      "once",    "only",   "or",     "other",  "our",     "ours",   "ourselves",
        "out",     "over",    "own",    "same",   "she",    "should",  "so",     "some",
        "such",    "than",    "that",   "the",    "their",  "theirs",  "them",   "themselves",
        "then",    "there",   "these",  "they",   "this",   "those",   "through", "to",
        "too",     "under",   "until",  "up",     "very",   "was",     "we",     "were",
        "what",    "when",    "where",  "which",  "while",  "who",     "whom",   "why",
        "will",    "with",    "would",  "you",    "your",   "yours",   "yourself", "yourselves",
    };
    return words;
}

std::vector<std::string> read_line_list(std::istream& in) {
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto entry = trim(line);
        if (!entry.empty()) out.emplace_back(entry);
    }
    return out;
}

std::vector<std::string> read_line_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path.string());
    return read_line_list(in);
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        if (i + 1 < text.size() && !is_space(text[i + 1])) continue;
        const auto sentence = trim(text.substr(start, i + 1 - start));
        if (!sentence.empty()) out.emplace_back(sentence);
        start = i + 1;
    }
    const auto tail = trim(text.substr(std::min(start, text.size())));
    if (!tail.empty()) out.emplace_back(tail);
    return out;
}

std::vector<std::string> preprocess_description(std::string_view text,
                                                const std::vector<std::string>& boilerplate,
                                                const WordSet& stopwords) {
    std::vector<std::string> boilerplate_keys;
    boilerplate_keys.reserve(boilerplate.size());
    for (const auto& b : boilerplate) boilerplate_keys.push_back(sentence_key(b));
    std::sort(boilerplate_keys.begin(), boilerplate_keys.end());

    std::string kept;
    for (const auto& sentence : split_sentences(text)) {
        if (std::binary_search(boilerplate_keys.begin(), boilerplate_keys.end(),
                               sentence_key(sentence)))
            continue;
        kept += sentence;
        kept.push_back(' ');
    }

    for (char& c : kept) {
        const auto u = static_cast<unsigned char>(c);
        if (u < 0x80 && std::ispunct(u))
            c = ' ';
        else
            c = static_cast<char>(std::tolower(u));
    }

    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < kept.size()) {
        while (i < kept.size() && is_space(kept[i])) ++i;
        std::size_t j = i;
        while (j < kept.size() && !is_space(kept[j])) ++j;
        if (j > i) {
            const std::string_view word(kept.data() + i, j - i);
            if (!stopwords.contains(word)) {
                auto stem = porter_stem(word);
                if (!stopwords.contains(stem)) tokens.push_back(std::move(stem));
            }
        }
        i = j;
    }
    return tokens;
}

}  // namespace coursevec
