#include "coursevec/vectorspace.hpp"

#include "coursevec/error.hpp"
#include "coursevec/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace coursevec {

DenseEmbeddingSet::DenseEmbeddingSet(std::size_t dim, std::vector<CourseId> courses,
                                     std::vector<double> values, std::string provenance)
    : dim_(dim), courses_(std::move(courses)), values_(std::move(values)),
      provenance_(std::move(provenance)) {
    if (dim_ == 0) throw DataError("embedding dimension must be at least 1");
    if (values_.size() != courses_.size() * dim_)
        throw DataError("embedding matrix has " + std::to_string(values_.size()) +
                        " values, expected " + std::to_string(courses_.size() * dim_));
    for (double v : values_)
        if (!std::isfinite(v)) throw DataError("embedding contains a non-finite value");
    index_.reserve(courses_.size());
    for (std::size_t i = 0; i < courses_.size(); ++i) {
        const auto& id = courses_[i];
        if (id.empty() || std::any_of(id.begin(), id.end(), [](char c) {
                return std::isspace(static_cast<unsigned char>(c)) != 0;
            }))
            throw DataError("invalid course id '" + id + "'");
        if (!index_.emplace(id, i).second) throw DataError("duplicate course id " + id);
    }
    norms_.resize(courses_.size());
    for (std::size_t i = 0; i < courses_.size(); ++i) norms_[i] = l2_norm(row(i));
}

std::optional<std::size_t> DenseEmbeddingSet::find(const CourseId& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t DenseEmbeddingSet::index_of(const CourseId& id) const {
    const auto i = find(id);
    if (!i) throw UnknownCourse(id);
    return *i;
}

RankedList rank_against(const DenseEmbeddingSet& set, std::span<const double> target,
                        const std::set<CourseId>& exclude, std::size_t k) {
    RankedList out;
    const double target_norm = l2_norm(target);
    if (target_norm == 0.0) {
        out.undefined = true;
        return out;
    }
    std::vector<RankedEntry> scored;
    scored.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& id = set.courses()[i];
        if (exclude.contains(id)) continue;
        if (set.norm(i) == 0.0) {
            ++out.unrankable;
            continue;
        }
        const double c = dot(target, set.row(i)) / (target_norm * set.norm(i));
        scored.push_back({id, ranking_score(c)});
    }
    const std::size_t n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                      ranks_before);
    scored.resize(n);
    out.entries = std::move(scored);
    return out;
}

RankedList nearest_neighbors(const DenseEmbeddingSet& set, const CourseId& query, std::size_t k,
                             const std::set<CourseId>& exclude) {
    const auto qi = set.index_of(query);
    const auto row = set.row(qi);
    const std::vector<double> target(row.begin(), row.end());
    auto excluded = exclude;
    excluded.insert(query);
    return rank_against(set, target, excluded, k);
}

RankedList analogy_query(const DenseEmbeddingSet& set, const CourseId& c1, const CourseId& c2,
                         const CourseId& c3, std::size_t k) {
    const auto r1 = set.row(set.index_of(c1));
    const auto r2 = set.row(set.index_of(c2));
    const auto r3 = set.row(set.index_of(c3));
    std::vector<double> target(set.dim());
    for (std::size_t d = 0; d < set.dim(); ++d)
        target[d] = static_cast<double>(r2[d]) - static_cast<double>(r1[d]) + static_cast<double>(r3[d]);
    return rank_against(set, target, {c1, c2, c3}, k);
}

NormalizeResult l2_normalize(const DenseEmbeddingSet& set) {
    NormalizeResult out;
    std::vector<double> values(set.values());
    for (std::size_t i = 0; i < set.size(); ++i) {
        const double n = set.norm(i);
        if (n == 0.0) {
            ++out.zero_rows;
            continue;
        }
        for (std::size_t d = 0; d < set.dim(); ++d) values[i * set.dim() + d] /= n;
    }
    out.set = DenseEmbeddingSet(set.dim(), set.courses(), std::move(values), set.provenance());
    return out;
}

ConcatResult concat_sets(const DenseEmbeddingSet& a, const DenseEmbeddingSet& b,
                         bool normalize_parts) {
    ConcatResult out;
    std::vector<CourseId> shared;
    for (const auto& id : a.courses()) {
        if (b.contains(id))
            shared.push_back(id);
        else
            out.dropped_from_a.push_back(id);
    }
    for (const auto& id : b.courses())
        if (!a.contains(id)) out.dropped_from_b.push_back(id);
    if (shared.empty()) throw DataError("embedding sets share no courses");

    const std::size_t dim = a.dim() + b.dim();
    std::vector<double> values;
    values.reserve(shared.size() * dim);
    auto append = [&](const DenseEmbeddingSet& s, std::size_t i) {
        const auto row = s.row(i);
        const double n = s.norm(i);
        if (normalize_parts && n == 0.0) ++out.zero_parts;
        for (double v : row)
            values.push_back(normalize_parts && n != 0.0 ? v / n : v);
    };
    for (const auto& id : shared) {
        append(a, *a.find(id));
        append(b, *b.find(id));
    }
    std::string label = a.provenance() + "+" + b.provenance();
    if (normalize_parts) label += " (norm)";
    out.set = DenseEmbeddingSet(dim, std::move(shared), std::move(values), std::move(label));
    return out;
}

void save_embeddings(const DenseEmbeddingSet& set, std::ostream& out) {
    out << set.size() << ' ' << set.dim() << '\n';
    char buf[32];
    for (std::size_t i = 0; i < set.size(); ++i) {
        out << set.courses()[i];
        for (double v : set.row(i)) {
            std::snprintf(buf, sizeof buf, " %.9g", v);
            out << buf;
        }
        out << '\n';
    }
}

void save_embeddings(const DenseEmbeddingSet& set, const std::filesystem::path& path) {
    write_file_atomically(path, [&](std::ostream& out) { save_embeddings(set, out); });
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> parts;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) parts.push_back(line.substr(i, j - i));
        i = j;
    }
    return parts;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

DenseEmbeddingSet load_embeddings(std::istream& in, std::string provenance) {
    auto fail = [](std::size_t line_no, const std::string& why) -> DataError {
        return DataError("embedding file line " + std::to_string(line_no) + ": " + why);
    };
    std::string line;
    if (!std::getline(in, line)) throw fail(1, "missing header");
    const auto header = split_ws(line);
    std::size_t count = 0, dim = 0;
    if (header.size() != 2 || !parse_number(header[0], count) || !parse_number(header[1], dim) ||
        dim == 0)
        throw fail(1, "header must be '<count> <dim>' with dim >= 1");

    std::vector<CourseId> courses;
    std::vector<double> values;
    courses.reserve(count);
    values.reserve(count * dim);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto parts = split_ws(line);
        if (parts.empty()) continue;
        if (courses.size() == count) throw fail(line_no, "more rows than the header count");
        if (parts.size() != dim + 1)
            throw fail(line_no, "expected " + std::to_string(dim) + " values, got " +
                                    std::to_string(parts.size() - 1));
        courses.emplace_back(parts[0]);
        for (std::size_t d = 1; d <= dim; ++d) {
            double v = 0.0;
            if (!parse_number(parts[d], v) || !std::isfinite(v))
                throw fail(line_no, "bad value '" + std::string(parts[d]) + "'");
            values.push_back(v);
        }
    }
    if (courses.size() != count)
        throw fail(line_no, "header declares " + std::to_string(count) + " rows, found " +
                                std::to_string(courses.size()));
    try {
        return DenseEmbeddingSet(dim, std::move(courses), std::move(values), std::move(provenance));
    } catch (const DataError& e) {
        throw DataError(std::string("embedding file: ") + e.what());
    }
}

DenseEmbeddingSet load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open embedding file " + path.string());
    return load_embeddings(in, path.stem().string());
}

}  // namespace coursevec
