#ifndef COURSEVEC_VECTORSPACE_HPP
#define COURSEVEC_VECTORSPACE_HPP

#include "coursevec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace coursevec {

/// Immutable course -> vector table of doubles.
class DenseEmbeddingSet {
public:
    DenseEmbeddingSet() = default;

    /// `values` is row-major, courses.size() x dim. Throws DataError on a
    /// shape mismatch, dim == 0, a non-finite value, a duplicate id, or an id
    /// containing whitespace.
    DenseEmbeddingSet(std::size_t dim, std::vector<CourseId> courses, std::vector<double> values,
                      std::string provenance = {});

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return courses_.size(); }
    bool empty() const noexcept { return courses_.empty(); }

    const std::vector<CourseId>& courses() const noexcept { return courses_; }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::string& provenance() const noexcept { return provenance_; }
    void set_provenance(std::string label) { provenance_ = std::move(label); }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }
    double norm(std::size_t i) const { return norms_[i]; }

    std::optional<std::size_t> find(const CourseId& id) const;
    bool contains(const CourseId& id) const { return find(id).has_value(); }

    /// Row of `id`; throws UnknownCourse.
    std::size_t index_of(const CourseId& id) const;

private:
    std::size_t dim_ = 1;
    std::vector<CourseId> courses_;
    std::vector<double> values_;
    std::vector<double> norms_;
    std::unordered_map<CourseId, std::size_t> index_;
    std::string provenance_;
};

template <typename A, typename B>
double dot(std::span<const A> u, std::span<const B> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += static_cast<double>(u[i]) * static_cast<double>(v[i]);
    return s;
}

template <typename A>
double l2_norm(std::span<const A> u) {
    return std::sqrt(dot(u, u));
}

/// Cosine similarity clamped to [-1, 1]; nullopt when either vector is zero
/// (the course is then unrankable). Dimensions must match.
template <typename A, typename B>
std::optional<double> cosine(std::span<const A> u, std::span<const B> v) {
    const double nu = l2_norm(u);
    const double nv = l2_norm(v);
    if (nu == 0.0 || nv == 0.0) return std::nullopt;
    const double c = dot(u, v) / (nu * nv);
    return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

inline std::optional<double> cosine(const std::vector<double>& u, const std::vector<double>& v) {
    return cosine(std::span<const double>(u), std::span<const double>(v));
}

struct RankedEntry {
    CourseId id;
    double score = 0.0;

    bool operator==(const RankedEntry&) const = default;
};

/// Scores are non-increasing; equal scores are ordered by ascending id.
struct RankedList {
    std::vector<RankedEntry> entries;
    /// The query or target vector was zero, so nothing could be scored.
    bool undefined = false;
    /// Candidates skipped because their own vector is zero.
    std::size_t unrankable = 0;
};

/// Ranking scores are cosines clamped to [-1, 1] and rounded to a 1e-12 grid,
/// so cosines that are equal in exact arithmetic (e.g. before and after
/// rescaling a row) compare equal and fall through to the id tie-break.
inline constexpr double kScoreScale = 1e12;

inline double ranking_score(double c) {
    return std::round(std::clamp(c, -1.0, 1.0) * kScoreScale) / kScoreScale;
}

/// Strict weak order used by every ranking: score descending, then id.
inline bool ranks_before(const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

/// Ranks every course of `set` against `target`, skipping `exclude`. Returns
/// at most k entries (k = npos for all).
RankedList rank_against(const DenseEmbeddingSet& set, std::span<const double> target,
                        const std::set<CourseId>& exclude, std::size_t k);

RankedList nearest_neighbors(const DenseEmbeddingSet& set, const CourseId& query, std::size_t k,
                             const std::set<CourseId>& exclude = {});

/// Vector-offset analogy: ranks courses by cosine to v(c2) - v(c1) + v(c3),
/// leaving out c1, c2 and c3.
RankedList analogy_query(const DenseEmbeddingSet& set, const CourseId& c1, const CourseId& c2,
                         const CourseId& c3, std::size_t k);

struct NormalizeResult {
    DenseEmbeddingSet set;
    std::size_t zero_rows = 0;
};

NormalizeResult l2_normalize(const DenseEmbeddingSet& set);

struct ConcatResult {
    DenseEmbeddingSet set;
    std::vector<CourseId> dropped_from_a;  // in a but not b
    std::vector<CourseId> dropped_from_b;  // in b but not a
    std::size_t zero_parts = 0;
};

/// Per-course concatenation [a | b] over the shared courses, in a's order.
/// With normalize_parts each half is scaled to unit norm first. Throws
/// DataError if no course is shared.
ConcatResult concat_sets(const DenseEmbeddingSet& a, const DenseEmbeddingSet& b,
                         bool normalize_parts);

/// Text format: "<count> <dim>" then "<id> <f1> ... <fdim>" per line, values
/// printed with 9 significant digits.
void save_embeddings(const DenseEmbeddingSet& set, std::ostream& out);
/// Writes through a temporary file and renames it over `path`.
void save_embeddings(const DenseEmbeddingSet& set, const std::filesystem::path& path);

/// Throws DataError naming the offending line.
DenseEmbeddingSet load_embeddings(std::istream& in, std::string provenance = {});
DenseEmbeddingSet load_embeddings(const std::filesystem::path& path);

}  // namespace coursevec

#endif
