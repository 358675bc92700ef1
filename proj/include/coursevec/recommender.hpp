#ifndef COURSEVEC_RECOMMENDER_HPP
#define COURSEVEC_RECOMMENDER_HPP

#include "coursevec/corpus.hpp"
#include "coursevec/vectorspace.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace coursevec {

struct RecommendationEntry {
    CourseId id;
    std::string department;
    double score = 0.0;
    std::size_t rank = 0;  // 1-based

    bool operator==(const RecommendationEntry&) const = default;
};

struct RecommendationList {
    CourseId favorite;
    std::string model_label;
    std::vector<RecommendationEntry> entries;
    bool diversified = false;
    /// Why the list is empty when it could not be computed: "unrankable"
    /// (favorite has a zero vector) or "not_in_model".
    std::string note;
};

/// Candidate filters shared by both recommenders.
struct CandidateFilter {
    /// Drop courses of the favorite's own department.
    bool exclude_favorite_department = false;
    /// Drop courses whose number starts with 200 or higher.
    bool exclude_graduate = false;
    /// When set, only these courses are eligible (e.g. offered this term).
    std::optional<std::set<CourseId>> allow_list;
};

/// Department-diversified ranking: every department contributes only its
/// most similar course to the favorite, and those champions are ranked by
/// similarity. Candidates missing from the catalog have no department and
/// are ignored. Throws UnknownCourse if the favorite is not in the set.
RecommendationList recommend_diversified(const DenseEmbeddingSet& set, const Catalog& catalog,
                                         const CourseId& favorite, std::size_t k,
                                         const CandidateFilter& filter = {});

/// Top-k cosine neighbours of the favorite, optionally restricted to one
/// department. Throws UnknownCourse if the favorite is not in the set.
RecommendationList recommend_plain(const DenseEmbeddingSet& set, const Catalog& catalog,
                                   const CourseId& favorite, std::size_t k,
                                   const std::optional<std::string>& restrict_department = {},
                                   const CandidateFilter& filter = {});

bool is_graduate_course(const Course& course);

struct ExploreView {
    CourseId favorite;
    RecommendationList within_department;
    RecommendationList across_departments;
};

inline constexpr std::size_t kExplorePanelSize = 5;

/// Two-panel discovery view: the closest courses of the favorite's own
/// department under `equivalency_model`, and the closest course of each
/// other department under `bow_model`. A model lacking the favorite leaves
/// its panel empty with note "not_in_model". Throws UnknownCourse when the
/// favorite is in neither model or not in the catalog.
ExploreView build_explore_view(const CourseId& favorite, const DenseEmbeddingSet& equivalency_model,
                               const DenseEmbeddingSet& bow_model, const Catalog& catalog,
                               std::size_t panel_size = kExplorePanelSize);

}  // namespace coursevec

#endif
