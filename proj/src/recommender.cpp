#include "coursevec/recommender.hpp"

#include "coursevec/error.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace coursevec {

bool is_graduate_course(const Course& course) {
    int value = 0;
    bool any = false;
    for (char c : course.number) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            if (any) break;
            continue;
        }
        any = true;
        value = value * 10 + (c - '0');
    }
    return any && value >= 200;
}

namespace {

const std::string* department_of(const Catalog& catalog, const CourseId& id) {
    const auto it = catalog.find(id);
    return it == catalog.end() ? nullptr : &it->second.department;
}

bool eligible(const Catalog& catalog, const CourseId& id, const std::string* favorite_dept,
              const CandidateFilter& filter) {
    if (filter.allow_list && !filter.allow_list->contains(id)) return false;
    const auto it = catalog.find(id);
    if (filter.exclude_graduate && it != catalog.end() && is_graduate_course(it->second)) return false;
    if (filter.exclude_favorite_department && favorite_dept != nullptr && it != catalog.end() &&
        it->second.department == *favorite_dept)
        return false;
    return true;
}

}  // namespace

RecommendationList recommend_diversified(const DenseEmbeddingSet& set, const Catalog& catalog,
                                         const CourseId& favorite, std::size_t k,
                                         const CandidateFilter& filter) {
    const auto fi = set.index_of(favorite);
    RecommendationList out;
    out.favorite = favorite;
    out.model_label = set.provenance();
    out.diversified = true;
    if (set.norm(fi) == 0.0) {
        out.note = "unrankable";
        return out;
    }
    const std::string* favorite_dept = department_of(catalog, favorite);
    const auto frow = set.row(fi);

    std::map<std::string, RankedEntry> champions;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& id = set.courses()[i];
        if (i == fi || set.norm(i) == 0.0) continue;
        const std::string* dept = department_of(catalog, id);
        if (dept == nullptr || !eligible(catalog, id, favorite_dept, filter)) continue;
        const double score = ranking_score(dot(frow, set.row(i)) / (set.norm(fi) * set.norm(i)));
        const RankedEntry candidate{id, score};
        auto [it, inserted] = champions.try_emplace(*dept, candidate);
        if (!inserted && ranks_before(candidate, it->second)) it->second = candidate;
    }

    std::vector<std::pair<RankedEntry, std::string>> ranked;
    ranked.reserve(champions.size());
    for (auto& [dept, entry] : champions) ranked.emplace_back(entry, dept);
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return ranks_before(a.first, b.first); });
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i)
        out.entries.push_back({ranked[i].first.id, ranked[i].second, ranked[i].first.score, i + 1});
    return out;
}

RecommendationList recommend_plain(const DenseEmbeddingSet& set, const Catalog& catalog,
                                   const CourseId& favorite, std::size_t k,
                                   const std::optional<std::string>& restrict_department,
                                   const CandidateFilter& filter) {
    const auto fi = set.index_of(favorite);
    RecommendationList out;
    out.favorite = favorite;
    out.model_label = set.provenance();
    if (set.norm(fi) == 0.0) {
        out.note = "unrankable";
        return out;
    }
    const std::string* favorite_dept = department_of(catalog, favorite);
    std::set<CourseId> exclude;
    for (const auto& id : set.courses()) {
        if (restrict_department) {
            const std::string* dept = department_of(catalog, id);
            if (dept == nullptr || *dept != *restrict_department) {
                exclude.insert(id);
                continue;
            }
        }
        if (!eligible(catalog, id, favorite_dept, filter)) exclude.insert(id);
    }
    const auto ranked = nearest_neighbors(set, favorite, k, exclude);
    for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
        const auto& e = ranked.entries[i];
        const std::string* dept = department_of(catalog, e.id);
        out.entries.push_back({e.id, dept ? *dept : std::string{}, e.score, i + 1});
    }
    return out;
}

ExploreView build_explore_view(const CourseId& favorite, const DenseEmbeddingSet& equivalency_model,
                               const DenseEmbeddingSet& bow_model, const Catalog& catalog,
                               std::size_t panel_size) {
    const auto course = catalog.find(favorite);
    if (course == catalog.end() ||
        (!equivalency_model.contains(favorite) && !bow_model.contains(favorite)))
        throw UnknownCourse(favorite);

    ExploreView view;
    view.favorite = favorite;
    if (equivalency_model.contains(favorite)) {
        view.within_department = recommend_plain(equivalency_model, catalog, favorite, panel_size,
                                                 course->second.department);
    } else {
        view.within_department = {favorite, equivalency_model.provenance(), {}, false, "not_in_model"};
    }
    if (bow_model.contains(favorite)) {
        CandidateFilter filter;
        filter.exclude_favorite_department = true;
        view.across_departments =
            recommend_diversified(bow_model, catalog, favorite, panel_size, filter);
    } else {
        view.across_departments = {favorite, bow_model.provenance(), {}, true, "not_in_model"};
    }
    return view;
}

}  // namespace coursevec
