#ifndef COURSEVEC_SYNTHETIC_HPP
#define COURSEVEC_SYNTHETIC_HPP

#include "coursevec/corpus.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace coursevec {

/// Shape of a generated corpus. Every count must be positive except the
/// ground-truth sizes, which may be zero.
struct SyntheticSpec {
    int n_students = 500;
    int n_topics = 2;
    int courses_per_topic = 10;
    int semesters = 4;
    int basket_size = 4;
    int n_equiv_pairs = 4;
    int n_analogy_quads = 6;
    std::uint64_t seed = 42;
};

struct SyntheticGroundTruth {
    std::vector<EquivalencyPair> equivalency_pairs;
    std::vector<AnalogyQuad> analogy_quads;
};

struct SyntheticDataset {
    EnrollmentCorpus corpus;
    SyntheticGroundTruth truth;
    std::map<CourseId, int> topic_of;
    std::vector<std::string> boilerplate;
};

/// Probability that a basket slot is drawn from the student's own topic.
inline constexpr double kTopicAffinity = 0.8;

/// Builds a topic-clustered catalog and enrollment history.
///
/// Each topic owns `courses_per_topic` courses split over a few departments.
/// Equivalency pairs are planted as (regular, honors) twins that share a
/// topic, department and description template. A pair fills one basket
/// slot and each draw picks either twin with equal probability, so twins
/// never share a basket but see the same neighbours. Analogy quads combine two twin pairs,
/// preferring pairs from different topics: (base_a, honors_a, base_b, honors_b).
///
/// Throws DataError when the spec cannot be satisfied.
SyntheticDataset generate_synthetic_corpus(const SyntheticSpec& spec);

}  // namespace coursevec

#endif
