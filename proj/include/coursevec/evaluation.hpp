#ifndef COURSEVEC_EVALUATION_HPP
#define COURSEVEC_EVALUATION_HPP

#include "coursevec/corpus.hpp"
#include "coursevec/vectorspace.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace coursevec {

struct EquivalencyReport {
    double mean_rank = 0.0;
    double median_rank = 0.0;
    double recall_at_10 = 0.0;
    std::size_t n_pairs_evaluated = 0;
    std::size_t n_skipped = 0;
    /// Rank of every evaluated pair, in input order.
    std::vector<std::size_t> ranks;
};

struct AnalogyReport {
    double accuracy = 0.0;  // recall@1
    double recall_at_10 = 0.0;
    std::size_t n_quads_evaluated = 0;
    std::size_t n_skipped = 0;
};

/// Rank of `target` among all courses ordered by cosine to `probe` (probe
/// excluded, rank 1 = most similar). A zero probe or zero target gets the
/// pessimal rank, set.size(). Both ids must be in the set.
std::size_t equivalency_rank(const DenseEmbeddingSet& set, const CourseId& probe,
                             const CourseId& target);

/// Pairs are ordered: the first course is the probe. Pairs naming a course
/// missing from the set are skipped. Throws DataError when nothing is
/// evaluable.
EquivalencyReport eval_equivalency(const DenseEmbeddingSet& set,
                                   const std::vector<EquivalencyPair>& pairs);

/// A quad is a hit@k when c4 is among the top k of
/// analogy_query(c1, c2, c3). Quads naming a missing course are skipped.
/// Throws DataError when nothing is evaluable.
AnalogyReport eval_analogy(const DenseEmbeddingSet& set, const std::vector<AnalogyQuad>& quads);

nlohmann::json to_json(const EquivalencyReport& r);
nlohmann::json to_json(const AnalogyReport& r);

struct LabeledEquivalency {
    std::string model;
    EquivalencyReport report;
};

struct LabeledAnalogy {
    std::string model;
    AnalogyReport report;
};

/// Plain-text tables with the columns Model / Mean / Median / Recall@10 and
/// Model / Accuracy / Recall@10.
void print_equivalency_table(std::ostream& out, const std::vector<LabeledEquivalency>& rows);
void print_analogy_table(std::ostream& out, const std::vector<LabeledAnalogy>& rows);

}  // namespace coursevec

#endif
