#ifndef COURSEVEC_BOW_HPP
#define COURSEVEC_BOW_HPP

#include "coursevec/corpus.hpp"
#include "coursevec/text.hpp"
#include "coursevec/vectorspace.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace coursevec {

using Document = std::vector<std::string>;

/// Vocabulary over a fixed document collection. Columns follow the sorted
/// term order.
class TermIndex {
public:
    /// Throws DataError for an empty collection.
    static TermIndex build(const std::vector<Document>& documents);

    std::size_t size() const noexcept { return terms_.size(); }
    std::size_t n_documents() const noexcept { return n_documents_; }
    const std::vector<std::string>& terms() const noexcept { return terms_; }

    std::optional<std::size_t> column(std::string_view term) const;
    /// Number of documents containing `term`; 0 when not indexed.
    std::int64_t document_frequency(std::string_view term) const;
    std::int64_t document_frequency(std::size_t column) const { return df_[column]; }

    /// ln(N / df). Natural log, no smoothing.
    double idf(std::size_t column) const;

private:
    std::map<std::string, std::size_t, std::less<>> columns_;
    std::vector<std::string> terms_;
    std::vector<std::int64_t> df_;
    std::size_t n_documents_ = 0;
};

inline TermIndex build_term_index(const std::vector<Document>& documents) {
    return TermIndex::build(documents);
}

enum class Weighting { Tf, Binary, TfIdf };

std::string_view to_string(Weighting w);
std::optional<Weighting> parse_weighting(std::string_view text);

/// Columns strictly increasing, weights never zero.
struct SparseVector {
    std::size_t dimension = 0;
    std::vector<std::pair<std::size_t, double>> entries;

    bool empty() const noexcept { return entries.empty(); }
};

/// Out-of-vocabulary tokens are ignored.
SparseVector vectorize(const Document& document, const TermIndex& index, Weighting scheme);

std::optional<double> sparse_cosine(const SparseVector& u, const SparseVector& v);

/// Bag-of-words representation of a whole catalog.
struct BowModel {
    TermIndex index;
    std::vector<CourseId> courses;
    std::vector<SparseVector> vectors;
    /// Courses whose vector has no non-zero weight (empty description, or
    /// only terms every document shares under tf-idf). They are kept as zero
    /// rows and are unrankable.
    std::vector<CourseId> empty_vectors;
};

struct TextPipeline {
    std::vector<std::string> boilerplate;
    WordSet stopwords = default_stopwords();
};

BowModel build_bow_model(const Catalog& catalog, Weighting scheme, const TextPipeline& pipeline);

/// Densified form, usable wherever learned embeddings are.
DenseEmbeddingSet densify(const BowModel& model, std::string provenance);

/// Sparse dump as `course_id,column,weight` rows.
void write_sparse_triples(std::ostream& out, const BowModel& model);

}  // namespace coursevec

#endif
