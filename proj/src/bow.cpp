#include "coursevec/bow.hpp"

#include "coursevec/error.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

namespace coursevec {

TermIndex TermIndex::build(const std::vector<Document>& documents) {
    if (documents.empty()) throw DataError("cannot build a term index from zero documents");
    std::map<std::string, std::int64_t, std::less<>> df;
    for (const auto& doc : documents) {
        const std::set<std::string_view> distinct(doc.begin(), doc.end());
        for (auto term : distinct) ++df[std::string(term)];
    }
    TermIndex index;
    index.n_documents_ = documents.size();
    for (auto& [term, count] : df) {
        index.columns_.emplace(term, index.terms_.size());
        index.terms_.push_back(term);
        index.df_.push_back(count);
    }
    return index;
}

std::optional<std::size_t> TermIndex::column(std::string_view term) const {
    const auto it = columns_.find(term);
    if (it == columns_.end()) return std::nullopt;
    return it->second;
}

std::int64_t TermIndex::document_frequency(std::string_view term) const {
    const auto c = column(term);
    return c ? df_[*c] : 0;
}

double TermIndex::idf(std::size_t column) const {
    return std::log(static_cast<double>(n_documents_) / static_cast<double>(df_[column]));
}

std::string_view to_string(Weighting w) {
    switch (w) {
        case Weighting::Tf: return "tf";
        case Weighting::Binary: return "binary";
        case Weighting::TfIdf: return "tfidf";
    }
    return "tf";
}

std::optional<Weighting> parse_weighting(std::string_view text) {
    if (text == "tf") return Weighting::Tf;
    if (text == "binary") return Weighting::Binary;
    if (text == "tfidf") return Weighting::TfIdf;
    return std::nullopt;
}

SparseVector vectorize(const Document& document, const TermIndex& index, Weighting scheme) {
    std::map<std::size_t, std::int64_t> counts;
    for (const auto& token : document)
        if (const auto c = index.column(token)) ++counts[*c];

    SparseVector out;
    out.dimension = index.size();
    for (const auto& [col, tf] : counts) {
        double w = 0.0;
        switch (scheme) {
            case Weighting::Tf: w = static_cast<double>(tf); break;
            case Weighting::Binary: w = 1.0; break;
            case Weighting::TfIdf: w = static_cast<double>(tf) * index.idf(col); break;
        }
        if (w != 0.0) out.entries.emplace_back(col, w);
    }
    return out;
}

std::optional<double> sparse_cosine(const SparseVector& u, const SparseVector& v) {
    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (const auto& e : u.entries) uu += e.second * e.second;
    for (const auto& e : v.entries) vv += e.second * e.second;
    if (uu == 0.0 || vv == 0.0) return std::nullopt;
    std::size_t i = 0, j = 0;
    while (i < u.entries.size() && j < v.entries.size()) {
        if (u.entries[i].first < v.entries[j].first)
            ++i;
        else if (u.entries[i].first > v.entries[j].first)
            ++j;
        else
            uv += u.entries[i++].second * v.entries[j++].second;
    }
    const double c = uv / (std::sqrt(uu) * std::sqrt(vv));
    return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

BowModel build_bow_model(const Catalog& catalog, Weighting scheme, const TextPipeline& pipeline) {
    BowModel model;
    std::vector<Document> docs;
    docs.reserve(catalog.size());
    for (const auto& [id, course] : catalog) {
        model.courses.push_back(id);
        docs.push_back(preprocess_description(course.description, pipeline.boilerplate,
                                              pipeline.stopwords));
    }
    model.index = TermIndex::build(docs);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        model.vectors.push_back(vectorize(docs[i], model.index, scheme));
        if (model.vectors.back().empty()) model.empty_vectors.push_back(model.courses[i]);
    }
    return model;
}

DenseEmbeddingSet densify(const BowModel& model, std::string provenance) {
    // An all-empty catalog still needs a valid dimension.
    const std::size_t dim = std::max<std::size_t>(1, model.index.size());
    std::vector<double> values(model.courses.size() * dim, 0.0);
    for (std::size_t i = 0; i < model.vectors.size(); ++i)
        for (const auto& [col, w] : model.vectors[i].entries)
            values[i * dim + col] = w;
    return DenseEmbeddingSet(dim, model.courses, std::move(values), std::move(provenance));
}

void write_sparse_triples(std::ostream& out, const BowModel& model) {
    out << "course_id,column,weight\n";
    char buf[32];
    for (std::size_t i = 0; i < model.vectors.size(); ++i)
        for (const auto& [col, w] : model.vectors[i].entries) {
            std::snprintf(buf, sizeof buf, "%.17g", w);
            out << model.courses[i] << ',' << col << ',' << buf << '\n';
        }
}

}  // namespace coursevec
