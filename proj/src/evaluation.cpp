#include "coursevec/evaluation.hpp"

#include "coursevec/error.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace coursevec {

std::size_t equivalency_rank(const DenseEmbeddingSet& set, const CourseId& probe,
                             const CourseId& target) {
    const auto pi = set.index_of(probe);
    const auto ti = set.index_of(target);
    const std::size_t pessimal = set.size();
    if (set.norm(pi) == 0.0 || set.norm(ti) == 0.0) return pessimal;

    const auto prow = set.row(pi);
    auto score = [&](std::size_t i) {
        return ranking_score(dot(prow, set.row(i)) / (set.norm(pi) * set.norm(i)));
    };
    const RankedEntry t{target, score(ti)};
    std::size_t ahead = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (i == pi || i == ti || set.norm(i) == 0.0) continue;
        if (ranks_before({set.courses()[i], score(i)}, t)) ++ahead;
    }
    return ahead + 1;
}

EquivalencyReport eval_equivalency(const DenseEmbeddingSet& set,
                                   const std::vector<EquivalencyPair>& pairs) {
    EquivalencyReport r;
    std::size_t hits = 0;
    double total = 0.0;
    for (const auto& [a, b] : pairs) {
        if (!set.contains(a) || !set.contains(b) || a == b) {
            ++r.n_skipped;
            continue;
        }
        const auto rank = equivalency_rank(set, a, b);
        r.ranks.push_back(rank);
        total += static_cast<double>(rank);
        if (rank <= 10) ++hits;
    }
    r.n_pairs_evaluated = r.ranks.size();
    if (r.n_pairs_evaluated == 0) throw DataError("no equivalency pair could be evaluated");

    const double n = static_cast<double>(r.n_pairs_evaluated);
    r.mean_rank = total / n;
    r.recall_at_10 = static_cast<double>(hits) / n;
    auto sorted = r.ranks;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    r.median_rank = sorted.size() % 2 == 1
                        ? static_cast<double>(sorted[mid])
                        : (static_cast<double>(sorted[mid - 1]) + static_cast<double>(sorted[mid])) / 2.0;
    return r;
}

AnalogyReport eval_analogy(const DenseEmbeddingSet& set, const std::vector<AnalogyQuad>& quads) {
    AnalogyReport r;
    std::size_t hit1 = 0, hit10 = 0;
    for (const auto& q : quads) {
        if (!set.contains(q.c1) || !set.contains(q.c2) || !set.contains(q.c3) || !set.contains(q.c4)) {
            ++r.n_skipped;
            continue;
        }
        ++r.n_quads_evaluated;
        const auto top = analogy_query(set, q.c1, q.c2, q.c3, 10);
        for (std::size_t i = 0; i < top.entries.size(); ++i) {
            if (top.entries[i].id != q.c4) continue;
            if (i == 0) ++hit1;
            ++hit10;
            break;
        }
    }
    if (r.n_quads_evaluated == 0) throw DataError("no analogy quad could be evaluated");
    const double n = static_cast<double>(r.n_quads_evaluated);
    r.accuracy = static_cast<double>(hit1) / n;
    r.recall_at_10 = static_cast<double>(hit10) / n;
    return r;
}

nlohmann::json to_json(const EquivalencyReport& r) {
    return {{"mean_rank", r.mean_rank},
            {"median_rank", r.median_rank},
            {"recall_at_10", r.recall_at_10},
            {"n_pairs_evaluated", r.n_pairs_evaluated},
            {"n_skipped", r.n_skipped}};
}

nlohmann::json to_json(const AnalogyReport& r) {
    return {{"accuracy", r.accuracy},
            {"recall_at_10", r.recall_at_10},
            {"n_quads_evaluated", r.n_quads_evaluated},
            {"n_skipped", r.n_skipped}};
}

namespace {

std::size_t model_width(const auto& rows) {
    std::size_t w = 5;
    for (const auto& row : rows) w = std::max(w, row.model.size());
    return w;
}

}  // namespace

void print_equivalency_table(std::ostream& out, const std::vector<LabeledEquivalency>& rows) {
    const int w = static_cast<int>(model_width(rows));
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s  %10s  %10s  %10s\n", w, "Model", "Mean", "Median", "Recall@10");
    out << buf;
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%-*s  %10.2f  %10.1f  %10.4f\n", w, row.model.c_str(),
                      row.report.mean_rank, row.report.median_rank, row.report.recall_at_10);
        out << buf;
    }
}

void print_analogy_table(std::ostream& out, const std::vector<LabeledAnalogy>& rows) {
    const int w = static_cast<int>(model_width(rows));
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s  %10s  %10s\n", w, "Model", "Accuracy", "Recall@10");
    out << buf;
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%-*s  %10.4f  %10.4f\n", w, row.model.c_str(),
                      row.report.accuracy, row.report.recall_at_10);
        out << buf;
    }
}

}  // namespace coursevec
