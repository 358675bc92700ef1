#ifndef COURSEVEC_CORPUS_HPP
#define COURSEVEC_CORPUS_HPP

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace coursevec {

/// Opaque course key such as "COMPSCI_61A". Never contains whitespace.
using CourseId = std::string;

enum class Term { Spring = 0, Summer = 1, Fall = 2 };

std::string_view to_string(Term term);
std::optional<Term> parse_term(std::string_view text);

/// Academic semester, ordered by year and then Spring < Summer < Fall.
struct Semester {
    int year = 0;
    Term term = Term::Spring;

    auto operator<=>(const Semester&) const = default;
};

struct Course {
    CourseId id;
    std::string department;
    std::string number;
    std::string title;
    std::string description;
    std::vector<std::string> instructors;  // sorted, unique
    std::int64_t total_enrollment = 0;
};

using Catalog = std::map<CourseId, Course>;

struct EnrollmentRecord {
    std::string student_id;
    Semester semester;
    CourseId course;

    auto operator<=>(const EnrollmentRecord&) const = default;
};

struct EnrollmentCorpus {
    std::vector<EnrollmentRecord> records;
    Catalog catalog;
};

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t rows_accepted = 0;
    std::vector<std::string> warnings;
};

struct IngestResult {
    EnrollmentCorpus corpus;
    IngestReport report;
};

/// Replaces whitespace in an id with underscores so ids survive the
/// space-separated embedding format.
CourseId escape_course_id(std::string_view raw);

/// Reads a catalog with one JSON object per line. Throws DataError on a
/// malformed line, a missing department, or a duplicate id.
Catalog read_catalog(std::istream& in);
void write_catalog(std::ostream& out, const Catalog& catalog);

/// Parses `student_id,year,term,course_id` rows against the catalog.
/// Malformed rows, unknown courses and duplicate triples are rejected with a
/// warning; the header line is mandatory. total_enrollment is recomputed
/// from the accepted rows.
IngestResult ingest_enrollments(std::istream& enrollments, std::istream& catalog);
IngestResult ingest_enrollments(const std::filesystem::path& enrollments,
                                const std::filesystem::path& catalog);

void write_enrollments(std::ostream& out, const EnrollmentCorpus& corpus);

/// Keeps courses with at least `min_total` records, along with their records.
EnrollmentCorpus filter_min_enrollment(const EnrollmentCorpus& corpus, std::int64_t min_total);

struct SerializedSequence {
    std::string student_id;
    std::vector<CourseId> course_ids;

    bool operator==(const SerializedSequence&) const = default;
};

/// One chronological sequence per student, sorted by student id. Courses of
/// the same semester are shuffled with a seed derived from
/// (seed, student, semester), so the result is a pure function of its inputs.
std::vector<SerializedSequence> serialize_sequences(const EnrollmentCorpus& corpus,
                                                    std::uint64_t seed);

using EquivalencyPair = std::pair<CourseId, CourseId>;

struct AnalogyQuad {
    CourseId c1, c2, c3, c4;

    bool operator==(const AnalogyQuad&) const = default;
};

std::vector<EquivalencyPair> read_equivalency_pairs(std::istream& in);
std::vector<AnalogyQuad> read_analogy_quads(std::istream& in);
void write_equivalency_pairs(std::ostream& out, const std::vector<EquivalencyPair>& pairs);
void write_analogy_quads(std::ostream& out, const std::vector<AnalogyQuad>& quads);

}  // namespace coursevec

#endif
