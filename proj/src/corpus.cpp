#include "coursevec/corpus.hpp"

#include "coursevec/error.hpp"
#include "coursevec/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace coursevec {

using json = nlohmann::json;

namespace {

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string line_prefix(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

template <typename Row>
std::vector<Row> read_id_csv(std::istream& in, std::size_t width, const char* what,
                             Row (*make)(std::vector<CourseId>&)) {
    std::vector<Row> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(strip_cr(line));
        if (text.empty()) continue;
        auto fields = split_commas(text);
        if (fields.size() != width)
            throw DataError(line_prefix(line_no) + "expected " + std::to_string(width) +
                            " columns in " + what + " file");
        std::vector<CourseId> ids;
        for (auto f : fields) ids.push_back(escape_course_id(trim(f)));
        // A header row is recognised by its first column name.
        if (line_no == 1 && (ids[0] == "course_a" || ids[0] == "c1")) continue;
        if (std::any_of(ids.begin(), ids.end(), [](const auto& id) { return id.empty(); }))
            throw DataError(line_prefix(line_no) + "empty course id in " + what + " file");
        rows.push_back(make(ids));
    }
    return rows;
}

}  // namespace

std::string_view to_string(Term term) {
    switch (term) {
        case Term::Spring: return "SPRING";
        case Term::Summer: return "SUMMER";
        case Term::Fall: return "FALL";
    }
    return "SPRING";
}

std::optional<Term> parse_term(std::string_view text) {
    std::string upper(text);
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper == "SPRING") return Term::Spring;
    if (upper == "SUMMER") return Term::Summer;
    if (upper == "FALL") return Term::Fall;
    return std::nullopt;
}

CourseId escape_course_id(std::string_view raw) {
    CourseId id(trim(raw));
    for (char& c : id)
        if (std::isspace(static_cast<unsigned char>(c))) c = '_';
    return id;
}

Catalog read_catalog(std::istream& in) {
    Catalog catalog;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(line_prefix(line_no) + "invalid catalog object: " + e.what());
        }
        if (!obj.is_object()) throw DataError(line_prefix(line_no) + "catalog entry is not an object");

        Course course;
        try {
            course.id = escape_course_id(obj.at("id").get<std::string>());
            course.department = obj.at("department").get<std::string>();
            course.number = obj.value("number", std::string{});
            course.title = obj.value("title", std::string{});
            course.description = obj.value("description", std::string{});
            if (obj.contains("instructors") && !obj["instructors"].is_null())
                course.instructors = obj["instructors"].get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw DataError(line_prefix(line_no) + "bad catalog field: " + e.what());
        }
        if (course.id.empty()) throw DataError(line_prefix(line_no) + "empty course id");
        if (course.department.empty())
            throw DataError(line_prefix(line_no) + "course " + course.id + " has no department");
        std::sort(course.instructors.begin(), course.instructors.end());
        course.instructors.erase(std::unique(course.instructors.begin(), course.instructors.end()),
                                 course.instructors.end());
        auto id = course.id;
        if (!catalog.emplace(id, std::move(course)).second)
            throw DataError(line_prefix(line_no) + "duplicate course id " + id);
    }
    return catalog;
}

void write_catalog(std::ostream& out, const Catalog& catalog) {
    for (const auto& [id, course] : catalog) {
        json obj = {
            {"id", course.id},
            {"department", course.department},
            {"number", course.number},
            {"title", course.title},
            {"description", course.description},
            {"instructors", course.instructors},
        };
        out << obj.dump() << '\n';
    }
}

IngestResult ingest_enrollments(std::istream& enrollments, std::istream& catalog_stream) {
    IngestResult result;
    result.corpus.catalog = read_catalog(catalog_stream);
    auto& catalog = result.corpus.catalog;
    auto& report = result.report;

    std::string line;
    if (!std::getline(enrollments, line) ||
        trim(strip_cr(line)) != "student_id,year,term,course_id")
        throw DataError("enrollment file must start with header student_id,year,term,course_id");

    std::set<EnrollmentRecord> seen;
    std::size_t line_no = 1;
    while (std::getline(enrollments, line)) {
        ++line_no;
        const auto text = strip_cr(line);
        if (trim(text).empty()) continue;
        ++report.rows_read;

        const auto fields = split_commas(text);
        if (fields.size() != 4) {
            report.warnings.push_back(line_prefix(line_no) + "expected 4 columns");
            continue;
        }
        EnrollmentRecord rec;
        rec.student_id = std::string(trim(fields[0]));
        const auto year_text = trim(fields[1]);
        const auto [ptr, ec] =
            std::from_chars(year_text.data(), year_text.data() + year_text.size(), rec.semester.year);
        const auto term = parse_term(trim(fields[2]));
        rec.course = escape_course_id(fields[3]);
        if (rec.student_id.empty() || ec != std::errc{} || ptr != year_text.data() + year_text.size() ||
            !term || rec.course.empty()) {
            report.warnings.push_back(line_prefix(line_no) + "malformed row");
            continue;
        }
        rec.semester.term = *term;
        if (!catalog.contains(rec.course)) {
            report.warnings.push_back(line_prefix(line_no) + "unknown course " + rec.course);
            continue;
        }
        if (!seen.insert(rec).second) {
            report.warnings.push_back(line_prefix(line_no) + "duplicate enrollment");
            continue;
        }
        result.corpus.records.push_back(std::move(rec));
        ++report.rows_accepted;
    }
    if (enrollments.bad()) throw DataError("read error on enrollment stream");

    for (auto& [id, course] : catalog) course.total_enrollment = 0;
    for (const auto& rec : result.corpus.records) ++catalog[rec.course].total_enrollment;
    return result;
}

IngestResult ingest_enrollments(const std::filesystem::path& enrollments,
                                const std::filesystem::path& catalog) {
    std::ifstream enroll_in(enrollments);
    if (!enroll_in) throw UsageError("cannot open enrollment file " + enrollments.string());
    std::ifstream catalog_in(catalog);
    if (!catalog_in) throw UsageError("cannot open catalog file " + catalog.string());
    return ingest_enrollments(enroll_in, catalog_in);
}

void write_enrollments(std::ostream& out, const EnrollmentCorpus& corpus) {
    out << "student_id,year,term,course_id\n";
    for (const auto& r : corpus.records)
        out << r.student_id << ',' << r.semester.year << ',' << to_string(r.semester.term) << ','
            << r.course << '\n';
}

EnrollmentCorpus filter_min_enrollment(const EnrollmentCorpus& corpus, std::int64_t min_total) {
    std::map<CourseId, std::int64_t> counts;
    for (const auto& r : corpus.records) ++counts[r.course];

    EnrollmentCorpus out;
    for (const auto& [id, course] : corpus.catalog) {
        const auto it = counts.find(id);
        const std::int64_t n = it == counts.end() ? 0 : it->second;
        if (n >= min_total) {
            auto kept = course;
            kept.total_enrollment = n;
            out.catalog.emplace(id, std::move(kept));
        }
    }
    for (const auto& r : corpus.records)
        if (out.catalog.contains(r.course)) out.records.push_back(r);
    return out;
}

std::vector<SerializedSequence> serialize_sequences(const EnrollmentCorpus& corpus,
                                                    std::uint64_t seed) {
    // student -> semester -> basket; baskets are sorted first so the shuffle
    // does not depend on record order in the input.
    std::map<std::string, std::map<Semester, std::vector<CourseId>>> history;
    for (const auto& r : corpus.records) history[r.student_id][r.semester].push_back(r.course);

    std::vector<SerializedSequence> out;
    out.reserve(history.size());
    for (auto& [student, semesters] : history) {
        SerializedSequence seq{student, {}};
        for (auto& [semester, basket] : semesters) {
            std::sort(basket.begin(), basket.end());
            std::uint64_t key = fnv1a(student);
            key = mix64(key ^ seed);
            key = mix64(key ^ (static_cast<std::uint64_t>(semester.year) * 4 +
                               static_cast<std::uint64_t>(semester.term)));
            Rng rng(key);
            shuffle(basket, rng);
            seq.course_ids.insert(seq.course_ids.end(), basket.begin(), basket.end());
        }
        out.push_back(std::move(seq));
    }
    return out;
}

std::vector<EquivalencyPair> read_equivalency_pairs(std::istream& in) {
    return read_id_csv<EquivalencyPair>(in, 2, "equivalency", [](std::vector<CourseId>& ids) {
        return EquivalencyPair{std::move(ids[0]), std::move(ids[1])};
    });
}

std::vector<AnalogyQuad> read_analogy_quads(std::istream& in) {
    return read_id_csv<AnalogyQuad>(in, 4, "analogy", [](std::vector<CourseId>& ids) {
        return AnalogyQuad{std::move(ids[0]), std::move(ids[1]), std::move(ids[2]), std::move(ids[3])};
    });
}

void write_equivalency_pairs(std::ostream& out, const std::vector<EquivalencyPair>& pairs) {
    out << "course_a,course_b\n";
    for (const auto& [a, b] : pairs) out << a << ',' << b << '\n';
}

void write_analogy_quads(std::ostream& out, const std::vector<AnalogyQuad>& quads) {
    out << "c1,c2,c3,c4\n";
    for (const auto& q : quads) out << q.c1 << ',' << q.c2 << ',' << q.c3 << ',' << q.c4 << '\n';
}

}  // namespace coursevec
