#ifndef COURSEVEC_SERVICE_HPP
#define COURSEVEC_SERVICE_HPP

#include "coursevec/corpus.hpp"
#include "coursevec/recommender.hpp"
#include "coursevec/vectorspace.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace httplib {
class Server;
}

namespace coursevec {

/// Models served by the HTTP facade, loaded once at startup.
///
/// Config file (JSON; relative paths resolve against its directory):
///   {
///     "catalog": "catalog.jsonl",
///     "models": {"tfidf": "tfidf.txt", "equivalency": "hybrid.txt"},
///     "roles": {"equivalency_model": "equivalency", "bow_div_model": "tfidf"}
///   }
struct ModelRegistry {
    std::map<std::string, DenseEmbeddingSet> models;
    std::string equivalency_model;
    std::string bow_div_model;
    Catalog catalog;

    /// Throws DataError if a role names a missing model or a model is empty.
    void validate() const;

    const DenseEmbeddingSet& equivalency() const { return models.at(equivalency_model); }
    const DenseEmbeddingSet& bow_div() const { return models.at(bow_div_model); }

    static ModelRegistry load(const std::filesystem::path& config);
};

/// Case-insensitive substring search over id, title and department. Results
/// are ordered by earliest match position (an exact id match first), then id.
std::vector<const Course*> search_courses(const Catalog& catalog, std::string_view query,
                                          std::size_t limit);

/// Append-only JSON-lines log. Each accepted rating is written and fsynced
/// before its sequence number is returned.
class RatingLog {
public:
    explicit RatingLog(std::filesystem::path path);
    ~RatingLog();
    RatingLog(const RatingLog&) = delete;
    RatingLog& operator=(const RatingLog&) = delete;

    std::uint64_t append(nlohmann::json record);
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::mutex mutex_;
    int fd_ = -1;
    std::uint64_t next_seq_ = 1;
};

struct Response {
    int status = 200;
    nlohmann::json body;
};

/// Endpoint logic, independent of the HTTP transport.
class Service {
public:
    Service(ModelRegistry registry, std::filesystem::path ratings_log);

    Response health() const;
    Response models() const;
    Response search(std::string_view query, std::optional<std::string_view> limit) const;
    Response explore(std::string_view course_id) const;
    Response post_rating(std::string_view body);

    const ModelRegistry& registry() const noexcept { return registry_; }

private:
    nlohmann::json course_summary(const Course& c) const;
    nlohmann::json panel_json(const RecommendationList& list) const;

    ModelRegistry registry_;
    RatingLog ratings_;
};

/// Registers GET /health, /api/models, /api/courses, /api/explore and
/// POST /api/ratings on `server`.
void mount_routes(httplib::Server& server, Service& service);

}  // namespace coursevec

#endif
