#include "coursevec/service.hpp"

#include "coursevec/error.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <charconv>
#include <ctime>
#include <fcntl.h>
#include <fstream>
#include <unistd.h>

namespace coursevec {

using json = nlohmann::json;
namespace fs = std::filesystem;

void ModelRegistry::validate() const {
    for (const auto& [role, label] : {std::pair{"equivalency_model", &equivalency_model},
                                      std::pair{"bow_div_model", &bow_div_model}}) {
        if (!models.contains(*label))
            throw DataError(std::string("registry role ") + role + " names unknown model '" + *label + "'");
    }
    for (const auto& [label, set] : models)
        if (set.empty()) throw DataError("registry model '" + label + "' is empty");
    if (catalog.empty()) throw DataError("registry catalog is empty");
}

ModelRegistry ModelRegistry::load(const fs::path& config) {
    std::ifstream in(config);
    if (!in) throw DataError("cannot open registry config " + config.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError("registry config: " + std::string(e.what()));
    }
    const auto base = config.parent_path();
    auto resolve = [&](const std::string& p) {
        const fs::path path(p);
        return path.is_absolute() ? path : base / path;
    };

    ModelRegistry reg;
    try {
        const auto catalog_path = resolve(j.at("catalog").get<std::string>());
        std::ifstream cat(catalog_path);
        if (!cat) throw DataError("cannot open catalog " + catalog_path.string());
        reg.catalog = read_catalog(cat);
        for (const auto& [label, path] : j.at("models").items()) {
            std::ifstream model_in(resolve(path.get<std::string>()));
            if (!model_in) throw DataError("cannot open model '" + label + "'");
            reg.models.emplace(label, load_embeddings(model_in, label));
        }
        reg.equivalency_model = j.at("roles").at("equivalency_model").get<std::string>();
        reg.bow_div_model = j.at("roles").at("bow_div_model").get<std::string>();
    } catch (const json::exception& e) {
        throw DataError("registry config: " + std::string(e.what()));
    }
    reg.validate();
    return reg;
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Response error_response(int status, std::string code, std::string message, json extra = json::object()) {
    json body = {{"error", std::move(code)}, {"message", std::move(message)}};
    body.update(extra);
    return {status, std::move(body)};
}

}  // namespace

std::vector<const Course*> search_courses(const Catalog& catalog, std::string_view query,
                                          std::size_t limit) {
    const auto q = lower(query);
    if (q.empty() || limit == 0) return {};
    std::vector<std::pair<long, const Course*>> hits;
    for (const auto& [id, course] : catalog) {
        const auto lid = lower(id);
        long best = -1;
        if (lid == q) {
            best = -1;
        } else {
            std::size_t pos = std::string::npos;
            for (const auto& field : {lid, lower(course.title), lower(course.department)})
                pos = std::min(pos, field.find(q));
            if (pos == std::string::npos) continue;
            best = static_cast<long>(pos);
        }
        hits.emplace_back(best, &course);
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second->id < b.second->id;
    });
    std::vector<const Course*> out;
    for (std::size_t i = 0; i < hits.size() && i < limit; ++i) out.push_back(hits[i].second);
    return out;
}

RatingLog::RatingLog(fs::path path) : path_(std::move(path)) {
    {
        std::ifstream existing(path_);
        std::string line;
        while (std::getline(existing, line))
            if (!line.empty()) ++next_seq_;
    }
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw DataError("cannot open ratings log " + path_.string());
}

RatingLog::~RatingLog() {
    if (fd_ >= 0) ::close(fd_);
}

std::uint64_t RatingLog::append(json record) {
    std::lock_guard lock(mutex_);
    const auto seq = next_seq_;
    record["seq"] = seq;
    const std::string line = record.dump() + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
        const auto n = ::write(fd_, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw DataError("write to ratings log failed");
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw DataError("fsync of ratings log failed");
    ++next_seq_;
    return seq;
}

Service::Service(ModelRegistry registry, fs::path ratings_log)
    : registry_(std::move(registry)), ratings_(std::move(ratings_log)) {
    registry_.validate();
}

Response Service::health() const { return {200, {{"status", "ok"}}}; }

Response Service::models() const {
    json out = json::array();
    for (const auto& [label, set] : registry_.models) {
        json role = nullptr;
        if (label == registry_.equivalency_model)
            role = "equivalency_model";
        else if (label == registry_.bow_div_model)
            role = "bow_div_model";
        out.push_back({{"label", label}, {"dim", set.dim()}, {"n_courses", set.size()}, {"role", role}});
    }
    return {200, out};
}

Response Service::search(std::string_view query, std::optional<std::string_view> limit_text) const {
    std::size_t limit = 10;
    if (limit_text) {
        const auto [ptr, ec] =
            std::from_chars(limit_text->data(), limit_text->data() + limit_text->size(), limit);
        if (ec != std::errc{} || ptr != limit_text->data() + limit_text->size() || limit > 100)
            return error_response(400, "bad_request", "limit must be an integer in [0, 100]",
                                  {{"fields", {"limit"}}});
    }
    json out = json::array();
    for (const Course* c : search_courses(registry_.catalog, query, limit)) {
        out.push_back({{"id", c->id}, {"department", c->department}, {"number", c->number},
                       {"title", c->title}});
    }
    return {200, out};
}

json Service::course_summary(const Course& c) const {
    return {{"id", c.id},         {"department", c.department},   {"number", c.number},
            {"title", c.title},   {"description", c.description}};
}

json Service::panel_json(const RecommendationList& list) const {
    json entries = json::array();
    for (const auto& e : list.entries) {
        const auto it = registry_.catalog.find(e.id);
        json item = it != registry_.catalog.end()
                        ? course_summary(it->second)
                        : json{{"id", e.id}, {"department", e.department}, {"number", ""},
                               {"title", ""}, {"description", ""}};
        item["score"] = e.score;
        item["rank"] = e.rank;
        entries.push_back(std::move(item));
    }
    return entries;
}

Response Service::explore(std::string_view course_id) const {
    const CourseId id(course_id);
    if (id.empty())
        return error_response(400, "bad_request", "course_id is required", {{"fields", {"course_id"}}});
    ExploreView view;
    try {
        view = build_explore_view(id, registry_.equivalency(), registry_.bow_div(), registry_.catalog);
    } catch (const UnknownCourse&) {
        return error_response(404, "unknown_course", "no such course: " + id, {{"course_id", id}});
    }
    json body = {
        {"favorite", course_summary(registry_.catalog.at(id))},
        {"within_department", panel_json(view.within_department)},
        {"across_departments", panel_json(view.across_departments)},
        {"models",
         {{"within_department", registry_.equivalency_model},
          {"across_departments", registry_.bow_div_model}}},
        {"panel_notes",
         {{"within_department", view.within_department.note},
          {"across_departments", view.across_departments.note}}},
    };
    return {200, std::move(body)};
}

Response Service::post_rating(std::string_view body_text) {
    json body;
    try {
        body = json::parse(body_text);
    } catch (const json::parse_error&) {
        return error_response(400, "validation_failed", "body is not valid JSON", {{"fields", json::array()}});
    }
    if (!body.is_object())
        return error_response(400, "validation_failed", "body must be an object", {{"fields", json::array()}});

    std::vector<std::string> bad;
    json record = json::object();
    auto need_string = [&](const char* key) {
        if (!body.contains(key) || !body[key].is_string() || body[key].get<std::string>().empty()) {
            bad.emplace_back(key);
            return;
        }
        record[key] = body[key];
    };
    auto need_course = [&](const char* key) {
        if (!body.contains(key) || !body[key].is_string() ||
            !registry_.catalog.contains(body[key].get<std::string>())) {
            bad.emplace_back(key);
            return;
        }
        record[key] = body[key];
    };
    auto likert = [&](const char* key, bool required) {
        if (!body.contains(key) || body[key].is_null()) {
            if (required) bad.emplace_back(key);
            return;
        }
        const auto& v = body[key];
        if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 5) {
            bad.emplace_back(key);
            return;
        }
        record[key] = v;
    };

    need_string("session_id");
    need_course("favorite");
    need_course("rated_course");
    if (!body.contains("panel") || !body["panel"].is_string() ||
        (body["panel"] != "within" && body["panel"] != "across"))
        bad.emplace_back("panel");
    else
        record["panel"] = body["panel"];
    likert("unexpectedness", true);
    likert("interest", true);
    likert("novelty", true);
    likert("list_diversity", false);
    likert("list_commonality", false);
    if (body.contains("commonality_text") && !body["commonality_text"].is_null()) {
        if (!body["commonality_text"].is_string())
            bad.emplace_back("commonality_text");
        else
            record["commonality_text"] = body["commonality_text"];
    }
    if (body.contains("timestamp") && !body["timestamp"].is_null() && !body["timestamp"].is_string())
        bad.emplace_back("timestamp");

    if (!bad.empty())
        return error_response(400, "validation_failed", "invalid rating fields", {{"fields", bad}});

    record["timestamp"] =
        body.contains("timestamp") && body["timestamp"].is_string() ? body["timestamp"] : json(utc_now());
    try {
        const auto seq = ratings_.append(std::move(record));
        return {200, {{"seq", seq}}};
    } catch (const DataError& e) {
        return error_response(500, "storage_error", e.what());
    }
}

void mount_routes(httplib::Server& server, Service& service) {
    auto send = [](httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.Get("/health", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, service.health());
    });
    server.Get("/api/models", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, service.models());
    });
    server.Get("/api/courses", [&service, send](const httplib::Request& req, httplib::Response& res) {
        std::optional<std::string> limit;
        if (req.has_param("limit")) limit = req.get_param_value("limit");
        const auto q = req.get_param_value("q");
        send(res, service.search(q, limit ? std::optional<std::string_view>(*limit) : std::nullopt));
    });
    server.Get("/api/explore", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.explore(req.get_param_value("course_id")));
    });
    server.Post("/api/ratings", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.post_rating(req.body));
    });
}

}  // namespace coursevec
