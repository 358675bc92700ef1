#include "coursevec/cli.hpp"

#include "coursevec/bow.hpp"
#include "coursevec/corpus.hpp"
#include "coursevec/course2vec.hpp"
#include "coursevec/error.hpp"
#include "coursevec/evaluation.hpp"
#include "coursevec/io.hpp"
#include "coursevec/recommender.hpp"
#include "coursevec/service.hpp"
#include "coursevec/synthetic.hpp"
#include "coursevec/train_config_json.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>

namespace coursevec {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct SynthOptions {
    SyntheticSpec spec;
    std::string out;
};

struct TrainOptions {
    std::string enrollments;
    std::string catalog;
    std::string config;
    std::int64_t min_enrollment = 20;
    std::string factors = "none";
    TrainConfig cfg;
    std::string mode = "negative_sampling";
    std::string out;
    std::string embeddings;
    std::string variant = "input";
    std::string report;
};

struct BowOptions {
    std::string catalog;
    std::string scheme = "tfidf";
    std::string stopwords;
    std::string boilerplate;
    std::string out;
    std::string format = "dense";
};

struct CombineOptions {
    std::string a;
    std::string b;
    bool normalize = false;
    std::string out;
};

struct EvalOptions {
    std::string embeddings;
    std::string equivalency;
    std::string analogy;
    std::string label;
    std::string json_out;
};

struct RecommendOptions {
    std::string embeddings;
    std::string catalog;
    std::string favorite;
    std::size_t k = 10;
    bool diversify = false;
    bool exclude_own_department = false;
    bool exclude_graduate = false;
    std::string allow_list;
};

struct ServeOptions {
    std::string registry;
    std::string listen = "127.0.0.1:8080";
    std::string ratings_log = "ratings.jsonl";
};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    return in;
}

void write_json_file(const fs::path& path, const json& j) {
    write_file_atomically(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

int cmd_synth(const SynthOptions& o, std::ostream& out) {
    const auto data = generate_synthetic_corpus(o.spec);
    const fs::path dir(o.out);
    fs::create_directories(dir);
    write_file_atomically(dir / "enrollments.csv", [&](std::ostream& s) { write_enrollments(s, data.corpus); });
    write_file_atomically(dir / "catalog.jsonl", [&](std::ostream& s) { write_catalog(s, data.corpus.catalog); });
    write_file_atomically(dir / "equivalency.csv",
                          [&](std::ostream& s) { write_equivalency_pairs(s, data.truth.equivalency_pairs); });
    write_file_atomically(dir / "analogy.csv",
                          [&](std::ostream& s) { write_analogy_quads(s, data.truth.analogy_quads); });
    write_file_atomically(dir / "boilerplate.txt", [&](std::ostream& s) {
        for (const auto& line : data.boilerplate) s << line << '\n';
    });
    out << "wrote " << data.corpus.catalog.size() << " courses, " << data.corpus.records.size()
        << " enrollments, " << data.truth.equivalency_pairs.size() << " equivalency pairs, "
        << data.truth.analogy_quads.size() << " analogy quads to " << dir.string() << '\n';
    return kExitOk;
}

std::vector<Factor> parse_factor_list(const std::string& text) {
    std::vector<Factor> factors;
    if (text == "none" || text.empty()) return factors;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const auto f = parse_factor(item);
        if (!f) throw UsageError("unknown factor '" + item + "' (expected instructor, department or none)");
        factors.push_back(*f);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    std::sort(factors.begin(), factors.end());
    factors.erase(std::unique(factors.begin(), factors.end()), factors.end());
    return factors;
}

int cmd_train(const TrainOptions& o, const CLI::App& app, std::ostream& out, std::ostream& err) {
    TrainConfig cfg;
    if (!o.config.empty()) cfg = load_train_config(o.config);
    auto given = [&](const char* name) { return app.count(name) > 0; };
    if (given("--dim")) cfg.dim = o.cfg.dim;
    if (given("--window")) cfg.window = o.cfg.window;
    if (given("--epochs")) cfg.epochs = o.cfg.epochs;
    if (given("--initial-lr")) cfg.initial_lr = o.cfg.initial_lr;
    if (given("--min-lr")) cfg.min_lr = o.cfg.min_lr;
    if (given("--negatives")) cfg.negatives = o.cfg.negatives;
    if (given("--seed")) cfg.seed = o.cfg.seed;
    if (given("--threads")) cfg.threads = o.cfg.threads;
    if (given("--mode")) cfg.mode = *parse_objective(o.mode);
    if (given("--factors")) cfg.factors = parse_factor_list(o.factors);
    cfg.validate();

    auto ingested = ingest_enrollments(fs::path(o.enrollments), fs::path(o.catalog));
    for (const auto& w : ingested.report.warnings) err << "warning: " << w << '\n';
    const auto corpus = filter_min_enrollment(ingested.corpus, o.min_enrollment);
    if (corpus.records.empty())
        throw DataError("no enrollments left after filtering (min-enrollment " +
                        std::to_string(o.min_enrollment) + ")");

    const auto result = train(corpus, cfg);
    const Checkpoint ck{result.params, cfg, result.report};
    save_checkpoint(o.out, ck);
    if (!o.embeddings.empty()) {
        const auto variant =
            o.variant == "input_plus_out" ? EmbeddingVariant::InputPlusOutput : EmbeddingVariant::Input;
        auto label = cfg.model_label();
        if (variant == EmbeddingVariant::InputPlusOutput) label += " (+out)";
        save_embeddings(extract_embeddings(result.params, variant, label), fs::path(o.embeddings));
    }
    json report = {{"model", cfg.model_label()},
                   {"n_courses", result.params.n_courses()},
                   {"pairs_per_epoch", result.report.pairs_per_epoch},
                   {"epoch_mean_loss", result.report.epoch_mean_loss}};
    if (!o.report.empty()) write_json_file(o.report, report);

    out << "model " << cfg.model_label() << ": " << result.params.n_courses() << " courses, "
        << result.report.pairs_per_epoch << " pairs per epoch\n";
    char buf[64];
    for (std::size_t e = 0; e < result.report.epoch_mean_loss.size(); ++e) {
        std::snprintf(buf, sizeof buf, "epoch %3zu  mean loss %.6f\n", e + 1, result.report.epoch_mean_loss[e]);
        out << buf;
    }
    return kExitOk;
}

int cmd_vectorize_bow(const BowOptions& o, std::ostream& out, std::ostream& err) {
    const auto scheme = parse_weighting(o.scheme);
    if (!scheme) throw UsageError("unknown scheme " + o.scheme);
    auto catalog_in = open_input(o.catalog);
    const auto catalog = read_catalog(catalog_in);
    if (catalog.empty()) throw DataError("catalog is empty");

    TextPipeline pipeline;
    if (!o.stopwords.empty()) {
        const auto words = read_line_list(fs::path(o.stopwords));
        pipeline.stopwords = WordSet(words.begin(), words.end());
    }
    if (!o.boilerplate.empty()) pipeline.boilerplate = read_line_list(fs::path(o.boilerplate));

    const auto model = build_bow_model(catalog, *scheme, pipeline);
    for (const auto& id : model.empty_vectors) err << "empty description vector: " << id << '\n';
    if (o.format == "sparse") {
        write_file_atomically(o.out, [&](std::ostream& s) { write_sparse_triples(s, model); });
    } else {
        save_embeddings(densify(model, std::string(to_string(*scheme))), fs::path(o.out));
    }
    out << "vectorized " << model.courses.size() << " courses over " << model.index.size() << " terms ("
        << to_string(*scheme) << "), " << model.empty_vectors.size() << " empty\n";
    return kExitOk;
}

int cmd_combine(const CombineOptions& o, std::ostream& out, std::ostream& err) {
    const auto a = load_embeddings(fs::path(o.a));
    const auto b = load_embeddings(fs::path(o.b));
    const auto combined = concat_sets(a, b, o.normalize);
    for (const auto& id : combined.dropped_from_a) err << "dropped (only in --a): " << id << '\n';
    for (const auto& id : combined.dropped_from_b) err << "dropped (only in --b): " << id << '\n';
    if (combined.zero_parts > 0) err << "zero parts left unnormalized: " << combined.zero_parts << '\n';
    save_embeddings(combined.set, fs::path(o.out));
    out << "combined " << combined.set.size() << " courses, dim " << combined.set.dim() << '\n';
    return kExitOk;
}

int cmd_eval(const EvalOptions& o, std::ostream& out) {
    if (o.equivalency.empty() && o.analogy.empty())
        throw UsageError("eval needs --equivalency and/or --analogy");
    const auto set = load_embeddings(fs::path(o.embeddings));
    const std::string label = o.label.empty() ? set.provenance() : o.label;
    json report = {{"model", label}};
    if (!o.equivalency.empty()) {
        auto in = open_input(o.equivalency);
        const auto r = eval_equivalency(set, read_equivalency_pairs(in));
        print_equivalency_table(out, {{label, r}});
        report["equivalency"] = to_json(r);
    }
    if (!o.analogy.empty()) {
        auto in = open_input(o.analogy);
        const auto r = eval_analogy(set, read_analogy_quads(in));
        if (!o.equivalency.empty()) out << '\n';
        print_analogy_table(out, {{label, r}});
        report["analogy"] = to_json(r);
    }
    if (o.json_out == "-")
        out << report.dump(2) << '\n';
    else if (!o.json_out.empty())
        write_json_file(o.json_out, report);
    return kExitOk;
}

int cmd_recommend(const RecommendOptions& o, std::ostream& out) {
    const auto set = load_embeddings(fs::path(o.embeddings));
    auto catalog_in = open_input(o.catalog);
    const auto catalog = read_catalog(catalog_in);
    CandidateFilter filter;
    filter.exclude_favorite_department = o.exclude_own_department;
    filter.exclude_graduate = o.exclude_graduate;
    if (!o.allow_list.empty()) {
        const auto ids = read_line_list(fs::path(o.allow_list));
        filter.allow_list.emplace(ids.begin(), ids.end());
    }
    const auto list = o.diversify ? recommend_diversified(set, catalog, o.favorite, o.k, filter)
                                  : recommend_plain(set, catalog, o.favorite, o.k, std::nullopt, filter);
    out << "favorite " << o.favorite << " (" << (o.diversify ? "div" : "non-div") << ", model "
        << list.model_label << ")\n";
    if (!list.note.empty()) out << "note: " << list.note << '\n';
    char buf[256];
    std::snprintf(buf, sizeof buf, "%4s  %-24s  %-16s  %8s\n", "Rank", "Course", "Department", "Score");
    out << buf;
    for (const auto& e : list.entries) {
        std::snprintf(buf, sizeof buf, "%4zu  %-24s  %-16s  %8.4f\n", e.rank, e.id.c_str(),
                      e.department.c_str(), e.score);
        out << buf;
    }
    return kExitOk;
}

int cmd_serve(const ServeOptions& o, std::ostream& out, std::ostream& err) {
    const auto colon = o.listen.rfind(':');
    if (colon == std::string::npos) throw UsageError("--listen must be host:port");
    const auto host = o.listen.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(o.listen.substr(colon + 1));
    } catch (const std::exception&) {
        throw UsageError("bad port in --listen " + o.listen);
    }

    Service service(ModelRegistry::load(o.registry), o.ratings_log);
    httplib::Server server;
    mount_routes(server, service);

    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    sigset_t previous;
    pthread_sigmask(SIG_BLOCK, &stop_signals, &previous);

    std::atomic<bool> finished{false};
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&stop_signals, &sig);
        if (!finished.load()) server.stop();
    });
    auto shutdown_waiter = [&] {
        finished = true;
        pthread_kill(waiter.native_handle(), SIGTERM);
        waiter.join();
        pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    };

    const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
        shutdown_waiter();
        throw DataError("cannot listen on " + o.listen);
    }
    out << "listening on " << host << ':' << bound << std::endl;
    err << "models: " << service.registry().models.size() << ", catalog: "
        << service.registry().catalog.size() << " courses\n";
    server.listen_after_bind();
    shutdown_waiter();
    out << "shut down" << std::endl;
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"coursevec: course embeddings, evaluation and serendipitous recommendations", "coursevec"};
    app.require_subcommand(1);

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with planted ground truth");
    synth_cmd->add_option("--out", synth.out, "Output directory")->required();
    synth_cmd->add_option("--students", synth.spec.n_students, "Number of students")->capture_default_str();
    synth_cmd->add_option("--topics", synth.spec.n_topics, "Number of topics")->capture_default_str();
    synth_cmd->add_option("--courses-per-topic", synth.spec.courses_per_topic, "Courses per topic")->capture_default_str();
    synth_cmd->add_option("--semesters", synth.spec.semesters, "Semesters per student")->capture_default_str();
    synth_cmd->add_option("--basket", synth.spec.basket_size, "Courses per semester")->capture_default_str();
    synth_cmd->add_option("--equiv-pairs", synth.spec.n_equiv_pairs, "Planted equivalency pairs")->capture_default_str();
    synth_cmd->add_option("--analogy-quads", synth.spec.n_analogy_quads, "Planted analogy quads")->capture_default_str();
    synth_cmd->add_option("--seed", synth.spec.seed, "Random seed")->capture_default_str();

    TrainOptions tr;
    auto* train_cmd = app.add_subcommand("train", "Train (multi-factor) course2vec embeddings");
    train_cmd->add_option("--enrollments", tr.enrollments, "Enrollment CSV")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--catalog", tr.catalog, "Catalog JSON lines")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--config", tr.config, "Training config JSON; flags override it")->check(CLI::ExistingFile);
    train_cmd->add_option("--min-enrollment", tr.min_enrollment, "Drop courses with fewer enrollments")->capture_default_str();
    train_cmd->add_option("--factors", tr.factors, "none or a comma list of instructor,department")->capture_default_str();
    train_cmd->add_option("--dim", tr.cfg.dim, "Embedding dimension")->capture_default_str();
    train_cmd->add_option("--window", tr.cfg.window, "Window w; offsets satisfy 0<|j|<w")->capture_default_str();
    train_cmd->add_option("--epochs", tr.cfg.epochs, "Training epochs")->capture_default_str();
    train_cmd->add_option("--initial-lr", tr.cfg.initial_lr, "Initial learning rate")->capture_default_str();
    train_cmd->add_option("--min-lr", tr.cfg.min_lr, "Final learning rate")->capture_default_str();
    train_cmd->add_option("--mode", tr.mode, "full_softmax or negative_sampling")
        ->check(CLI::IsMember({"full_softmax", "negative_sampling"}))
        ->capture_default_str();
    train_cmd->add_option("--negatives", tr.cfg.negatives, "Noise samples per pair")->capture_default_str();
    train_cmd->add_option("--seed", tr.cfg.seed, "Random seed")->capture_default_str();
    train_cmd->add_option("--threads", tr.cfg.threads, "Worker threads (1 = deterministic)")->capture_default_str();
    train_cmd->add_option("--out", tr.out, "Checkpoint directory")->required();
    train_cmd->add_option("--embeddings", tr.embeddings, "Also write an embedding text file");
    train_cmd->add_option("--variant", tr.variant, "input or input_plus_out")
        ->check(CLI::IsMember({"input", "input_plus_out"}))
        ->capture_default_str();
    train_cmd->add_option("--report", tr.report, "Write the loss report as JSON");

    BowOptions bow;
    auto* bow_cmd = app.add_subcommand("vectorize-bow", "Build bag-of-words vectors from catalog descriptions");
    bow_cmd->add_option("--catalog", bow.catalog, "Catalog JSON lines")->required()->check(CLI::ExistingFile);
    bow_cmd->add_option("--scheme", bow.scheme, "tf, binary or tfidf")
        ->check(CLI::IsMember({"tf", "binary", "tfidf"}))
        ->capture_default_str();
    bow_cmd->add_option("--stopwords", bow.stopwords, "Stopword list, one per line")->check(CLI::ExistingFile);
    bow_cmd->add_option("--boilerplate", bow.boilerplate, "Boilerplate sentences, one per line")->check(CLI::ExistingFile);
    bow_cmd->add_option("--out", bow.out, "Output file")->required();
    bow_cmd->add_option("--format", bow.format, "dense (embedding text) or sparse (course_id,column,weight)")
        ->check(CLI::IsMember({"dense", "sparse"}))
        ->capture_default_str();

    CombineOptions comb;
    auto* combine_cmd = app.add_subcommand("combine", "Concatenate two embedding sets per course");
    combine_cmd->add_option("--a", comb.a, "First embedding file")->required()->check(CLI::ExistingFile);
    combine_cmd->add_option("--b", comb.b, "Second embedding file")->required()->check(CLI::ExistingFile);
    combine_cmd->add_flag("--normalize", comb.normalize, "L2-normalize each part before concatenating");
    combine_cmd->add_option("--out", comb.out, "Output embedding file")->required();

    EvalOptions ev;
    auto* eval_cmd = app.add_subcommand("eval", "Score embeddings against equivalency/analogy ground truth");
    eval_cmd->add_option("--embeddings", ev.embeddings, "Embedding file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--equivalency", ev.equivalency, "CSV course_a,course_b")->check(CLI::ExistingFile);
    eval_cmd->add_option("--analogy", ev.analogy, "CSV c1,c2,c3,c4")->check(CLI::ExistingFile);
    eval_cmd->add_option("--label", ev.label, "Model label for the report");
    eval_cmd->add_option("--json-out", ev.json_out, "Write the structured report here ('-' for stdout)");

    RecommendOptions rec;
    auto* rec_cmd = app.add_subcommand("recommend", "Recommend courses similar to a favorite");
    rec_cmd->add_option("--embeddings", rec.embeddings, "Embedding file")->required()->check(CLI::ExistingFile);
    rec_cmd->add_option("--catalog", rec.catalog, "Catalog JSON lines")->required()->check(CLI::ExistingFile);
    rec_cmd->add_option("--favorite", rec.favorite, "Favorite course id")->required();
    rec_cmd->add_option("--k", rec.k, "Number of results")->capture_default_str();
    rec_cmd->add_flag("--diversify", rec.diversify, "At most one course per department");
    rec_cmd->add_flag("--exclude-own-department", rec.exclude_own_department,
                      "Leave out the favorite's department");
    rec_cmd->add_flag("--exclude-graduate", rec.exclude_graduate, "Leave out courses numbered 200 and up");
    rec_cmd->add_option("--allow-list", rec.allow_list, "Only recommend ids listed in this file")
        ->check(CLI::ExistingFile);

    ServeOptions srv;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP recommendation service");
    serve_cmd->add_option("--registry", srv.registry, "Registry config JSON")->required();
    serve_cmd->add_option("--listen", srv.listen, "host:port (port 0 picks a free port)")->capture_default_str();
    serve_cmd->add_option("--ratings-log", srv.ratings_log, "Append-only ratings log")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
            err << "run 'coursevec " << sub->get_name() << " --help' for usage\n";
        else
            err << "run 'coursevec --help' for usage\n";
        return kExitUsage;
    }

    try {
        if (*synth_cmd) return cmd_synth(synth, out);
        if (*train_cmd) return cmd_train(tr, *train_cmd, out, err);
        if (*bow_cmd) return cmd_vectorize_bow(bow, out, err);
        if (*combine_cmd) return cmd_combine(comb, out, err);
        if (*eval_cmd) return cmd_eval(ev, out);
        if (*rec_cmd) return cmd_recommend(rec, out);
        if (*serve_cmd) return cmd_serve(srv, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const UnknownCourse& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace coursevec
