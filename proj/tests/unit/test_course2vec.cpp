#include "coursevec/course2vec.hpp"
#include "coursevec/error.hpp"
#include "coursevec/synthetic.hpp"
#include "coursevec/train_config_json.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

using namespace coursevec;

namespace {

Catalog tiny_catalog(std::size_t n) {
    Catalog c;
    for (std::size_t i = 0; i < n; ++i) {
        const auto id = "C" + std::to_string(i);
        c[id] = Course{id, "D", "1", id, "", {}, 1};
    }
    return c;
}

TrainConfig small_config() {
    TrainConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 3;
    return cfg;
}

const SyntheticDataset& reference_corpus() {
    static const auto d = generate_synthetic_corpus({});
    return d;
}

}  // namespace

TEST_CASE("training pairs follow the strict window") {
    const std::vector<std::size_t> abc{0, 1, 2};
    CHECK(generate_training_pairs(abc, 2) ==
          std::vector<TrainingPair>{{0, 1}, {1, 0}, {1, 2}, {2, 1}});
    const std::vector<std::size_t> a{0};
    CHECK(generate_training_pairs(a, 5).empty());
    const std::vector<std::size_t> ab{0, 1};
    CHECK(generate_training_pairs(ab, 3) == std::vector<TrainingPair>{{0, 1}, {1, 0}});
    CHECK(generate_training_pairs(abc, 1).empty());
    // repeated course in a window is a legal pair
    const std::vector<std::size_t> aa{4, 4};
    CHECK(generate_training_pairs(aa, 2) == std::vector<TrainingPair>{{4, 4}, {4, 4}});
    for (std::size_t len = 0; len < 12; ++len)
        for (int w = 1; w < 7; ++w) {
            std::vector<std::size_t> seq(len, 0);
            CHECK(count_training_pairs(len, w) == generate_training_pairs(seq, w).size());
        }
}

TEST_CASE("compose_input sums factor rows") {
    Catalog cat = tiny_catalog(1);
    cat["C0"].instructors = {"p", "q"};
    TrainConfig cfg;
    cfg.dim = 2;
    cfg.factors = {Factor::Instructor, Factor::Department};
    auto p = init_params(cat, cfg);
    SUBCASE("all-zero matrices") {
        std::fill(p.input.data().begin(), p.input.data().end(), 0.0);
        CHECK(compose_input(p, 0) == std::vector<double>{0, 0});
    }
    SUBCASE("v=(1,1), instructors (1,0),(0,1), department (1,0) gives (3,2)") {
        p.input.data() = {1, 1};
        p.factors[0].weights.data() = {1, 0, 0, 1};
        p.factors[1].weights.data() = {1, 0};
        CHECK(compose_input(p, 0) == std::vector<double>{3, 2});
    }
    SUBCASE("no factors reduces to the course vector") {
        TrainConfig plain;
        plain.dim = 2;
        auto q = init_params(cat, plain);
        const auto row = q.input.row(0);
        CHECK(compose_input(q, 0) == std::vector<double>(row.begin(), row.end()));
    }
}

TEST_CASE("initialisation ranges and factor vocabularies") {
    Catalog cat = tiny_catalog(4);
    cat["C1"].instructors = {"z", "a"};
    cat["C2"].department = "B";
    TrainConfig cfg;
    cfg.dim = 8;
    cfg.factors = {Factor::Instructor, Factor::Department};
    const auto p = init_params(cat, cfg);
    for (double x : p.input.data()) {
        CHECK(x >= -0.5 / 8);
        CHECK(x <= 0.5 / 8);
    }
    for (double x : p.output.data()) CHECK(x == 0.0);
    REQUIRE(p.factors.size() == 2);
    CHECK(p.factors[0].values == std::vector<std::string>{"a", "z"});
    CHECK(p.factors[1].values == std::vector<std::string>{"B", "D"});
    CHECK(p.factors[0].course_rows[1].size() == 2);
    CHECK(p.factors[0].course_rows[0].empty());
    for (double x : p.factors[1].weights.data()) CHECK(x == 0.0);
}

TEST_CASE("softmax") {
    TrainConfig cfg;
    cfg.dim = 2;
    SUBCASE("uniform for zero parameters") {
        for (std::size_t n : {2u, 7u}) {
            auto p = init_params(tiny_catalog(n), cfg);
            const std::vector<double> a{0.3, -1.0};
            CHECK(softmax_prob(a, 0, p) == doctest::Approx(1.0 / n));
        }
    }
    SUBCASE("hand example e/(e+1)") {
        auto p = init_params(tiny_catalog(2), cfg);
        p.output.data() = {1, 0, 0, 0};
        const std::vector<double> a{1, 0};
        CHECK(softmax_prob(a, 0, p) == doctest::Approx(0.731059).epsilon(1e-6));
        CHECK(softmax_prob(a, 0, p) == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1)).epsilon(1e-15));
    }
    SUBCASE("sums to one and stays finite for extreme scores") {
        std::mt19937_64 rng(3);
        std::normal_distribution<double> g(0, 30);
        auto p = init_params(tiny_catalog(9), cfg);
        for (int draw = 0; draw < 100; ++draw) {
            for (auto& x : p.output.data()) x = g(rng);
            const std::vector<double> a{g(rng), g(rng)};
            const auto dist = softmax_distribution(a, p);
            double s = 0;
            for (double x : dist) {
                CHECK(std::isfinite(x));
                s += x;
            }
            CHECK(std::abs(s - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("loss of one pair at zero parameters is ln 2") {
    TrainConfig cfg;
    cfg.dim = 3;
    cfg.mode = Objective::FullSoftmax;
    auto p = init_params(tiny_catalog(2), cfg);
    std::fill(p.input.data().begin(), p.input.data().end(), 0.0);
    const std::vector<TrainingPair> pairs{{0, 1}};
    CHECK(loss_and_gradient(pairs, p, cfg).loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("full-softmax gradients match central finite differences") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const auto inst = oracle::random_gradient_instance(seed);
        CHECK(inst.params.factors.at(0).values.size() == 3);
        CHECK(inst.params.factors.at(1).values.size() == 2);
        const auto r = oracle::finite_difference_check(inst);
        CHECK(r.input < 1e-4);
        CHECK(r.output < 1e-4);
        CHECK(r.instructor < 1e-4);
        CHECK(r.department < 1e-4);
    }
}

TEST_CASE("factor rows receive the centre course gradient") {
    const auto inst = oracle::random_gradient_instance(9);
    TrainConfig cfg;
    cfg.dim = 4;
    cfg.mode = Objective::FullSoftmax;
    const std::vector<TrainingPair> one{{2, 4}};
    const auto g = loss_and_gradient(one, inst.params, cfg).gradients;
    const auto& centre = g.input.at(2);
    for (std::size_t j = 0; j < inst.params.factors.size(); ++j)
        for (auto r : inst.params.factors[j].course_rows[2]) CHECK(g.factors[j].at(r) == centre);
}

TEST_CASE("negative-sampling gradients match finite differences for fixed draws") {
    // Replaying the same RNG state fixes the noise draws, making the surrogate
    // a deterministic function of the parameters.
    auto inst = oracle::random_gradient_instance(4);
    TrainConfig cfg;
    cfg.dim = 4;
    cfg.negatives = 3;
    cfg.factors = {Factor::Instructor, Factor::Department};
    const std::vector<std::int64_t> counts{3, 1, 4, 1, 5};
    const NoiseSampler noise(counts);
    auto loss_at = [&](const ModelParams& p) {
        Rng rng(11);
        return loss_and_gradient(inst.pairs, p, cfg, &noise, &rng);
    };
    const auto analytic = loss_at(inst.params);
    const double eps = 1e-5;
    double worst = 0;
    auto probe = [&](Matrix& m, const RowGradients& g) {
        for (std::size_t i = 0; i < m.data().size(); ++i) {
            const double keep = m.data()[i];
            m.data()[i] = keep + eps;
            const double up = loss_at(inst.params).loss;
            m.data()[i] = keep - eps;
            const double down = loss_at(inst.params).loss;
            m.data()[i] = keep;
            const auto it = g.find(i / m.cols());
            const double a = it == g.end() ? 0.0 : it->second[i % m.cols()];
            const double n = (up - down) / (2 * eps);
            worst = std::max(worst, std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6}));
        }
    };
    probe(inst.params.input, analytic.gradients.input);
    probe(inst.params.output, analytic.gradients.output);
    for (std::size_t j = 0; j < inst.params.factors.size(); ++j)
        probe(inst.params.factors[j].weights, analytic.gradients.factors[j]);
    CHECK(worst < 1e-5);
    Rng rng(1);
    CHECK_THROWS_AS(loss_and_gradient(inst.pairs, inst.params, cfg, nullptr, &rng), UsageError);
}

TEST_CASE("noise distribution follows count^0.75") {
    const std::vector<std::int64_t> counts{1, 16, 0, 81};
    const NoiseSampler noise(counts);
    const double z = 1 + 8 + 27;
    CHECK(noise.probability(0) == doctest::Approx(1 / z));
    CHECK(noise.probability(1) == doctest::Approx(8 / z));
    CHECK(noise.probability(2) == 0.0);
    CHECK(noise.probability(3) == doctest::Approx(27 / z));
    Rng rng(5);
    std::vector<int> hist(4);
    for (int i = 0; i < 200000; ++i) ++hist[noise.sample(rng)];
    CHECK(hist[2] == 0);
    CHECK(hist[3] / 200000.0 == doctest::Approx(27 / z).epsilon(0.02));
}

TEST_CASE("config validation and labels") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.model_label() == "course2vec");
    cfg.factors = {Factor::Instructor};
    CHECK(cfg.model_label() == "ins-course2vec");
    cfg.factors = {Factor::Department};
    CHECK(cfg.model_label() == "dept-course2vec");
    cfg.factors = {Factor::Instructor, Factor::Department};
    CHECK(cfg.model_label() == "insdept-course2vec");
    auto bad = TrainConfig{};
    bad.min_lr = 1.0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = {};
    bad.dim = 0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = {};
    bad.negatives = 0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad.mode = Objective::FullSoftmax;
    CHECK_NOTHROW(bad.validate());
}

TEST_CASE("shipped defaults file matches the built-in defaults") {
    const auto cfg = load_train_config(std::string(COURSEVEC_CONFIG_DIR) + "/train_defaults.json");
    const TrainConfig builtin;
    CHECK(to_json(cfg) == to_json(builtin));
    CHECK(cfg.window == 5);
    CHECK(cfg.dim == 100);
    CHECK_THROWS_AS(train_config_from_json(nlohmann::json{{"dimension", 3}}), UsageError);
    CHECK(train_config_from_json(nlohmann::json{{"factors", {"department", "instructor"}}}).factors ==
          std::vector<Factor>{Factor::Instructor, Factor::Department});
}

TEST_CASE("training is deterministic single-threaded and rejects empty input") {
    const auto& d = reference_corpus();
    auto cfg = small_config();
    cfg.factors = {Factor::Instructor, Factor::Department};
    const auto a = train(d.corpus, cfg);
    const auto b = train(d.corpus, cfg);
    CHECK(a.params == b.params);
    CHECK(a.report.epoch_mean_loss == b.report.epoch_mean_loss);
    cfg.seed = 2;
    CHECK_FALSE(train(d.corpus, cfg).params == a.params);
    CHECK_THROWS_AS(train(EnrollmentCorpus{}, cfg), DataError);
    EnrollmentCorpus singles;
    singles.catalog = tiny_catalog(2);
    singles.records = {{"s", {2010, Term::Fall}, "C0"}};
    CHECK_THROWS_AS(train(singles, cfg), DataError);
}

TEST_CASE("disabled factors reproduce an independent plain skip-gram exactly") {
    const auto& d = reference_corpus();
    auto cfg = small_config();
    cfg.epochs = 2;
    const auto trained = train(d.corpus, cfg);
    const auto reference = oracle::plain_skipgram(d.corpus, cfg);
    CHECK(trained.params.input.data() == reference.input.data());
    CHECK(trained.params.output.data() == reference.output.data());
    CHECK(trained.params.vocab == reference.vocab);
}

TEST_CASE("all parameters stay finite, also with several threads") {
    const auto& d = reference_corpus();
    auto cfg = small_config();
    cfg.threads = 4;
    cfg.factors = {Factor::Instructor, Factor::Department};
    const auto r = train(d.corpus, cfg);
    auto finite = [](const Matrix& m) {
        return std::all_of(m.data().begin(), m.data().end(), [](double x) { return std::isfinite(x); });
    };
    CHECK(finite(r.params.input));
    CHECK(finite(r.params.output));
    for (const auto& t : r.params.factors) CHECK(finite(t.weights));
    CHECK(r.report.epoch_mean_loss.size() == 3);
}

TEST_CASE("negative-sampling loss does not rise over the first five epochs") {
    // A smaller step size keeps the online loss estimate away from its SGD
    // noise floor; see the README for the default-rate behaviour.
    const auto& d = reference_corpus();
    TrainConfig cfg;
    cfg.initial_lr = 0.0025;
    cfg.epochs = 5;
    const auto r = train(d.corpus, cfg);
    for (std::size_t e = 1; e < 5; ++e)
        CHECK(r.report.epoch_mean_loss[e] <= r.report.epoch_mean_loss[e - 1] + 1e-3);
}

TEST_CASE("default training separates the two synthetic topics") {
    const auto& d = reference_corpus();
    const auto r = train(d.corpus, TrainConfig{});
    const auto [within, across] =
        oracle::topic_cosines(extract_embeddings(r.params, EmbeddingVariant::Input), d.topic_of);
    MESSAGE("within " << within << " across " << across);
    CHECK(within - across >= 0.2);
}

TEST_CASE("full softmax trains a 20-course corpus quickly") {
    const auto& d = reference_corpus();
    TrainConfig cfg;
    cfg.mode = Objective::FullSoftmax;
    const auto start = std::chrono::steady_clock::now();
    const auto r = train(d.corpus, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(secs < 60);
    CHECK(r.report.epoch_mean_loss.back() < r.report.epoch_mean_loss.front());
}

TEST_CASE("embedding variants") {
    const auto& d = reference_corpus();
    const auto r = train(d.corpus, small_config());
    const auto in = extract_embeddings(r.params, EmbeddingVariant::Input);
    const auto both = extract_embeddings(r.params, EmbeddingVariant::InputPlusOutput);
    CHECK(in.dim() == 16);
    CHECK(both.dim() == 32);
    CHECK(in.courses() == r.params.vocab);
    CHECK(both.courses() == r.params.vocab);
    for (std::size_t i = 0; i < in.size(); ++i)
        for (std::size_t k = 0; k < 16; ++k) CHECK(both.row(i)[k] == in.row(i)[k]);
}
