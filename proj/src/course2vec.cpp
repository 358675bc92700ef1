#include "coursevec/course2vec.hpp"

#include "coursevec/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

namespace coursevec {

std::string_view to_string(Objective o) {
    return o == Objective::FullSoftmax ? "full_softmax" : "negative_sampling";
}

std::optional<Objective> parse_objective(std::string_view text) {
    if (text == "full_softmax") return Objective::FullSoftmax;
    if (text == "negative_sampling") return Objective::NegativeSampling;
    return std::nullopt;
}

std::string_view to_string(Factor f) {
    return f == Factor::Instructor ? "instructor" : "department";
}

std::optional<Factor> parse_factor(std::string_view text) {
    if (text == "instructor") return Factor::Instructor;
    if (text == "department") return Factor::Department;
    return std::nullopt;
}

void TrainConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw UsageError(std::string("invalid training config: ") + what);
    };
    require(dim >= 1, "dim must be >= 1");
    require(window >= 1, "window must be >= 1");
    require(epochs >= 1, "epochs must be >= 1");
    require(min_lr > 0.0 && min_lr <= initial_lr, "need 0 < min_lr <= initial_lr");
    require(mode != Objective::NegativeSampling || negatives >= 1,
            "negatives must be >= 1 with negative sampling");
    require(threads >= 1, "threads must be >= 1");
    require(std::is_sorted(factors.begin(), factors.end()) &&
                std::adjacent_find(factors.begin(), factors.end()) == factors.end(),
            "factors must be distinct and in canonical order");
}

bool TrainConfig::has_factor(Factor f) const {
    return std::find(factors.begin(), factors.end(), f) != factors.end();
}

std::string TrainConfig::model_label() const {
    std::string prefix;
    if (has_factor(Factor::Instructor)) prefix += "ins";
    if (has_factor(Factor::Department)) prefix += "dept";
    return prefix.empty() ? "course2vec" : prefix + "-course2vec";
}

const FactorTable* ModelParams::factor(Factor f) const {
    for (const auto& t : factors)
        if (t.factor == f) return &t;
    return nullptr;
}

namespace {

// Stream derivations for the training RNGs; fixed so that checkpoints stay
// reproducible across releases.
constexpr std::uint64_t kInitStream = 0x1d1d1d1dULL;
constexpr std::uint64_t kShuffleStream = 0x5eed5eedULL;
constexpr std::uint64_t kWorkerStream = 0x3c3c3c3cULL;

}  // namespace

ModelParams init_params(const Catalog& catalog, const TrainConfig& config) {
    config.validate();
    ModelParams p;
    for (const auto& [id, course] : catalog) {
        p.index.emplace(id, p.vocab.size());
        p.vocab.push_back(id);
    }
    const std::size_t n = p.vocab.size();
    const std::size_t dim = config.dim;
    p.input = Matrix(n, dim);
    p.output = Matrix(n, dim);

    Rng rng(mix64(config.seed ^ kInitStream));
    for (double& w : p.input.data()) w = (uniform01(rng) - 0.5) / static_cast<double>(dim);

    for (Factor f : config.factors) {
        FactorTable table;
        table.factor = f;
        std::set<std::string> values;
        for (const auto& [id, course] : catalog) {
            if (f == Factor::Instructor)
                values.insert(course.instructors.begin(), course.instructors.end());
            else
                values.insert(course.department);
        }
        table.values.assign(values.begin(), values.end());
        table.weights = Matrix(table.values.size(), dim);
        auto row_of = [&](const std::string& v) {
            return static_cast<std::size_t>(
                std::lower_bound(table.values.begin(), table.values.end(), v) - table.values.begin());
        };
        table.course_rows.resize(n);
        for (const auto& [id, course] : catalog) {
            auto& rows = table.course_rows[p.index.at(id)];
            if (f == Factor::Instructor)
                for (const auto& ins : course.instructors) rows.push_back(row_of(ins));
            else
                rows.push_back(row_of(course.department));
        }
        p.factors.push_back(std::move(table));
    }
    return p;
}

std::vector<TrainingPair> generate_training_pairs(std::span<const std::size_t> sequence, int window) {
    std::vector<TrainingPair> pairs;
    const auto n = static_cast<std::ptrdiff_t>(sequence.size());
    const std::ptrdiff_t reach = window - 1;
    for (std::ptrdiff_t i = 0; i < n; ++i)
        for (std::ptrdiff_t j = -reach; j <= reach; ++j) {
            if (j == 0 || i + j < 0 || i + j >= n) continue;
            pairs.push_back({sequence[static_cast<std::size_t>(i)],
                             sequence[static_cast<std::size_t>(i + j)]});
        }
    return pairs;
}

std::size_t count_training_pairs(std::size_t length, int window) {
    std::size_t total = 0;
    const std::size_t reach = window > 1 ? static_cast<std::size_t>(window - 1) : 0;
    for (std::size_t d = 1; d <= reach && d < length; ++d) total += 2 * (length - d);
    return total;
}

std::vector<double> compose_input(const ModelParams& params, std::size_t center,
                                  std::span<const std::vector<std::size_t>> factor_rows) {
    const auto v = params.input.row(center);
    std::vector<double> a(v.begin(), v.end());
    for (std::size_t j = 0; j < params.factors.size() && j < factor_rows.size(); ++j)
        for (std::size_t r : factor_rows[j]) {
            const auto w = params.factors[j].weights.row(r);
            for (std::size_t d = 0; d < a.size(); ++d) a[d] += w[d];
        }
    return a;
}

std::vector<double> compose_input(const ModelParams& params, std::size_t center) {
    std::vector<std::vector<std::size_t>> rows;
    rows.reserve(params.factors.size());
    for (const auto& t : params.factors) rows.push_back(t.course_rows[center]);
    return compose_input(params, center, rows);
}

std::vector<double> softmax_distribution(std::span<const double> a, const ModelParams& params) {
    const std::size_t n = params.n_courses();
    std::vector<double> p(n);
    double max_score = -INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
        p[k] = dot(a, params.output.row(k));
        max_score = std::max(max_score, p[k]);
    }
    double total = 0.0;
    for (double& x : p) {
        x = std::exp(x - max_score);
        total += x;
    }
    for (double& x : p) x /= total;
    return p;
}

double softmax_prob(std::span<const double> a, std::size_t context, const ModelParams& params) {
    return softmax_distribution(a, params)[context];
}

NoiseSampler::NoiseSampler(std::span<const std::int64_t> counts, double power) {
    cumulative_.reserve(counts.size());
    double total = 0.0;
    for (auto c : counts) {
        total += c > 0 ? std::pow(static_cast<double>(c), power) : 0.0;
        cumulative_.push_back(total);
    }
}

std::size_t NoiseSampler::sample(Rng& rng) const {
    const double u = uniform01(rng) * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
}

double NoiseSampler::probability(std::size_t i) const {
    const double prev = i == 0 ? 0.0 : cumulative_[i - 1];
    return (cumulative_[i] - prev) / cumulative_.back();
}

namespace {

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + exp(x))
double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

struct Workspace {
    std::vector<double> a;
    std::vector<double> grad_a;
    std::vector<double> scores;
    std::vector<std::size_t> targets;
    std::vector<double> coeffs;
};

void compose_into(const ModelParams& p, std::size_t center, std::vector<double>& a) {
    const auto v = p.input.row(center);
    a.assign(v.begin(), v.end());
    for (const auto& table : p.factors)
        for (std::size_t r : table.course_rows[center]) {
            const auto w = table.weights.row(r);
            for (std::size_t d = 0; d < a.size(); ++d) a[d] += w[d];
        }
}

// For one (center, context) pair with ws.a already composed, lists the
// output rows t touched together with coefficients c_t such that
// dL/dv'_t = c_t * a and dL/da = sum_t c_t * v'_t. Returns the pair loss.
double pair_terms(const ModelParams& p, std::size_t context, const TrainConfig& cfg,
                  const NoiseSampler* noise, Rng* rng, Workspace& ws) {
    ws.targets.clear();
    ws.coeffs.clear();
    const std::span<const double> a(ws.a);
    if (cfg.mode == Objective::FullSoftmax) {
        const std::size_t n = p.n_courses();
        ws.scores.resize(n);
        double max_score = -INFINITY;
        for (std::size_t k = 0; k < n; ++k) {
            ws.scores[k] = dot(a, p.output.row(k));
            max_score = std::max(max_score, ws.scores[k]);
        }
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) total += std::exp(ws.scores[k] - max_score);
        const double log_z = max_score + std::log(total);
        for (std::size_t k = 0; k < n; ++k) {
            ws.targets.push_back(k);
            ws.coeffs.push_back(std::exp(ws.scores[k] - log_z) - (k == context ? 1.0 : 0.0));
        }
        return log_z - ws.scores[context];
    }

    const double f = dot(a, p.output.row(context));
    ws.targets.push_back(context);
    ws.coeffs.push_back(sigmoid(f) - 1.0);
    double loss = softplus(-f);
    for (int d = 0; d < cfg.negatives; ++d) {
        const std::size_t t = noise->sample(*rng);
        if (t == context) continue;
        const double g = dot(a, p.output.row(t));
        ws.targets.push_back(t);
        ws.coeffs.push_back(sigmoid(g));
        loss += softplus(g);
    }
    return loss;
}

void accumulate_grad_a(const ModelParams& p, Workspace& ws) {
    ws.grad_a.assign(ws.a.size(), 0.0);
    for (std::size_t i = 0; i < ws.targets.size(); ++i) {
        const auto v = p.output.row(ws.targets[i]);
        const double c = ws.coeffs[i];
        for (std::size_t d = 0; d < ws.grad_a.size(); ++d) ws.grad_a[d] += c * v[d];
    }
}

void add_to(RowGradients& g, std::size_t row, std::span<const double> values, double scale) {
    auto& dst = g[row];
    if (dst.empty()) dst.assign(values.size(), 0.0);
    for (std::size_t d = 0; d < values.size(); ++d) dst[d] += scale * values[d];
}

// One SGD step on a single pair: gradients are taken at the current
// parameters, then applied.
double sgd_step(ModelParams& p, const TrainingPair& pair, double lr, const TrainConfig& cfg,
                const NoiseSampler* noise, Rng* rng, Workspace& ws) {
    compose_into(p, pair.center, ws.a);
    const double loss = pair_terms(p, pair.context, cfg, noise, rng, ws);
    accumulate_grad_a(p, ws);

    const std::size_t dim = ws.a.size();
    for (std::size_t i = 0; i < ws.targets.size(); ++i) {
        auto v = p.output.row(ws.targets[i]);
        const double step = lr * ws.coeffs[i];
        for (std::size_t d = 0; d < dim; ++d) v[d] -= step * ws.a[d];
    }
    auto v = p.input.row(pair.center);
    for (std::size_t d = 0; d < dim; ++d) v[d] -= lr * ws.grad_a[d];
    for (auto& table : p.factors)
        for (std::size_t r : table.course_rows[pair.center]) {
            auto w = table.weights.row(r);
            for (std::size_t d = 0; d < dim; ++d) w[d] -= lr * ws.grad_a[d];
        }
    return loss;
}

}  // namespace

LossAndGradient loss_and_gradient(std::span<const TrainingPair> pairs, const ModelParams& params,
                                  const TrainConfig& config, const NoiseSampler* noise, Rng* rng) {
    if (config.mode == Objective::NegativeSampling && (noise == nullptr || rng == nullptr || noise->empty()))
        throw UsageError("negative sampling needs a noise distribution and an RNG");
    LossAndGradient out;
    out.gradients.factors.resize(params.factors.size());
    Workspace ws;
    for (const auto& pair : pairs) {
        compose_into(params, pair.center, ws.a);
        out.loss += pair_terms(params, pair.context, config, noise, rng, ws);
        accumulate_grad_a(params, ws);
        for (std::size_t i = 0; i < ws.targets.size(); ++i)
            add_to(out.gradients.output, ws.targets[i], ws.a, ws.coeffs[i]);
        add_to(out.gradients.input, pair.center, ws.grad_a, 1.0);
        for (std::size_t j = 0; j < params.factors.size(); ++j)
            for (std::size_t r : params.factors[j].course_rows[pair.center])
                add_to(out.gradients.factors[j], r, ws.grad_a, 1.0);
    }
    return out;
}

TrainResult train(const std::vector<SerializedSequence>& sequences, const Catalog& catalog,
                  const TrainConfig& config) {
    config.validate();
    if (catalog.empty() || sequences.empty()) throw DataError("cannot train on an empty corpus");

    TrainResult result;
    ModelParams& params = result.params;
    params = init_params(catalog, config);

    std::vector<std::vector<std::size_t>> encoded;
    encoded.reserve(sequences.size());
    std::vector<std::int64_t> counts(params.n_courses(), 0);
    std::uint64_t pairs_per_epoch = 0;
    for (const auto& seq : sequences) {
        std::vector<std::size_t> rows;
        rows.reserve(seq.course_ids.size());
        for (const auto& id : seq.course_ids) {
            const auto it = params.index.find(id);
            if (it == params.index.end())
                throw DataError("sequence of " + seq.student_id + " references unknown course " + id);
            rows.push_back(it->second);
            ++counts[it->second];
        }
        pairs_per_epoch += count_training_pairs(rows.size(), config.window);
        encoded.push_back(std::move(rows));
    }
    if (pairs_per_epoch == 0) throw DataError("corpus yields no training pairs");
    result.report.pairs_per_epoch = pairs_per_epoch;

    const NoiseSampler noise(counts);
    const double total_steps = static_cast<double>(pairs_per_epoch) * config.epochs;
    std::atomic<std::uint64_t> processed{0};

    std::vector<std::size_t> order(encoded.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(mix64(config.seed ^ kShuffleStream));

    const auto n_workers = static_cast<std::size_t>(std::min<std::size_t>(
        static_cast<std::size_t>(config.threads), std::max<std::size_t>(1, order.size())));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(order, shuffle_rng);
        std::vector<double> worker_loss(n_workers, 0.0);

        auto work = [&](std::size_t worker) {
            Rng rng(mix64(config.seed ^ kWorkerStream) +
                    mix64(static_cast<std::uint64_t>(epoch) * n_workers + worker + 1));
            Workspace ws;
            const std::size_t begin = order.size() * worker / n_workers;
            const std::size_t end = order.size() * (worker + 1) / n_workers;
            double loss = 0.0;
            for (std::size_t s = begin; s < end; ++s) {
                for (const auto& pair : generate_training_pairs(encoded[order[s]], config.window)) {
                    const auto done = processed.fetch_add(1, std::memory_order_relaxed);
                    const double lr = std::max(
                        config.min_lr, config.initial_lr - (config.initial_lr - config.min_lr) *
                                                               static_cast<double>(done) / total_steps);
                    loss += sgd_step(params, pair, lr, config, &noise, &rng, ws);
                }
            }
            worker_loss[worker] = loss;
        };

        if (n_workers == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(n_workers);
            for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work, w);
            for (auto& t : pool) t.join();
        }
        double epoch_loss = 0.0;
        for (double l : worker_loss) epoch_loss += l;
        result.report.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(pairs_per_epoch));
    }
    return result;
}

TrainResult train(const EnrollmentCorpus& corpus, const TrainConfig& config) {
    if (corpus.records.empty()) throw DataError("cannot train on an empty corpus");
    return train(serialize_sequences(corpus, config.seed), corpus.catalog, config);
}

DenseEmbeddingSet extract_embeddings(const ModelParams& params, EmbeddingVariant variant,
                                     std::string provenance) {
    const std::size_t v = params.dim();
    const bool with_out = variant == EmbeddingVariant::InputPlusOutput;
    const std::size_t dim = with_out ? 2 * v : v;
    std::vector<double> values;
    values.reserve(params.n_courses() * dim);
    for (std::size_t i = 0; i < params.n_courses(); ++i) {
        for (double x : params.input.row(i)) values.push_back(x);
        if (with_out)
            for (double x : params.output.row(i)) values.push_back(x);
    }
    return DenseEmbeddingSet(dim, params.vocab, std::move(values), std::move(provenance));
}

}  // namespace coursevec
