#ifndef COURSEVEC_COURSE2VEC_HPP
#define COURSEVEC_COURSE2VEC_HPP

#include "coursevec/corpus.hpp"
#include "coursevec/rng.hpp"
#include "coursevec/vectorspace.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace coursevec {

enum class Objective { FullSoftmax, NegativeSampling };

/// Categorical course attributes that get their own embedding table.
enum class Factor { Instructor, Department };

std::string_view to_string(Objective o);
std::optional<Objective> parse_objective(std::string_view text);
std::string_view to_string(Factor f);
std::optional<Factor> parse_factor(std::string_view text);

struct TrainConfig {
    std::size_t dim = 100;
    /// Context offsets satisfy 0 < |j| < window.
    int window = 5;
    int epochs = 10;
    double initial_lr = 0.025;
    double min_lr = 1e-4;
    Objective mode = Objective::NegativeSampling;
    int negatives = 5;
    /// Enabled factors in canonical order (instructor before department).
    std::vector<Factor> factors;
    std::uint64_t seed = 1;
    int threads = 1;

    /// Throws UsageError naming the first violated constraint.
    void validate() const;

    bool has_factor(Factor f) const;

    /// Conventional model name, e.g. "insdept-course2vec".
    std::string model_label() const;
};

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Embedding table of one factor plus the multi-hot membership of every
/// course (rows of `weights` summed into that course's input).
struct FactorTable {
    Factor factor = Factor::Instructor;
    std::vector<std::string> values;
    Matrix weights;
    std::vector<std::vector<std::size_t>> course_rows;

    bool operator==(const FactorTable&) const = default;
};

struct ModelParams {
    std::vector<CourseId> vocab;
    std::unordered_map<CourseId, std::size_t> index;
    Matrix input;   // course vectors v_i
    Matrix output;  // context vectors v'_k
    std::vector<FactorTable> factors;

    std::size_t n_courses() const noexcept { return vocab.size(); }
    std::size_t dim() const noexcept { return input.cols(); }
    const FactorTable* factor(Factor f) const;

    bool operator==(const ModelParams& other) const {
        return vocab == other.vocab && input == other.input && output == other.output &&
               factors == other.factors;
    }
};

/// Vocabulary is the catalog in id order; factor vocabularies are sorted.
/// Input rows are uniform in [-0.5/dim, 0.5/dim]; output and factor tables
/// start at zero.
ModelParams init_params(const Catalog& catalog, const TrainConfig& config);

struct TrainingPair {
    std::size_t center = 0;
    std::size_t context = 0;

    bool operator==(const TrainingPair&) const = default;
};

/// (c_i, c_{i+j}) for every position i and 0 < |j| < window, clipped at the
/// sequence ends, ordered by i then j.
std::vector<TrainingPair> generate_training_pairs(std::span<const std::size_t> sequence, int window);

/// Number of pairs generate_training_pairs would emit.
std::size_t count_training_pairs(std::size_t length, int window);

/// a = v_center + sum over factors of the rows listed in `factor_rows`
/// (one multi-hot list per table in params.factors).
std::vector<double> compose_input(const ModelParams& params, std::size_t center,
                                  std::span<const std::vector<std::size_t>> factor_rows);
/// Uses the memberships stored in params.
std::vector<double> compose_input(const ModelParams& params, std::size_t center);

/// Softmax over all courses of a . v'_k, evaluated with max subtraction.
std::vector<double> softmax_distribution(std::span<const double> a, const ModelParams& params);
double softmax_prob(std::span<const double> a, std::size_t context, const ModelParams& params);

/// Noise distribution proportional to count^0.75.
class NoiseSampler {
public:
    NoiseSampler() = default;
    explicit NoiseSampler(std::span<const std::int64_t> counts, double power = 0.75);

    std::size_t sample(Rng& rng) const;
    double probability(std::size_t i) const;
    bool empty() const noexcept { return cumulative_.empty() || cumulative_.back() == 0.0; }

private:
    std::vector<double> cumulative_;
};

/// Sparse gradient of one parameter matrix.
using RowGradients = std::map<std::size_t, std::vector<double>>;

struct Gradients {
    RowGradients input;
    RowGradients output;
    std::vector<RowGradients> factors;  // parallel to params.factors
};

struct LossAndGradient {
    double loss = 0.0;
    Gradients gradients;
};

/// Summed negative log-likelihood of `pairs` and its gradient.
/// FullSoftmax is exact. NegativeSampling uses the logistic surrogate with
/// config.negatives draws per pair from `noise` (draws equal to the true
/// context are skipped); `rng` supplies the draws and is required in that
/// mode.
LossAndGradient loss_and_gradient(std::span<const TrainingPair> pairs, const ModelParams& params,
                                  const TrainConfig& config, const NoiseSampler* noise = nullptr,
                                  Rng* rng = nullptr);

struct TrainReport {
    std::vector<double> epoch_mean_loss;
    std::uint64_t pairs_per_epoch = 0;
};

struct TrainResult {
    ModelParams params;
    TrainReport report;
};

/// Plain SGD over the pairs of every sequence, learning rate decaying
/// linearly from initial_lr to min_lr over epochs x pairs_per_epoch.
/// Sequence order is reshuffled each epoch. With threads == 1 the result is
/// a deterministic function of the inputs; more threads update the shared
/// parameters without synchronisation. Throws DataError if there is nothing
/// to train on.
TrainResult train(const std::vector<SerializedSequence>& sequences, const Catalog& catalog,
                  const TrainConfig& config);

/// Serializes `corpus` with config.seed and trains on it.
TrainResult train(const EnrollmentCorpus& corpus, const TrainConfig& config);

enum class EmbeddingVariant { Input, InputPlusOutput };

/// Input rows, or input rows concatenated with output rows ("+out").
DenseEmbeddingSet extract_embeddings(const ModelParams& params, EmbeddingVariant variant,
                                     std::string provenance = {});

struct Checkpoint {
    ModelParams params;
    TrainConfig config;
    TrainReport report;
};

/// Directory layout:
///   metadata.json                 config, shapes, report, file names
///   vocab.txt                     one course id per line, row order
///   input.bin, output.bin         matrices
///   factor_<name>.bin             factor matrix
///   factor_<name>_vocab.txt       one factor value per line
///   factor_<name>_courses.txt     "<course_id> <row> <row> ..." per course
/// Matrix files hold a little-endian uint32 row count and column count
/// followed by the values as little-endian float32, row-major.
/// The directory is written atomically.
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);

}  // namespace coursevec

#endif
