#include "coursevec/course2vec.hpp"
#include "coursevec/error.hpp"
#include "coursevec/io.hpp"
#include "coursevec/synthetic.hpp"

#include "fs_util.hpp"

#include <doctest.h>

#include <cstring>
#include <sstream>

using namespace coursevec;

namespace {

Checkpoint trained(std::uint64_t seed, std::vector<Factor> factors) {
    static const auto d = generate_synthetic_corpus({});
    TrainConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 2;
    cfg.seed = seed;
    cfg.factors = std::move(factors);
    auto r = train(d.corpus, cfg);
    return {std::move(r.params), cfg, std::move(r.report)};
}

void round_to_float(Matrix& m) {
    for (auto& x : m.data()) x = static_cast<float>(x);
}

}  // namespace

TEST_CASE("matrix files are little-endian uint32 header plus float32 rows") {
    Matrix m(2, 3);
    m.data() = {1, 2, 3, 4, 5, -0.5};
    std::ostringstream out;
    write_matrix(out, m);
    const auto bytes = out.str();
    REQUIRE(bytes.size() == 8 + 6 * 4);
    CHECK(static_cast<unsigned char>(bytes[0]) == 2);
    CHECK(static_cast<unsigned char>(bytes[4]) == 3);
    float last = 0;
    std::memcpy(&last, bytes.data() + 8 + 5 * 4, 4);
    CHECK(last == -0.5f);
    std::istringstream in(bytes);
    CHECK(read_matrix(in) == m);
    std::istringstream truncated(bytes.substr(0, 20));
    CHECK_THROWS_AS(read_matrix(truncated), DataError);
}

TEST_CASE("checkpoint round-trip with factors") {
    testfs::TempDir tmp("ckpt");
    auto ck = trained(3, {Factor::Instructor, Factor::Department});
    save_checkpoint(tmp / "model", ck);
    for (const auto* name : {"metadata.json", "vocab.txt", "input.bin", "output.bin", "factor_instructor.bin",
                             "factor_instructor_vocab.txt", "factor_instructor_courses.txt",
                             "factor_department.bin"})
        CHECK(std::filesystem::exists(tmp / "model" / name));
    const auto back = load_checkpoint(tmp / "model");

    auto expected = ck.params;
    round_to_float(expected.input);
    round_to_float(expected.output);
    for (auto& t : expected.factors) round_to_float(t.weights);
    CHECK(back.params == expected);
    CHECK(back.params.index == expected.index);
    CHECK(back.config.factors == ck.config.factors);
    CHECK(back.config.dim == 8);
    CHECK(back.config.seed == 3);
    CHECK(back.report.epoch_mean_loss == ck.report.epoch_mean_loss);

    save_checkpoint(tmp / "again", back);
    CHECK(testfs::snapshot(tmp / "again") == testfs::snapshot(tmp / "model"));
}

TEST_CASE("same seed gives byte-identical checkpoints") {
    testfs::TempDir tmp("ckpt-det");
    save_checkpoint(tmp / "a", trained(7, {Factor::Department}));
    save_checkpoint(tmp / "b", trained(7, {Factor::Department}));
    save_checkpoint(tmp / "c", trained(8, {Factor::Department}));
    CHECK(testfs::snapshot(tmp / "a") == testfs::snapshot(tmp / "b"));
    CHECK(testfs::snapshot(tmp / "a") != testfs::snapshot(tmp / "c"));
}

TEST_CASE("broken checkpoints are data errors") {
    testfs::TempDir tmp("ckpt-bad");
    CHECK_THROWS_AS(load_checkpoint(tmp / "missing"), DataError);
    save_checkpoint(tmp / "m", trained(1, {}));
    std::filesystem::resize_file(tmp / "m" / "input.bin", 12);
    CHECK_THROWS_AS(load_checkpoint(tmp / "m"), DataError);
}

TEST_CASE("atomic writers leave the target untouched on failure") {
    testfs::TempDir tmp("atomic");
    const auto target = tmp / "out.txt";
    testfs::write_text(target, "old");
    CHECK_THROWS(write_file_atomically(target, [](std::ostream& o) {
        o << "partial";
        throw DataError("boom");
    }));
    CHECK(testfs::read_bytes(target) == "old");
    write_file_atomically(target, [](std::ostream& o) { o << "new"; });
    CHECK(testfs::read_bytes(target) == "new");

    const auto dir = tmp / "dir";
    write_directory_atomically(dir, [](const std::filesystem::path& p) { testfs::write_text(p / "a", "1"); });
    CHECK_THROWS(write_directory_atomically(dir, [](const std::filesystem::path& p) {
        testfs::write_text(p / "b", "2");
        throw DataError("boom");
    }));
    CHECK(testfs::snapshot(dir) == std::map<std::string, std::string>{{"a", "1"}});
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(tmp.path())) ++entries;
    CHECK(entries == 2);  // no temporaries left behind
}
