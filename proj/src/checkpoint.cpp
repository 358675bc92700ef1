#include "coursevec/course2vec.hpp"
#include "coursevec/error.hpp"
#include "coursevec/io.hpp"
#include "coursevec/train_config_json.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace coursevec {

using json = nlohmann::json;
namespace fs = std::filesystem;

json to_json(const TrainConfig& c) {
    json factors = json::array();
    for (Factor f : c.factors) factors.push_back(std::string(to_string(f)));
    return {
        {"dim", c.dim},
        {"window", c.window},
        {"epochs", c.epochs},
        {"initial_lr", c.initial_lr},
        {"min_lr", c.min_lr},
        {"mode", std::string(to_string(c.mode))},
        {"negatives", c.negatives},
        {"factors", factors},
        {"seed", c.seed},
        {"threads", c.threads},
    };
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
    if (!j.is_object()) throw UsageError("training config must be an object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "dim")
                c.dim = value.get<std::size_t>();
            else if (key == "window")
                c.window = value.get<int>();
            else if (key == "epochs")
                c.epochs = value.get<int>();
            else if (key == "initial_lr")
                c.initial_lr = value.get<double>();
            else if (key == "min_lr")
                c.min_lr = value.get<double>();
            else if (key == "mode") {
                const auto m = parse_objective(value.get<std::string>());
                if (!m) throw UsageError("unknown mode " + value.dump());
                c.mode = *m;
            } else if (key == "negatives")
                c.negatives = value.get<int>();
            else if (key == "factors") {
                c.factors.clear();
                for (const auto& f : value) {
                    const auto parsed = parse_factor(f.get<std::string>());
                    if (!parsed) throw UsageError("unknown factor " + f.dump());
                    c.factors.push_back(*parsed);
                }
                std::sort(c.factors.begin(), c.factors.end());
                c.factors.erase(std::unique(c.factors.begin(), c.factors.end()), c.factors.end());
            } else if (key == "seed")
                c.seed = value.get<std::uint64_t>();
            else if (key == "threads")
                c.threads = value.get<int>();
            else
                throw UsageError("unknown training config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("bad training config value: ") + e.what());
    }
    return c;
}

TrainConfig load_train_config(const fs::path& path, TrainConfig base) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("config " + path.string() + ": " + e.what());
    }
    return train_config_from_json(j, base);
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                   static_cast<char>((v >> 16) & 0xff),
                                   static_cast<char>((v >> 24) & 0xff)};
    out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in) {
    std::array<unsigned char, 4> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw DataError("truncated matrix file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string factor_stem(Factor f) { return "factor_" + std::string(to_string(f)); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw DataError("cannot write " + path.string());
}

void write_matrix_file(const fs::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    write_matrix(out, m);
    if (!out) throw DataError("cannot write " + path.string());
}

Matrix read_matrix_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return read_matrix(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

void write_matrix(std::ostream& out, const Matrix& m) {
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (double x : m.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
}

Matrix read_matrix(std::istream& in) {
    const auto rows = get_u32(in);
    const auto cols = get_u32(in);
    Matrix m(rows, cols);
    for (double& x : m.data()) x = static_cast<double>(std::bit_cast<float>(get_u32(in)));
    if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes in matrix file");
    return m;
}

void save_checkpoint(const fs::path& dir, const Checkpoint& ck) {
    const auto& p = ck.params;
    write_directory_atomically(dir, [&](const fs::path& tmp) {
        json meta = {
            {"format", "coursevec-checkpoint"},
            {"version", 1},
            {"model", ck.config.model_label()},
            {"n_courses", p.n_courses()},
            {"dim", p.dim()},
            {"config", to_json(ck.config)},
            {"vocab", "vocab.txt"},
            {"input", "input.bin"},
            {"output", "output.bin"},
            {"report", {{"pairs_per_epoch", ck.report.pairs_per_epoch},
                        {"epoch_mean_loss", ck.report.epoch_mean_loss}}},
        };
        json factors = json::array();
        for (const auto& t : p.factors) {
            const auto stem = factor_stem(t.factor);
            factors.push_back({{"name", std::string(to_string(t.factor))},
                               {"rows", t.values.size()},
                               {"matrix", stem + ".bin"},
                               {"vocab", stem + "_vocab.txt"},
                               {"courses", stem + "_courses.txt"}});
            std::ostringstream vocab, courses;
            for (const auto& v : t.values) vocab << v << '\n';
            for (std::size_t i = 0; i < p.n_courses(); ++i) {
                courses << p.vocab[i];
                for (auto r : t.course_rows[i]) courses << ' ' << r;
                courses << '\n';
            }
            write_text(tmp / (stem + "_vocab.txt"), vocab.str());
            write_text(tmp / (stem + "_courses.txt"), courses.str());
            write_matrix_file(tmp / (stem + ".bin"), t.weights);
        }
        meta["factors"] = factors;

        std::ostringstream vocab;
        for (const auto& id : p.vocab) vocab << id << '\n';
        write_text(tmp / "vocab.txt", vocab.str());
        write_matrix_file(tmp / "input.bin", p.input);
        write_matrix_file(tmp / "output.bin", p.output);
        write_text(tmp / "metadata.json", meta.dump(2) + "\n");
    });
}

Checkpoint load_checkpoint(const fs::path& dir) {
    std::ifstream meta_in(dir / "metadata.json");
    if (!meta_in) throw DataError("no checkpoint metadata in " + dir.string());
    json meta;
    try {
        meta = json::parse(meta_in);
    } catch (const json::parse_error& e) {
        throw DataError("checkpoint metadata: " + std::string(e.what()));
    }
    if (meta.value("format", "") != "coursevec-checkpoint")
        throw DataError(dir.string() + " is not a coursevec checkpoint");

    Checkpoint ck;
    try {
        ck.config = train_config_from_json(meta.at("config"));
        ck.report.pairs_per_epoch = meta.at("report").at("pairs_per_epoch").get<std::uint64_t>();
        ck.report.epoch_mean_loss = meta.at("report").at("epoch_mean_loss").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw DataError("checkpoint metadata: " + std::string(e.what()));
    }

    auto& p = ck.params;
    p.vocab = read_lines(dir / meta.at("vocab").get<std::string>());
    for (std::size_t i = 0; i < p.vocab.size(); ++i) p.index.emplace(p.vocab[i], i);
    p.input = read_matrix_file(dir / meta.at("input").get<std::string>());
    p.output = read_matrix_file(dir / meta.at("output").get<std::string>());
    const std::size_t n = p.vocab.size();
    if (p.input.rows() != n || p.output.rows() != n || p.output.cols() != p.input.cols())
        throw DataError("checkpoint matrix shapes disagree with the vocabulary");

    for (const auto& f : meta.at("factors")) {
        FactorTable t;
        const auto parsed = parse_factor(f.at("name").get<std::string>());
        if (!parsed) throw DataError("unknown factor in checkpoint");
        t.factor = *parsed;
        t.values = read_lines(dir / f.at("vocab").get<std::string>());
        t.weights = read_matrix_file(dir / f.at("matrix").get<std::string>());
        if (t.weights.rows() != t.values.size() || t.weights.cols() != p.input.cols())
            throw DataError("factor matrix shape mismatch for " + std::string(to_string(t.factor)));
        t.course_rows.resize(n);
        for (const auto& line : read_lines(dir / f.at("courses").get<std::string>())) {
            std::istringstream ls(line);
            std::string id;
            ls >> id;
            const auto it = p.index.find(id);
            if (it == p.index.end()) throw DataError("factor membership for unknown course " + id);
            std::size_t r = 0;
            while (ls >> r) {
                if (r >= t.values.size()) throw DataError("factor row out of range for " + id);
                t.course_rows[it->second].push_back(r);
            }
        }
        p.factors.push_back(std::move(t));
    }
    return ck;
}

}  // namespace coursevec
