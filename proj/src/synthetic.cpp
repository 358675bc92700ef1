#include "coursevec/synthetic.hpp"

#include "coursevec/error.hpp"
#include "coursevec/rng.hpp"

#include <algorithm>
#include <set>

namespace coursevec {

namespace {

constexpr const char* kBoilerplate = "This course satisfies the breadth requirement.";

void check_spec(const SyntheticSpec& spec) {
    auto require = [](bool ok, const std::string& why) {
        if (!ok) throw DataError("infeasible synthetic spec: " + why);
    };
    require(spec.n_students > 0, "n_students must be positive");
    require(spec.n_topics > 0, "n_topics must be positive");
    require(spec.courses_per_topic > 0, "courses_per_topic must be positive");
    require(spec.semesters > 0, "semesters must be positive");
    require(spec.basket_size > 0, "basket_size must be positive");
    require(spec.n_equiv_pairs >= 0, "n_equiv_pairs must be non-negative");
    require(spec.n_analogy_quads >= 0, "n_analogy_quads must be non-negative");

    const int pairs_per_topic = (spec.n_equiv_pairs + spec.n_topics - 1) / spec.n_topics;
    require(2 * pairs_per_topic <= spec.courses_per_topic,
            "n_equiv_pairs=" + std::to_string(spec.n_equiv_pairs) + " needs " +
                std::to_string(2 * pairs_per_topic) + " courses per topic for twins, only " +
                std::to_string(spec.courses_per_topic) + " available");
    const long long max_quads =
        static_cast<long long>(spec.n_equiv_pairs) * (spec.n_equiv_pairs - 1);
    require(spec.n_analogy_quads <= max_quads,
            "n_analogy_quads=" + std::to_string(spec.n_analogy_quads) + " exceeds the " +
                std::to_string(max_quads) + " ordered combinations of twin pairs");
    const int slots = spec.n_topics * spec.courses_per_topic - spec.n_equiv_pairs;
    require(spec.basket_size <= slots, "basket_size=" + std::to_string(spec.basket_size) +
                                           " exceeds the " + std::to_string(slots) +
                                           " distinct course choices");
}

std::string make_word(Rng& rng) {
    static constexpr std::string_view consonants = "bcdfgklmnprstvz";
    static constexpr std::string_view vowels = "aeiou";
    std::string w;
    const int syllables = 2 + static_cast<int>(uniform_index(rng, 2));
    for (int s = 0; s < syllables; ++s) {
        w.push_back(consonants[uniform_index(rng, consonants.size())]);
        w.push_back(vowels[uniform_index(rng, vowels.size())]);
    }
    w.push_back(consonants[uniform_index(rng, consonants.size())]);
    return w;
}

// A "slot" is what a student picks: a single course or a twin pair that
// resolves to either member with equal probability.
struct Slot {
    CourseId regular;
    CourseId honors;  // empty unless the slot is a twin pair
};

}  // namespace

SyntheticDataset generate_synthetic_corpus(const SyntheticSpec& spec) {
    check_spec(spec);

    SyntheticDataset out;
    out.boilerplate = {kBoilerplate};
    Rng rng(mix64(spec.seed));

    const int depts_per_topic = std::max(1, spec.courses_per_topic / 5);
    std::vector<std::vector<Slot>> topic_slots(static_cast<std::size_t>(spec.n_topics));
    std::vector<std::vector<std::pair<CourseId, CourseId>>> topic_twins(
        static_cast<std::size_t>(spec.n_topics));

    for (int t = 0; t < spec.n_topics; ++t) {
        std::set<std::string> vocab_set;
        while (vocab_set.size() < 12) vocab_set.insert(make_word(rng));
        const std::vector<std::string> vocab(vocab_set.begin(), vocab_set.end());
        auto pick = [&] { return vocab[uniform_index(rng, vocab.size())]; };

        std::vector<std::string> instructors;
        for (int k = 0; k < 3; ++k)
            instructors.push_back("inst_t" + std::to_string(t) + "_" + std::to_string(k));

        // Twin pairs are assigned round-robin over topics.
        int n_twins = 0;
        for (int p = t; p < spec.n_equiv_pairs; p += spec.n_topics) ++n_twins;

        int i = 0;
        while (i < spec.courses_per_topic) {
            const bool twin = (i / 2) < n_twins;
            const int dept_index = (i / 2) % depts_per_topic;
            const std::string dept =
                "D" + std::to_string(t) + static_cast<char>('A' + dept_index % 26) +
                (dept_index >= 26 ? std::to_string(dept_index / 26) : std::string{});
            const std::string number = std::to_string(100 + i);

            Course base;
            base.department = dept;
            base.number = number;
            base.id = dept + "_" + number;
            base.title = "Topics in " + pick() + " " + pick();
            base.description = "Introduction to " + pick() + " and " + pick() + ". Covers " +
                               pick() + ", " + pick() + " and " + pick() + " methods. " +
                               kBoilerplate;
            base.instructors = {instructors[static_cast<std::size_t>(i % 3)]};
            if (i % 4 == 0) base.instructors.push_back(instructors[static_cast<std::size_t>((i + 1) % 3)]);
            std::sort(base.instructors.begin(), base.instructors.end());
            out.topic_of[base.id] = t;

            if (twin) {
                Course honors = base;
                honors.number = number + "H";
                honors.id = dept + "_" + honors.number;
                honors.title = base.title + " (Honors)";
                honors.description = base.description + " Honors section with additional depth.";
                honors.instructors.push_back("inst_honors");
                std::sort(honors.instructors.begin(), honors.instructors.end());
                out.topic_of[honors.id] = t;
                topic_twins[static_cast<std::size_t>(t)].emplace_back(base.id, honors.id);
                topic_slots[static_cast<std::size_t>(t)].push_back({base.id, honors.id});
                out.corpus.catalog.emplace(honors.id, std::move(honors));
                i += 2;
            } else {
                topic_slots[static_cast<std::size_t>(t)].push_back({base.id, {}});
                i += 1;
            }
            out.corpus.catalog.emplace(base.id, std::move(base));
        }
    }

    // Ground truth: pairs in global round-robin order, then quads with
    // cross-topic combinations first.
    std::vector<std::pair<CourseId, CourseId>> twins;
    std::vector<int> twin_topic;
    for (int p = 0; p < spec.n_equiv_pairs; ++p) {
        const int t = p % spec.n_topics;
        twins.push_back(topic_twins[static_cast<std::size_t>(t)][static_cast<std::size_t>(p / spec.n_topics)]);
        twin_topic.push_back(t);
    }
    for (const auto& tw : twins) out.truth.equivalency_pairs.push_back(tw);

    std::vector<std::pair<int, int>> combos;
    for (int pass = 0; pass < 2; ++pass)
        for (int a = 0; a < spec.n_equiv_pairs; ++a)
            for (int b = 0; b < spec.n_equiv_pairs; ++b)
                if (a != b && ((twin_topic[static_cast<std::size_t>(a)] != twin_topic[static_cast<std::size_t>(b)]) == (pass == 0)))
                    combos.emplace_back(a, b);
    for (int q = 0; q < spec.n_analogy_quads; ++q) {
        const auto [a, b] = combos[static_cast<std::size_t>(q)];
        const auto& pa = twins[static_cast<std::size_t>(a)];
        const auto& pb = twins[static_cast<std::size_t>(b)];
        out.truth.analogy_quads.push_back({pa.first, pa.second, pb.first, pb.second});
    }

    // Enrollment histories.
    static constexpr Semester kCalendar[] = {{2008, Term::Fall}, {2009, Term::Spring}};
    auto semester_at = [](int index) {
        const auto& base = kCalendar[index % 2];
        return Semester{base.year + index / 2, base.term};
    };

    std::vector<Slot> all_slots;
    for (const auto& s : topic_slots) all_slots.insert(all_slots.end(), s.begin(), s.end());

    const int id_width = static_cast<int>(std::to_string(spec.n_students).size());
    for (int s = 0; s < spec.n_students; ++s) {
        std::string sid = std::to_string(s + 1);
        sid = "S" + std::string(static_cast<std::size_t>(id_width) - sid.size(), '0') + sid;
        const int topic = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(spec.n_topics)));
        const int start = static_cast<int>(uniform_index(rng, 2));
        const auto& own = topic_slots[static_cast<std::size_t>(topic)];

        for (int k = 0; k < spec.semesters; ++k) {
            const Semester sem = semester_at(start + k);
            std::set<const Slot*> taken;
            std::set<CourseId> basket;
            while (static_cast<int>(basket.size()) < spec.basket_size) {
                const bool from_topic = uniform01(rng) < kTopicAffinity || spec.n_topics == 1;
                const Slot* slot = nullptr;
                if (from_topic) {
                    slot = &own[uniform_index(rng, own.size())];
                } else {
                    // Any slot outside the student's topic.
                    const std::size_t others = all_slots.size() - own.size();
                    std::size_t idx = uniform_index(rng, others);
                    for (const auto& ts : topic_slots) {
                        if (&ts == &own) continue;
                        if (idx < ts.size()) {
                            slot = &ts[idx];
                            break;
                        }
                        idx -= ts.size();
                    }
                }
                if (!taken.insert(slot).second) continue;
                const bool pick_honors = !slot->honors.empty() && uniform01(rng) < 0.5;
                basket.insert(pick_honors ? slot->honors : slot->regular);
            }
            for (const auto& c : basket) out.corpus.records.push_back({sid, sem, c});
        }
    }

    for (const auto& r : out.corpus.records) ++out.corpus.catalog[r.course].total_enrollment;
    return out;
}

}  // namespace coursevec
