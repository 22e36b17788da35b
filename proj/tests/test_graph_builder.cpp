#include <doctest.h>

#include <random>
#include <stdexcept>

#include "mogam/graph.hpp"

using namespace mogam;

namespace {

ObjectVocabulary toy_vocab() { return ObjectVocabulary::from_names({"person", "cup", "bed"}); }

FrameDetections frame(int index, std::vector<int> class_ids) {
    FrameDetections f;
    f.frame_index = index;
    int tag = 0;
    for (int c : class_ids) f.instances.push_back({c, "t" + std::to_string(tag++)});
    return f;
}

// Independent oracle: enumerate every unordered pair of instances in every
// frame and bucket it by class pair.
Matrix brute_force_counts(const DetectionLog& log, int t, bool diagonal) {
    Matrix counts(t, t, 0.0);
    for (const auto& fr : log.frames) {
        const auto& ins = fr.instances;
        for (std::size_t p = 0; p < ins.size(); ++p) {
            for (std::size_t q = p + 1; q < ins.size(); ++q) {
                const int ci = ins[p].class_id;
                const int cj = ins[q].class_id;
                if (ci == cj) {
                    if (diagonal) counts(ci, ci) += 1.0;
                } else {
                    counts(ci, cj) += 1.0;
                    counts(cj, ci) += 1.0;
                }
            }
        }
    }
    return counts;
}

DetectionLog random_log(std::mt19937_64& rng, int t) {
    std::uniform_int_distribution<int> frame_count_dist(1, 5);
    std::uniform_int_distribution<int> instance_count_dist(0, 6);
    std::uniform_int_distribution<int> class_dist(0, t - 1);
    DetectionLog log;
    log.vlog_id = "random";
    const int stored = frame_count_dist(rng);
    log.frame_count = stored + instance_count_dist(rng);  // allow empty tail frames
    for (int f = 0; f < stored; ++f) {
        FrameDetections fr;
        fr.frame_index = f;
        const int n = instance_count_dist(rng);
        for (int i = 0; i < n; ++i)
            fr.instances.push_back({class_dist(rng), "i" + std::to_string(i)});
        log.frames.push_back(std::move(fr));
    }
    return log;
}

}  // namespace

TEST_CASE("one frame {person, cup, cup}") {
    auto vocab = toy_vocab();
    DetectionLog log{"v1", 1, {frame(0, {0, 1, 1})}};
    auto a = build_cooccurrence(log, vocab);
    CHECK(a(0, 1) == 2.0);  // person-cup: two cross pairs
    CHECK(a(1, 0) == 2.0);
    CHECK(a(1, 1) == 1.0);  // cup-cup: C(2,2) = 1
    CHECK(a(0, 0) == 0.0);
}

TEST_CASE("a single instance produces no pairs") {
    auto vocab = toy_vocab();
    DetectionLog log{"v1", 1, {frame(0, {2})}};
    auto a = build_cooccurrence(log, vocab);
    CHECK(max_abs(a) == 0.0);
}

TEST_CASE("two identical frames double the count") {
    auto vocab = toy_vocab();
    DetectionLog log{"v1", 2, {frame(0, {0, 1}), frame(1, {0, 1})}};
    auto a = build_cooccurrence(log, vocab);
    CHECK(a(0, 1) == 2.0);
}

TEST_CASE("diagonal switch turns off same-class pairs") {
    auto vocab = toy_vocab();
    DetectionLog log{"v1", 1, {frame(0, {1, 1, 1})}};
    GraphBuildOptions off;
    off.diagonal_pairs = false;
    CHECK(build_cooccurrence(log, vocab)(1, 1) == 3.0);  // C(3,2)
    CHECK(build_cooccurrence(log, vocab, off)(1, 1) == 0.0);
}

TEST_CASE("unknown class id is rejected naming the record") {
    auto vocab = toy_vocab();
    DetectionLog log{"vX", 1, {frame(0, {7})}};
    CHECK_THROWS_WITH_AS(build_cooccurrence(log, vocab), doctest::Contains("vX"),
                         std::invalid_argument);
}

TEST_CASE("duplicate instance tags are rejected") {
    auto vocab = toy_vocab();
    FrameDetections f;
    f.frame_index = 0;
    f.instances = {{0, "same"}, {1, "same"}};
    DetectionLog log{"v1", 1, {f}};
    CHECK_THROWS_WITH_AS(build_cooccurrence(log, vocab), doctest::Contains("same"),
                         std::invalid_argument);
}

TEST_CASE("frame index rules") {
    auto vocab = toy_vocab();
    DetectionLog decreasing{"v1", 3, {frame(2, {0}), frame(1, {0})}};
    CHECK_THROWS_AS(build_cooccurrence(decreasing, vocab), std::invalid_argument);
    DetectionLog outside{"v1", 2, {frame(5, {0})}};
    CHECK_THROWS_AS(build_cooccurrence(outside, vocab), std::invalid_argument);
}

TEST_CASE("normalize_adjacency") {
    auto vocab = toy_vocab();
    DetectionLog log{"v1", 4, {frame(0, {0, 1}), frame(1, {0, 1})}};
    auto a = build_cooccurrence(log, vocab);
    auto norm = normalize_adjacency(a, 4);
    CHECK(norm(0, 1) == 0.5);  // 2 / 4
    CHECK(bitwise_equal(normalize_adjacency(a, 1), a));
    CHECK_THROWS_WITH_AS(normalize_adjacency(a, 0), doctest::Contains("empty"),
                         std::invalid_argument);
}

TEST_CASE("frame duplication leaves the normalized adjacency unchanged") {
    auto vocab = toy_vocab();
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        DetectionLog log = random_log(rng, vocab.size());
        auto base = normalize_adjacency(build_cooccurrence(log, vocab), log.frame_count);
        const int k = 3;
        DetectionLog dup;
        dup.vlog_id = log.vlog_id;
        dup.frame_count = log.frame_count * k;
        int idx = 0;
        for (int rep = 0; rep < k; ++rep) {
            for (const auto& fr : log.frames) {
                FrameDetections copy = fr;
                copy.frame_index = idx++;
                dup.frames.push_back(copy);
            }
        }
        auto dupd = normalize_adjacency(build_cooccurrence(dup, vocab), dup.frame_count);
        CHECK(max_abs_diff(base, dupd) == 0.0);
    }
}

TEST_CASE("node features are exactly the identity") {
    auto vocab = toy_vocab();
    auto x = node_features(vocab);
    CHECK(bitwise_equal(x, Matrix::identity(3)));
    // X v = v for any v.
    Matrix v = Matrix::from_rows({{1.5}, {-2.0}, {0.25}});
    CHECK(bitwise_equal(matmul(x, v), v));
}

TEST_CASE("brute-force oracle over random small logs") {
    std::mt19937_64 rng(12345);
    for (int trial = 0; trial < 200; ++trial) {
        const int t = 2 + static_cast<int>(rng() % 5);  // T <= 6
        std::vector<std::string> names;
        for (int i = 0; i < t; ++i) names.push_back("c" + std::to_string(i));
        auto vocab = ObjectVocabulary::from_names(names);
        DetectionLog log = random_log(rng, t);
        for (bool diagonal : {true, false}) {
            GraphBuildOptions opts;
            opts.diagonal_pairs = diagonal;
            auto fast = build_cooccurrence(log, vocab, opts);
            auto slow = brute_force_counts(log, t, diagonal);
            CHECK(max_abs_diff(fast, slow) == 0.0);
        }
    }
}

TEST_CASE("build_vlog_graph assembles both matrices") {
    auto vocab = toy_vocab();
    DetectionLog log{"v9", 2, {frame(0, {0, 1})}};
    auto g = build_vlog_graph(log, vocab);
    CHECK(g.vlog_id == "v9");
    CHECK(g.adjacency(0, 1) == 0.5);
    CHECK(bitwise_equal(g.node_features, Matrix::identity(3)));
    // Symmetry holds exactly.
    CHECK(max_abs_diff(g.adjacency, transpose(g.adjacency)) == 0.0);
}
