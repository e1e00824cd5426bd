#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "ffd/util.hpp"

using namespace ffd;

TEST_CASE("fnv1a matches the published 64-bit reference values") {
    // offset basis and single-character vectors from the FNV reference tables
    CHECK(fnv1a("") == 14695981039346656037ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
    static_assert(fnv1a("split") != fnv1a("ae:head"));
}

TEST_CASE("splitmix64 reproduces the reference stream for seed 0") {
    std::uint64_t s = 0;
    CHECK(splitmix64(s) == 0xe220a8397b1dcdafull);
    CHECK(splitmix64(s) == 0x6e789e6aa1b965f4ull);
    CHECK(splitmix64(s) == 0x06c45d188009454full);
}

TEST_CASE("rng streams are deterministic and label-separated") {
    Rng a = seeded_rng(42, "split");
    Rng b = seeded_rng(42, "split");
    Rng c = seeded_rng(42, "ae:head");
    bool same = true, diff = false;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t va = a();
        same = same && (va == b());
        diff = diff || (va != c());
    }
    CHECK(same);
    CHECK(diff);
    CHECK(derive_seed(42, "split") == derive_seed(42, "split"));
    CHECK(derive_seed(42, "split") != derive_seed(42, "ae:head"));
    CHECK(derive_seed(42, "split") != derive_seed(43, "split"));
}

TEST_CASE("uniform stays in [0,1) and fills the unit interval") {
    Rng rng(7);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("uniform_int covers every residue without bias blowups") {
    Rng rng(9);
    std::vector<int> counts(7, 0);
    const int draws = 70000;
    for (int i = 0; i < draws; ++i) {
        const int v = rng.uniform_int(7);
        REQUIRE(v >= 0);
        REQUIRE(v < 7);
        ++counts[static_cast<std::size_t>(v)];
    }
    // each bucket expects 10000; 4 sigma is about 380
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
    CHECK(rng.uniform_int(1) == 0);
}

TEST_CASE("normal has unit moments at Monte Carlo precision") {
    Rng rng(11);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("shuffle permutes and is seed-stable") {
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    std::vector<int> w = v;
    Rng r1(5), r2(5);
    r1.shuffle(v);
    r2.shuffle(w);
    CHECK(v == w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expect(50);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(sorted == expect);
    CHECK(v != expect);  // astronomically unlikely to be identity
}

TEST_CASE("Mat is row-major with stable row pointers") {
    Mat m(3, 4);
    CHECK(m.rows() == 3);
    CHECK(m.cols() == 4);
    m(1, 2) = 5.0;
    CHECK(m.row(1)[2] == 5.0);
    CHECK(m.data()[1 * 4 + 2] == 5.0);
    m.fill(1.5);
    CHECK(m(2, 3) == 1.5);
    CHECK(m.size() == 12);
}

TEST_CASE("adam takes near-lr steps under a constant unit gradient") {
    // with g = 1 the bias-corrected moments are both exactly 1 every step,
    // so each update is lr/(1 + eps) regardless of step count
    std::vector<double> p{0.0};
    std::vector<double> g{1.0};
    Adam opt(1, 0.1);
    for (int i = 0; i < 5; ++i)
        opt.step(p, g);
    CHECK(p[0] == doctest::Approx(-0.5).epsilon(1e-6));
}

TEST_CASE("adam sparse step touches only the given indices") {
    std::vector<double> p{1.0, 2.0, 3.0, 4.0};
    std::vector<double> g{0.5, 0.5, 0.5, 0.5};
    Adam opt(4, 0.1);
    const std::vector<std::size_t> idx{1, 3};
    opt.step_sparse(p, g, idx);
    CHECK(p[0] == 1.0);
    CHECK(p[2] == 3.0);
    CHECK(p[1] < 2.0);
    CHECK(p[3] < 4.0);
}

TEST_CASE("adam sparse over all indices equals the dense step") {
    std::vector<double> pd{0.3, -0.2, 0.7};
    std::vector<double> ps = pd;
    std::vector<double> g{0.1, -0.4, 0.25};
    Adam dense(3, 0.05), sparse(3, 0.05);
    std::vector<std::size_t> all{0, 1, 2};
    for (int i = 0; i < 3; ++i) {
        dense.step(pd, g);
        sparse.step_sparse(ps, g, all);
    }
    for (int i = 0; i < 3; ++i)
        CHECK(pd[static_cast<std::size_t>(i)] ==
              doctest::Approx(ps[static_cast<std::size_t>(i)]).epsilon(1e-15));
}

TEST_CASE("file round trip is atomic and errors name the path") {
    namespace fs = std::filesystem;
    const std::string dir = (fs::temp_directory_path() / "ffd_util_test").string();
    fs::create_directories(dir);
    const std::string path = dir + "/x.txt";
    write_file_atomic(path, "hello\nworld\n");
    CHECK(read_file(path) == "hello\nworld\n");
    write_file_atomic(path, "v2");
    CHECK(read_file(path) == "v2");
    // no stray temp files left behind
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        (void)e;
        ++files;
    }
    CHECK(files == 1);
    CHECK_THROWS_AS((void)read_file(dir + "/missing.txt"), IoError);
    try {
        (void)read_file(dir + "/missing.txt");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("missing.txt") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("format_g12 prints round numbers exactly and long ones to 12 digits") {
    CHECK(format_g12(0.5) == "0.5");
    CHECK(format_g12(0.0) == "0");
    CHECK(format_g12(-3.0) == "-3");
    CHECK(format_g12(1.0 / 3.0) == "0.333333333333");
    CHECK(format_g12(1e-15) == "1e-15");
}

TEST_CASE("binary buffers round trip and reject corruption") {
    BinWriter w;
    w.magic("FFDTEST1");
    w.u32(42);
    w.u64(1ull << 40);
    w.f64(-0.125);
    std::vector<double> xs{1.0, 2.5, -3.25};
    w.f64s(xs);

    BinReader r(w.buffer());
    r.expect_magic("FFDTEST1", "test blob");
    CHECK(r.u32() == 42);
    CHECK(r.u64() == (1ull << 40));
    CHECK(r.f64() == -0.125);
    std::vector<double> back(3);
    r.f64s(back);
    CHECK(back == xs);
    CHECK(r.done());

    BinReader bad(w.buffer());
    CHECK_THROWS_AS(bad.expect_magic("WRONGMAG", "test blob"), ParseError);

    BinReader trunc(std::string(w.buffer()).substr(0, 10));
    trunc.expect_magic("FFDTEST1", "test blob");
    CHECK_THROWS_AS((void)trunc.u64(), ParseError);
}

TEST_CASE("logsumexp is exact on hand values and immune to overflow") {
    std::vector<double> two{0.0, 0.0};
    CHECK(logsumexp(two) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    std::vector<double> one{3.5};
    CHECK(logsumexp(one) == 3.5);
    std::vector<double> big{1000.0, 1000.0};
    CHECK(logsumexp(big) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
    std::vector<double> mixed{-1e9, 0.0};
    CHECK(logsumexp(mixed) == doctest::Approx(0.0).epsilon(1e-12));
    std::vector<double> empty;
    CHECK_THROWS_AS((void)logsumexp(empty), ContractError);
}

TEST_CASE("error taxonomy roots at FfdError") {
    CHECK_THROWS_AS(throw ParseError("x"), FfdError);
    CHECK_THROWS_AS(throw TrainingError("diverged", 7), FfdError);
    try {
        throw TrainingError("diverged", 7);
    } catch (const TrainingError& e) {
        CHECK(e.epoch == 7);
        CHECK(std::string(e.what()).find("epoch 7") != std::string::npos);
    }
}
