#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "ffd/discovery.hpp"
#include "ffd/kb.hpp"
#include "ffd/util.hpp"

using namespace ffd;

namespace {

using Key = std::tuple<int, int, int>;

Key key_of(const ScoredFact& f) { return {f.triple.h, f.triple.r, f.triple.t}; }

std::set<Key> key_set(const std::vector<ScoredFact>& v) {
    std::set<Key> s;
    for (const ScoredFact& f : v) s.insert(key_of(f));
    return s;
}

AutoencoderParams random_ae(int d1, int R, std::uint64_t seed) {
    AutoencoderParams p;
    p.d1 = d1;
    p.num_relations = R;
    p.W_f = Mat(d1, R);
    p.b_f.assign(static_cast<std::size_t>(d1), 0.0);
    p.W_g = Mat(R, d1);
    p.b_g.assign(static_cast<std::size_t>(R), 0.0);
    Rng rng(seed);
    for (std::size_t i = 0; i < p.W_f.size(); ++i) p.W_f.data()[i] = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < p.W_g.size(); ++i) p.W_g.data()[i] = rng.uniform(-1.0, 1.0);
    for (double& v : p.b_f) v = rng.uniform(-0.5, 0.5);
    for (double& v : p.b_g) v = rng.uniform(-0.5, 0.5);
    return p;
}

AutoencoderParams zero_ae(int d1, int R) {
    AutoencoderParams p;
    p.d1 = d1;
    p.num_relations = R;
    p.W_f = Mat(d1, R, 0.0);
    p.b_f.assign(static_cast<std::size_t>(d1), 0.0);
    p.W_g = Mat(R, d1, 0.0);
    p.b_g.assign(static_cast<std::size_t>(R), 0.0);
    return p;
}

KbrModel random_kbr(KbrKind kind, int dim, int E, int R, std::uint64_t seed) {
    KbrModel m;
    m.kind = kind;
    m.dim = dim;
    m.num_entities = E;
    m.num_relations = R;
    m.entity_emb = Mat(E, dim);
    m.relation_emb = Mat(R, dim);
    Rng rng(seed);
    for (std::size_t i = 0; i < m.entity_emb.size(); ++i)
        m.entity_emb.data()[i] = rng.uniform(-0.8, 0.8);
    for (std::size_t i = 0; i < m.relation_emb.size(); ++i)
        m.relation_emb.data()[i] = rng.uniform(-0.8, 0.8);
    return m;
}

KbrModel zero_kbr(int dim, int E, int R) {
    KbrModel m;
    m.kind = KbrKind::distmult;
    m.dim = dim;
    m.num_entities = E;
    m.num_relations = R;
    m.entity_emb = Mat(E, dim, 0.0);
    m.relation_emb = Mat(R, dim, 0.0);
    return m;
}

TripleStore random_kb(int entities, int relations, std::uint64_t seed) {
    auto vocab = std::make_shared<Vocab>();
    for (int e = 0; e < entities; ++e) vocab->add_entity("e" + std::to_string(e));
    for (int r = 0; r < relations; ++r) vocab->add_relation("r" + std::to_string(r));
    Rng rng(seed);
    std::vector<Triple> facts;
    const int n = entities * 3;
    for (int i = 0; i < n; ++i)
        facts.push_back(Triple{static_cast<int>(rng.uniform_int(entities)),
                               static_cast<int>(rng.uniform_int(relations)),
                               static_cast<int>(rng.uniform_int(entities))});
    return TripleStore(vocab, facts);
}

// Top-n ids by (score desc, id asc), written independently of the library.
std::vector<int> oracle_top(const std::vector<double>& s, int n) {
    std::vector<int> ids;
    for (std::size_t i = 0; i < s.size(); ++i) ids.push_back(static_cast<int>(i));
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
        const double sa = s[static_cast<std::size_t>(a)], sb = s[static_cast<std::size_t>(b)];
        if (sa != sb) return sa > sb;
        return a < b;
    });
    if (static_cast<int>(ids.size()) > n) ids.resize(static_cast<std::size_t>(n));
    return ids;
}

// Straight-line reimplementation of the facet pipeline for cross-checking.
std::vector<ScoredFact> oracle_discover(int h, const AutoencoderParams& head_ae,
                                        const AutoencoderParams& tail_ae,
                                        const KbrModel& model, const TripleStore& train,
                                        const DiscoveryConfig& cfg) {
    const int E = train.vocab().num_entities();

    const std::vector<double> f1 =
        predict_relation_scores(head_ae, relation_profile(train, h, Role::head));
    const std::vector<int> rels = oracle_top(f1, cfg.n_h);

    std::vector<std::vector<double>> f2(static_cast<std::size_t>(E));
    for (int e = 0; e < E; ++e)
        f2[static_cast<std::size_t>(e)] =
            predict_relation_scores(tail_ae, relation_profile(train, e, Role::tail));

    struct Cand {
        int r, t;
        double f3;
    };
    std::vector<Cand> pool;
    for (int r : rels) {
        std::vector<double> col(static_cast<std::size_t>(E));
        for (int e = 0; e < E; ++e)
            col[static_cast<std::size_t>(e)] = f2[static_cast<std::size_t>(e)][static_cast<std::size_t>(r)];
        const std::vector<int> tails = oracle_top(col, cfg.n_t);

        const std::vector<double> f3 = tail_log_softmax(model, h, r);
        std::vector<Cand> per;
        for (int t : tails) per.push_back({r, t, f3[static_cast<std::size_t>(t)]});
        std::stable_sort(per.begin(), per.end(), [](const Cand& a, const Cand& b) {
            if (a.f3 != b.f3) return a.f3 > b.f3;
            return a.t < b.t;
        });
        if (cfg.cache_scope == DiscoveryConfig::CacheScope::per_relation &&
            static_cast<int>(per.size()) > cfg.n_f)
            per.resize(static_cast<std::size_t>(cfg.n_f));
        pool.insert(pool.end(), per.begin(), per.end());
    }
    if (cfg.cache_scope == DiscoveryConfig::CacheScope::per_head) {
        std::stable_sort(pool.begin(), pool.end(), [](const Cand& a, const Cand& b) {
            if (a.f3 != b.f3) return a.f3 > b.f3;
            if (a.r != b.r) return a.r < b.r;
            return a.t < b.t;
        });
        if (static_cast<int>(pool.size()) > cfg.n_f)
            pool.resize(static_cast<std::size_t>(cfg.n_f));
    }

    std::vector<ScoredFact> out;
    for (const Cand& c : pool) {
        if (cfg.exclude_known && train.contains(h, c.r, c.t)) continue;
        ScoredFact f;
        f.triple = Triple{h, c.r, c.t};
        f.f_h_r = f1[static_cast<std::size_t>(c.r)];
        f.f_t_r = f2[static_cast<std::size_t>(c.t)][static_cast<std::size_t>(c.r)];
        f.f_hr_t = c.f3;
        f.confidence = cfg.lambda1 * f.f_h_r + cfg.lambda2 * f.f_t_r + cfg.lambda3 * f.f_hr_t;
        out.push_back(f);
    }
    std::stable_sort(out.begin(), out.end(), [](const ScoredFact& a, const ScoredFact& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.triple.r != b.triple.r) return a.triple.r < b.triple.r;
        return a.triple.t < b.triple.t;
    });
    if (static_cast<int>(out.size()) > cfg.k_bar) out.resize(static_cast<std::size_t>(cfg.k_bar));
    return out;
}

void check_same(const std::vector<ScoredFact>& got, const std::vector<ScoredFact>& want) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(key_of(got[i]) == key_of(want[i]));
        CHECK(got[i].confidence == doctest::Approx(want[i].confidence).epsilon(1e-12));
        CHECK(got[i].f_h_r == doctest::Approx(want[i].f_h_r).epsilon(1e-12));
        CHECK(got[i].f_t_r == doctest::Approx(want[i].f_t_r).epsilon(1e-12));
        CHECK(got[i].f_hr_t == doctest::Approx(want[i].f_hr_t).epsilon(1e-12));
    }
}

}  // namespace

TEST_CASE("confidence is the weighted facet sum") {
    DiscoveryConfig cfg;
    cfg.lambda1 = 1.0;
    cfg.lambda2 = 1.0;
    cfg.lambda3 = 0.5;
    CHECK(confidence(-1.0, -2.0, -4.0, cfg) == doctest::Approx(-5.0).epsilon(1e-12));
    cfg.lambda1 = 0.0;
    cfg.lambda2 = 0.0;
    cfg.lambda3 = 1.0;
    CHECK(confidence(-1.0, -2.0, -4.0, cfg) == doctest::Approx(-4.0).epsilon(1e-12));
    cfg.lambda1 = 2.0;
    cfg.lambda2 = 0.25;
    cfg.lambda3 = 0.0;
    CHECK(confidence(0.5, -2.0, 99.0, cfg) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("tail facet table caches per-entity tail scores") {
    TripleStore kb = random_kb(10, 4, 1);
    AutoencoderParams tail_ae = random_ae(5, 4, 2);
    TailFacetTable table(tail_ae, kb);
    REQUIRE(table.ready());
    CHECK(table.num_entities() == 10);
    CHECK(table.num_relations() == 4);
    for (int e = 0; e < 10; ++e) {
        std::vector<double> want =
            predict_relation_scores(tail_ae, relation_profile(kb, e, Role::tail));
        for (int r = 0; r < 4; ++r)
            CHECK(table.at(e, r) == doctest::Approx(want[static_cast<std::size_t>(r)]).epsilon(1e-12));
    }

    std::vector<std::vector<int>> top = table.top_tails(3);
    REQUIRE(top.size() == 4);
    for (int r = 0; r < 4; ++r) {
        std::vector<double> col(10);
        for (int e = 0; e < 10; ++e) col[static_cast<std::size_t>(e)] = table.at(e, r);
        CHECK(top[static_cast<std::size_t>(r)] == oracle_top(col, 3));
    }

    TailFacetTable blank;
    CHECK_FALSE(blank.ready());
    CHECK_THROWS_AS((void)blank.top_tails(3), StateError);
    AutoencoderParams untrained;
    CHECK_THROWS_AS(TailFacetTable(untrained, kb), StateError);
    AutoencoderParams wrong = random_ae(5, 6, 3);
    CHECK_THROWS_AS(TailFacetTable(wrong, kb), StateError);
}

TEST_CASE("per-head discovery matches an independent reimplementation") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        TripleStore kb = random_kb(12, 4, 100 + seed);
        AutoencoderParams head_ae = random_ae(6, 4, 200 + seed);
        AutoencoderParams tail_ae = random_ae(6, 4, 300 + seed);
        KbrModel model = random_kbr(KbrKind::analogy, 6, 12, 4, 400 + seed);

        for (auto scope : {DiscoveryConfig::CacheScope::per_relation,
                           DiscoveryConfig::CacheScope::per_head}) {
            DiscoveryConfig cfg;
            cfg.n_h = 3;
            cfg.n_t = 5;
            cfg.n_f = 2;
            cfg.k_bar = 6;
            cfg.cache_scope = scope;
            for (int h = 0; h < 12; h += 3) {
                std::vector<ScoredFact> got =
                    discover_for_head(h, head_ae, tail_ae, model, kb, cfg);
                std::vector<ScoredFact> want =
                    oracle_discover(h, head_ae, tail_ae, model, kb, cfg);
                check_same(got, want);
            }
            // keeping known facts exercises the other filter branch
            cfg.exclude_known = false;
            std::vector<ScoredFact> got = discover_for_head(1, head_ae, tail_ae, model, kb, cfg);
            check_same(got, oracle_discover(1, head_ae, tail_ae, model, kb, cfg));
        }
    }
}

TEST_CASE("exhaustive ranking matches a whole-grid oracle") {
    TripleStore kb = random_kb(11, 3, 9);
    KbrModel model = random_kbr(KbrKind::complex_, 6, 11, 3, 10);
    Mat grid = joint_log_softmax(model, 4);

    for (bool exclude : {false, true}) {
        std::vector<ScoredFact> got = exhaustive_kbr_rank(model, 4, 7, kb, exclude);

        struct Row {
            double s;
            int r, t;
        };
        std::vector<Row> all;
        for (int r = 0; r < 3; ++r)
            for (int t = 0; t < 11; ++t) {
                if (exclude && kb.contains(4, r, t)) continue;
                all.push_back({grid(r, t), r, t});
            }
        std::stable_sort(all.begin(), all.end(), [](const Row& a, const Row& b) {
            if (a.s != b.s) return a.s > b.s;
            if (a.r != b.r) return a.r < b.r;
            return a.t < b.t;
        });
        all.resize(7);

        REQUIRE(got.size() == 7);
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].triple.h == 4);
            CHECK(got[i].triple.r == all[i].r);
            CHECK(got[i].triple.t == all[i].t);
            CHECK(got[i].f_hr_t == doctest::Approx(all[i].s).epsilon(1e-9));
            CHECK(got[i].confidence == doctest::Approx(all[i].s).epsilon(1e-9));
            CHECK(got[i].f_h_r == 0.0);
            CHECK(got[i].f_t_r == 0.0);
        }
    }

    CHECK_THROWS_AS((void)exhaustive_kbr_rank(model, -1, 5, kb, true), LookupError);
    CHECK_THROWS_AS((void)exhaustive_kbr_rank(model, 0, 0, kb, true), ConfigError);
    KbrModel blank;
    CHECK_THROWS_AS((void)exhaustive_kbr_rank(blank, 0, 5, kb, true), StateError);
}

TEST_CASE("single-relation vacuous pruning reduces to the exhaustive ranking") {
    // with one relation the per-relation and whole-grid normalizers coincide,
    // so the facet pipeline with inert facets must equal the exhaustive list
    TripleStore kb = random_kb(14, 1, 21);
    AutoencoderParams head_ae = random_ae(4, 1, 22);
    AutoencoderParams tail_ae = random_ae(4, 1, 23);
    KbrModel model = random_kbr(KbrKind::distmult, 6, 14, 1, 24);

    DiscoveryConfig cfg;
    cfg.n_h = 1;
    cfg.n_t = 14;
    cfg.n_f = 14;
    cfg.k_bar = 10;
    cfg.lambda1 = 0.0;
    cfg.lambda2 = 0.0;
    cfg.lambda3 = 1.0;

    for (bool exclude : {false, true}) {
        cfg.exclude_known = exclude;
        for (int h : {0, 3, 7}) {
            std::vector<ScoredFact> ffd = discover_for_head(h, head_ae, tail_ae, model, kb, cfg);
            std::vector<ScoredFact> kbr = exhaustive_kbr_rank(model, h, 10, kb, exclude);
            REQUIRE(ffd.size() == kbr.size());
            for (std::size_t i = 0; i < ffd.size(); ++i) {
                CHECK(key_of(ffd[i]) == key_of(kbr[i]));
                CHECK(ffd[i].confidence == doctest::Approx(kbr[i].confidence).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("candidate pools grow monotonically with the budgets") {
    TripleStore kb = random_kb(12, 5, 77);
    AutoencoderParams head_ae = random_ae(5, 5, 78);
    AutoencoderParams tail_ae = random_ae(5, 5, 79);
    KbrModel model = random_kbr(KbrKind::analogy, 6, 12, 5, 80);
    TailFacetTable table(tail_ae, kb);

    auto candidates = [&](int n_h, int n_t, int n_f) {
        DiscoveryConfig cfg;
        cfg.n_h = n_h;
        cfg.n_t = n_t;
        cfg.n_f = n_f;
        cfg.k_bar = 1000;
        return key_set(discover_candidates(2, head_ae, table, table.top_tails(cfg.n_t),
                                           model, kb, cfg));
    };

    // more relations kept: pool can only gain triples
    for (int n_h = 1; n_h < 5; ++n_h) {
        std::set<Key> small = candidates(n_h, 6, 3);
        std::set<Key> big = candidates(n_h + 1, 6, 3);
        CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    }
    // deeper per-relation cut, tail pool fixed
    for (int n_f = 1; n_f < 6; ++n_f) {
        std::set<Key> small = candidates(3, 6, n_f);
        std::set<Key> big = candidates(3, 6, n_f + 1);
        CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    }
    // wider tail pool, cut kept vacuous alongside it
    for (int n_t = 2; n_t < 12; n_t += 2) {
        std::set<Key> small = candidates(3, n_t, n_t);
        std::set<Key> big = candidates(3, n_t + 2, n_t + 2);
        CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    }
}

TEST_CASE("exact ties break by relation then tail deterministically") {
    // all-zero components score everything identically, leaving only the
    // deterministic tie order
    const int E = 6, R = 3;
    auto vocab = std::make_shared<Vocab>();
    for (int e = 0; e < E; ++e) vocab->add_entity("e" + std::to_string(e));
    for (int r = 0; r < R; ++r) vocab->add_relation("r" + std::to_string(r));
    TripleStore kb(vocab, {Triple{0, 0, 1}, Triple{1, 1, 2}});

    AutoencoderParams head_ae = zero_ae(3, R);
    AutoencoderParams tail_ae = zero_ae(3, R);
    KbrModel model = zero_kbr(4, E, R);

    DiscoveryConfig cfg;
    cfg.n_h = 2;
    cfg.n_t = 3;
    cfg.n_f = 2;
    cfg.k_bar = 50;
    cfg.exclude_known = false;

    std::vector<ScoredFact> got = discover_for_head(0, head_ae, tail_ae, model, kb, cfg);
    // relations 0 and 1 survive n_h, tails 0 and 1 survive n_f; order is
    // (r asc, t asc) once every confidence ties
    REQUIRE(got.size() == 4);
    CHECK(key_of(got[0]) == Key{0, 0, 0});
    CHECK(key_of(got[1]) == Key{0, 0, 1});
    CHECK(key_of(got[2]) == Key{0, 1, 0});
    CHECK(key_of(got[3]) == Key{0, 1, 1});
    for (const ScoredFact& f : got)
        CHECK(f.confidence == doctest::Approx(got[0].confidence).epsilon(1e-12));
}

TEST_CASE("known facts are dropped after the per-relation cut, not before") {
    // both n_f slots of relation 0 are known training facts; exclusion must
    // leave relation 0 empty rather than promote the next tails
    const int E = 6, R = 2;
    auto vocab = std::make_shared<Vocab>();
    for (int e = 0; e < E; ++e) vocab->add_entity("e" + std::to_string(e));
    for (int r = 0; r < R; ++r) vocab->add_relation("r" + std::to_string(r));
    TripleStore kb(vocab, {Triple{0, 0, 0}, Triple{0, 0, 1}});

    AutoencoderParams head_ae = zero_ae(3, R);
    AutoencoderParams tail_ae = zero_ae(3, R);
    KbrModel model = zero_kbr(4, E, R);

    DiscoveryConfig cfg;
    cfg.n_h = 2;
    cfg.n_t = 6;
    cfg.n_f = 2;
    cfg.k_bar = 50;
    cfg.exclude_known = true;

    std::vector<ScoredFact> got = discover_for_head(0, head_ae, tail_ae, model, kb, cfg);
    REQUIRE(got.size() == 2);
    CHECK(key_of(got[0]) == Key{0, 1, 0});
    CHECK(key_of(got[1]) == Key{0, 1, 1});

    // with the filter off, the same slots return the known facts instead
    cfg.exclude_known = false;
    got = discover_for_head(0, head_ae, tail_ae, model, kb, cfg);
    REQUIRE(got.size() == 4);
    CHECK(key_of(got[0]) == Key{0, 0, 0});
    CHECK(key_of(got[1]) == Key{0, 0, 1});
}

TEST_CASE("multi-head discovery visits deduplicated heads in ascending order") {
    TripleStore kb = random_kb(10, 3, 55);
    AutoencoderParams head_ae = random_ae(4, 3, 56);
    AutoencoderParams tail_ae = random_ae(4, 3, 57);
    KbrModel model = random_kbr(KbrKind::distmult, 4, 10, 3, 58);

    DiscoveryConfig cfg;
    cfg.n_h = 2;
    cfg.n_t = 4;
    cfg.n_f = 2;
    cfg.k_bar = 5;

    std::vector<int> heads{7, 2, 5, 2, 7};
    std::vector<ScoredFact> all = discover_all(heads, head_ae, tail_ae, model, kb, cfg);

    std::vector<ScoredFact> want;
    for (int h : {2, 5, 7}) {
        std::vector<ScoredFact> one = discover_for_head(h, head_ae, tail_ae, model, kb, cfg);
        want.insert(want.end(), one.begin(), one.end());
    }
    check_same(all, want);
}

TEST_CASE("discovery rejects bad configs, ids, and untrained parts") {
    TripleStore kb = random_kb(8, 3, 60);
    AutoencoderParams head_ae = random_ae(4, 3, 61);
    AutoencoderParams tail_ae = random_ae(4, 3, 62);
    KbrModel model = random_kbr(KbrKind::distmult, 4, 8, 3, 63);
    DiscoveryConfig cfg;
    cfg.n_h = 2;
    cfg.n_t = 4;
    cfg.n_f = 2;

    DiscoveryConfig bad = cfg;
    bad.n_h = 0;
    CHECK_THROWS_AS((void)discover_for_head(0, head_ae, tail_ae, model, kb, bad), ConfigError);
    bad = cfg;
    bad.n_f = 5;  // exceeds n_t
    CHECK_THROWS_AS((void)discover_for_head(0, head_ae, tail_ae, model, kb, bad), ConfigError);
    bad = cfg;
    bad.k_bar = 0;
    CHECK_THROWS_AS((void)discover_for_head(0, head_ae, tail_ae, model, kb, bad), ConfigError);
    bad = cfg;
    bad.lambda2 = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS((void)discover_for_head(0, head_ae, tail_ae, model, kb, bad), ConfigError);

    CHECK_THROWS_AS((void)discover_for_head(8, head_ae, tail_ae, model, kb, cfg), LookupError);

    AutoencoderParams blank;
    CHECK_THROWS_AS((void)discover_for_head(0, blank, tail_ae, model, kb, cfg), StateError);
    KbrModel small = random_kbr(KbrKind::distmult, 4, 7, 3, 64);
    CHECK_THROWS_AS((void)discover_for_head(0, head_ae, tail_ae, small, kb, cfg), StateError);

    TailFacetTable table(tail_ae, kb);
    std::vector<std::vector<int>> short_tails(2);
    CHECK_THROWS_AS(
        (void)discover_candidates(0, head_ae, table, short_tails, model, kb, cfg),
        ContractError);
}

TEST_CASE("scored fact files round trip and reject malformed rows") {
    namespace fs = std::filesystem;
    const std::string dir = (fs::temp_directory_path() / "ffd_disc_io").string();
    fs::create_directories(dir);
    const std::string path = dir + "/facts.tsv";

    TripleStore kb = random_kb(9, 3, 70);
    AutoencoderParams head_ae = random_ae(4, 3, 71);
    AutoencoderParams tail_ae = random_ae(4, 3, 72);
    KbrModel model = random_kbr(KbrKind::analogy, 4, 9, 3, 73);
    DiscoveryConfig cfg;
    cfg.n_h = 3;
    cfg.n_t = 5;
    cfg.n_f = 3;
    cfg.k_bar = 8;
    std::vector<ScoredFact> facts =
        discover_all(std::vector<int>{0, 1, 2, 3}, head_ae, tail_ae, model, kb, cfg);
    REQUIRE(!facts.empty());

    save_scored_facts(facts, kb.vocab(), path);
    std::vector<ScoredFact> rt = load_scored_facts(path, kb.vocab());
    REQUIRE(rt.size() == facts.size());
    for (std::size_t i = 0; i < facts.size(); ++i) {
        CHECK(key_of(rt[i]) == key_of(facts[i]));
        CHECK(rt[i].confidence == doctest::Approx(facts[i].confidence).epsilon(1e-10));
        CHECK(rt[i].f_h_r == doctest::Approx(facts[i].f_h_r).epsilon(1e-10));
        CHECK(rt[i].f_t_r == doctest::Approx(facts[i].f_t_r).epsilon(1e-10));
        CHECK(rt[i].f_hr_t == doctest::Approx(facts[i].f_hr_t).epsilon(1e-10));
    }

    // saving again yields identical bytes
    const std::string before = read_file(path);
    save_scored_facts(rt, kb.vocab(), path);
    CHECK(read_file(path) == before);

    write_file_atomic(dir + "/short.tsv", "e0\tr0\te1\t-1.5\t-0.5\t-0.5\n");
    CHECK_THROWS_AS((void)load_scored_facts(dir + "/short.tsv", kb.vocab()), ParseError);
    write_file_atomic(dir + "/num.tsv", "e0\tr0\te1\txyz\t-0.5\t-0.5\t-0.5\n");
    CHECK_THROWS_AS((void)load_scored_facts(dir + "/num.tsv", kb.vocab()), ParseError);
    write_file_atomic(dir + "/label.tsv", "nope\tr0\te1\t-1\t-1\t-1\t-1\n");
    CHECK_THROWS_AS((void)load_scored_facts(dir + "/label.tsv", kb.vocab()), VocabError);
}
