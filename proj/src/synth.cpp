#include "ffd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "ffd/util.hpp"

namespace ffd {

namespace {

std::string padded(const char* prefix, int id, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, id);
    return std::string(buf);
}

std::shared_ptr<Vocab> fresh_vocab(int num_entities, int num_relations) {
    auto vocab = std::make_shared<Vocab>();
    for (int e = 0; e < num_entities; ++e) vocab->add_entity(padded("e", e, 5));
    for (int r = 0; r < num_relations; ++r) vocab->add_relation(padded("r", r, 3));
    return vocab;
}

// Sample an index in [0, n) with P(i) proportional to 1/(i+1)^s.
class ZipfSampler {
  public:
    ZipfSampler(int n, double s) : cum_(static_cast<std::size_t>(n)) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += 1.0 / std::pow(static_cast<double>(i + 1), s);
            cum_[static_cast<std::size_t>(i)] = acc;
        }
    }

    int draw(Rng& rng) const {
        const double u = rng.uniform() * cum_.back();
        auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
        if (it == cum_.end()) --it;
        return static_cast<int>(it - cum_.begin());
    }

  private:
    std::vector<double> cum_;
};

}  // namespace

TripleStore make_cluster_kb(const ClusterKbConfig& cfg) {
    if (cfg.num_entities < 2 || cfg.num_relations < 1 || cfg.num_clusters < 1)
        throw ConfigError("cluster kb needs >= 2 entities, >= 1 relation and cluster");
    if (cfg.num_clusters > cfg.num_relations || cfg.num_clusters > cfg.num_entities / 2)
        throw ConfigError("cluster kb: too many clusters for the inventory");
    if (cfg.relation_presence <= 0.0 || cfg.relation_presence > 1.0)
        throw ConfigError("cluster kb: relation_presence must be in (0, 1]");
    if (cfg.tails_per_relation < 1)
        throw ConfigError("cluster kb: tails_per_relation must be >= 1");

    Rng rng = seeded_rng(cfg.seed, "surrogate");
    auto vocab = fresh_vocab(cfg.num_entities, cfg.num_relations);

    // entity e -> cluster by block, relation r -> cluster round robin
    const int per_cluster =
        (cfg.num_entities + cfg.num_clusters - 1) / cfg.num_clusters;
    std::vector<std::vector<int>> members(static_cast<std::size_t>(cfg.num_clusters));
    for (int e = 0; e < cfg.num_entities; ++e)
        members[static_cast<std::size_t>(std::min(e / per_cluster, cfg.num_clusters - 1))]
            .push_back(e);
    std::vector<std::vector<int>> cluster_rels(static_cast<std::size_t>(cfg.num_clusters));
    for (int r = 0; r < cfg.num_relations; ++r)
        cluster_rels[static_cast<std::size_t>(r % cfg.num_clusters)].push_back(r);

    std::vector<Triple> facts;
    for (int c = 0; c < cfg.num_clusters; ++c) {
        const auto& ents = members[static_cast<std::size_t>(c)];
        const auto& rels = cluster_rels[static_cast<std::size_t>(c)];
        for (int h : ents) {
            for (int r : rels) {
                if (rng.uniform() >= cfg.relation_presence) continue;
                for (int k = 0; k < cfg.tails_per_relation; ++k) {
                    int t = h;
                    for (int tries = 0; tries < 16 && t == h; ++tries)
                        t = ents[static_cast<std::size_t>(
                            rng.uniform_int(static_cast<int>(ents.size())))];
                    if (t != h) facts.push_back(Triple{h, r, t});
                }
            }
        }
    }
    return TripleStore(std::move(vocab), std::move(facts));
}

TripleStore make_typed_kb(const TypedKbConfig& cfg) {
    if (cfg.num_types < 1 || cfg.entities_per_type < 2 || cfg.num_relations < 1)
        throw ConfigError("typed kb: degenerate size parameters");
    if (cfg.subclusters < 1 || cfg.subclusters > cfg.entities_per_type)
        throw ConfigError("typed kb: subclusters must be in [1, entities_per_type]");
    if (cfg.relation_presence <= 0.0 || cfg.relation_presence > 1.0)
        throw ConfigError("typed kb: relation_presence must be in (0, 1]");
    if (cfg.subcluster_fidelity < 0.0 || cfg.subcluster_fidelity > 1.0)
        throw ConfigError("typed kb: subcluster_fidelity must be in [0, 1]");
    if (cfg.pair_fact_mean < 1.0)
        throw ConfigError("typed kb: pair_fact_mean must be >= 1");
    if (cfg.max_pair_facts < 1)
        throw ConfigError("typed kb: max_pair_facts must be >= 1");
    if (cfg.noise_fraction < 0.0 || cfg.noise_fraction >= 1.0)
        throw ConfigError("typed kb: noise_fraction must be in [0, 1)");

    const int T = cfg.num_types;
    const int B = cfg.subclusters;
    const int ne = T * cfg.entities_per_type;

    Rng rng = seeded_rng(cfg.seed, "surrogate");
    auto vocab = fresh_vocab(ne, cfg.num_relations);

    const auto type_of = [&](int e) { return e / cfg.entities_per_type; };
    const auto sub_of = [&](int e) { return (e % cfg.entities_per_type) % B; };

    // members[type][sub] in ascending id order; the Zipf rank of an entity is
    // its position here, so low ids inside a block are the popular tails
    std::vector<std::vector<std::vector<int>>> members(
        static_cast<std::size_t>(T),
        std::vector<std::vector<int>>(static_cast<std::size_t>(B)));
    for (int e = 0; e < ne; ++e)
        members[static_cast<std::size_t>(type_of(e))][static_cast<std::size_t>(sub_of(e))]
            .push_back(e);

    // relation signatures: a deterministic shuffle of all ordered type pairs,
    // cycled if the inventory is larger than T*T
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(T) * static_cast<std::size_t>(T));
    for (int a = 0; a < T; ++a)
        for (int b = 0; b < T; ++b) pairs.emplace_back(a, b);
    rng.shuffle(pairs);
    std::vector<int> head_type(static_cast<std::size_t>(cfg.num_relations));
    std::vector<int> tail_type(static_cast<std::size_t>(cfg.num_relations));
    std::vector<std::vector<int>> sub_map(static_cast<std::size_t>(cfg.num_relations));
    for (int r = 0; r < cfg.num_relations; ++r) {
        const auto& p = pairs[static_cast<std::size_t>(r) % pairs.size()];
        head_type[static_cast<std::size_t>(r)] = p.first;
        tail_type[static_cast<std::size_t>(r)] = p.second;
        std::vector<int> perm(static_cast<std::size_t>(B));
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        sub_map[static_cast<std::size_t>(r)] = std::move(perm);
    }
    std::vector<std::vector<int>> rels_of_type(static_cast<std::size_t>(T));
    for (int r = 0; r < cfg.num_relations; ++r)
        rels_of_type[static_cast<std::size_t>(head_type[static_cast<std::size_t>(r)])]
            .push_back(r);

    // block sizes vary by at most one, so a per-size sampler cache stays tiny
    std::vector<std::unique_ptr<ZipfSampler>> cache(
        static_cast<std::size_t>(cfg.entities_per_type) + 1);
    const auto draw_in_block = [&](const std::vector<int>& block, Rng& r) {
        auto& slot = cache[block.size()];
        if (!slot)
            slot = std::make_unique<ZipfSampler>(static_cast<int>(block.size()), cfg.zipf_s);
        return block[static_cast<std::size_t>(slot->draw(r))];
    };

    const double geom_stop = 1.0 / cfg.pair_fact_mean;

    std::vector<Triple> facts;
    for (int h = 0; h < ne; ++h) {
        const int ht = type_of(h);
        const int hs = sub_of(h);
        for (int r : rels_of_type[static_cast<std::size_t>(ht)]) {
            if (rng.uniform() >= cfg.relation_presence) continue;
            int count = 1;
            while (count < cfg.max_pair_facts && rng.uniform() >= geom_stop) ++count;
            const int target_sub = sub_map[static_cast<std::size_t>(r)][static_cast<std::size_t>(hs)];
            const int tt = tail_type[static_cast<std::size_t>(r)];
            for (int k = 0; k < count; ++k) {
                int sub = target_sub;
                if (rng.uniform() >= cfg.subcluster_fidelity) sub = rng.uniform_int(B);
                const auto& block =
                    members[static_cast<std::size_t>(tt)][static_cast<std::size_t>(sub)];
                int t = h;
                for (int tries = 0; tries < 16 && t == h; ++tries)
                    t = draw_in_block(block, rng);
                if (t != h) facts.push_back(Triple{h, r, t});
            }
        }
    }

    const auto n_noise = static_cast<std::size_t>(
        std::llround(cfg.noise_fraction * static_cast<double>(facts.size())));
    for (std::size_t i = 0; i < n_noise; ++i) {
        const int h = rng.uniform_int(ne);
        const auto& rels = rels_of_type[static_cast<std::size_t>(type_of(h))];
        if (rels.empty()) continue;
        const int r = rels[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(rels.size())))];
        const int tt = tail_type[static_cast<std::size_t>(r)];
        const int base = tt * cfg.entities_per_type;
        int t = base + rng.uniform_int(cfg.entities_per_type);
        if (t == h) continue;
        facts.push_back(Triple{h, r, t});
    }

    return TripleStore(std::move(vocab), std::move(facts));
}

TripleStore subsample_by_heads(const TripleStore& all, double fraction,
                               int min_head_relations, std::uint64_t seed) {
    if (fraction <= 0.0 || fraction > 1.0)
        throw ConfigError("subsample fraction must be in (0, 1]");
    if (min_head_relations < 0)
        throw ConfigError("min_head_relations must be >= 0");
    (void)seed;  // the stratified stride is deterministic on its own

    const int ne = all.vocab().num_entities();
    std::vector<std::pair<int, int>> degree;  // (distinct head relations, head)
    degree.reserve(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
        std::set<int> rels;
        for (const auto& [r, t] : all.by_head(e)) rels.insert(r);
        if (static_cast<int>(rels.size()) >= min_head_relations && !rels.empty())
            degree.emplace_back(static_cast<int>(rels.size()), e);
    }
    std::sort(degree.begin(), degree.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    const int stride = std::max(1, static_cast<int>(std::lround(1.0 / fraction)));
    std::vector<char> keep(static_cast<std::size_t>(ne), 0);
    for (std::size_t i = 0; i < degree.size(); i += static_cast<std::size_t>(stride))
        keep[static_cast<std::size_t>(degree[i].second)] = 1;

    std::vector<Triple> kept;
    for (const Triple& f : all.facts())
        if (keep[static_cast<std::size_t>(f.h)]) kept.push_back(f);
    if (kept.empty()) throw ConfigError("subsample kept no facts; fraction too small");
    return TripleStore(all.vocab_ptr(), std::move(kept));
}

}  // namespace ffd
