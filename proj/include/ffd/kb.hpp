#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ffd/util.hpp"

namespace ffd {

// Bijections label <-> dense integer id for entities and relations.
class Vocab {
  public:
    int add_entity(std::string_view label);
    int add_relation(std::string_view label);

    // -1 when absent
    int find_entity(std::string_view label) const;
    int find_relation(std::string_view label) const;

    // throw VocabError when absent
    int entity_id(std::string_view label) const;
    int relation_id(std::string_view label) const;

    const std::string& entity_label(int id) const;
    const std::string& relation_label(int id) const;

    int num_entities() const { return static_cast<int>(entity_labels_.size()); }
    int num_relations() const { return static_cast<int>(relation_labels_.size()); }

    bool operator==(const Vocab& o) const {
        return entity_labels_ == o.entity_labels_ && relation_labels_ == o.relation_labels_;
    }

  private:
    std::vector<std::string> entity_labels_;
    std::vector<std::string> relation_labels_;
    std::unordered_map<std::string, int> entity_index_;
    std::unordered_map<std::string, int> relation_index_;
};

struct Triple {
    int h;
    int r;
    int t;
    bool operator==(const Triple&) const = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& x) const {
        std::uint64_t z = static_cast<std::uint64_t>(x.h);
        z = z * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(x.r);
        z = z * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(x.t);
        z ^= z >> 29;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 32;
        return static_cast<std::size_t>(z);
    }
};

enum class Role { head, tail };

// Immutable fact set over a shared vocabulary, with per-head and per-tail
// adjacency indices. Duplicate triples are collapsed on construction.
class TripleStore {
  public:
    TripleStore() : vocab_(std::make_shared<Vocab>()) {}
    TripleStore(std::shared_ptr<const Vocab> vocab, std::vector<Triple> facts);

    const Vocab& vocab() const { return *vocab_; }
    std::shared_ptr<const Vocab> vocab_ptr() const { return vocab_; }

    const std::vector<Triple>& facts() const { return facts_; }
    std::size_t size() const { return facts_.size(); }

    bool contains(int h, int r, int t) const {
        return fact_set_.count(Triple{h, r, t}) > 0;
    }

    // (relation, tail) pairs of the entity as head
    std::span<const std::pair<int, int>> by_head(int h) const;
    // (relation, head) pairs of the entity as tail
    std::span<const std::pair<int, int>> by_tail(int t) const;

  private:
    std::shared_ptr<const Vocab> vocab_;
    std::vector<Triple> facts_;
    std::vector<std::vector<std::pair<int, int>>> by_head_;
    std::vector<std::vector<std::pair<int, int>>> by_tail_;
    std::unordered_set<Triple, TripleHash> fact_set_;
};

struct KbSplit {
    TripleStore train;
    TripleStore valid;
    TripleStore test;
    std::vector<int> heads;  // sampled test heads, ascending
};

struct RelationProfile {
    int entity = -1;
    Role role = Role::head;
    std::vector<std::uint8_t> bits;
};

// Triple-file ingestion: one fact per line, three tab-separated labels.
// With a supplied vocab, unknown labels are an error; otherwise a fresh
// vocab is built in first-appearance order.
TripleStore load_triples(const std::string& path,
                         std::shared_ptr<const Vocab> vocab = nullptr);

void save_triples(const TripleStore& store, const std::string& path);

// The dataset re-splitter. Samples num_heads test heads uniformly among
// entities with at least two distinct head-role relations, sends
// ceil(ratio% of k) of each sampled head's k distinct relations to train and
// the rest to test (all facts sharing (h,r) travel together), then carves the
// validation set from train the same way on a disjoint head sample of size
// round(valid_fraction * num_heads). All other facts stay in train.
KbSplit split_fdkb(const TripleStore& all_facts, double ratio, int num_heads,
                   double valid_fraction, std::uint64_t seed);

// Sparsity-sweep companion: keep the base split's heads, test and valid sets
// fixed, and shrink each test head's train-side relation set to what
// split_fdkb at new_ratio would have kept (a prefix of the same per-head
// order, so the sweep is nested). Facts of dropped relations leave the
// dataset entirely. new_ratio must not exceed the base ratio.
KbSplit shrink_split_train(const KbSplit& base, const TripleStore& all_facts,
                           double base_ratio, double new_ratio, std::uint64_t seed);

RelationProfile relation_profile(const TripleStore& store, int entity, Role role);

void save_split(const KbSplit& split, const std::string& train_path,
                const std::string& valid_path, const std::string& test_path,
                const std::string& heads_path);

KbSplit load_split(const std::string& train_path, const std::string& valid_path,
                   const std::string& test_path, const std::string& heads_path);

}  // namespace ffd
