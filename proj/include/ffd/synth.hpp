#pragma once

#include <cstdint>

#include "ffd/kb.hpp"

namespace ffd {

// Planted-cluster KB: entities fall into equal clusters, each cluster owns a
// disjoint slice of the relation inventory, and an entity heads each of its
// cluster's relations with probability relation_presence (tails drawn inside
// the cluster). Entity profiles are then near-duplicates within a cluster,
// which is the recoverable structure the profile encoder tests look for.
struct ClusterKbConfig {
    int num_entities = 200;
    int num_relations = 10;
    int num_clusters = 2;
    double relation_presence = 0.9;
    int tails_per_relation = 2;
    std::uint64_t seed = 0;
};

TripleStore make_cluster_kb(const ClusterKbConfig& cfg);

// Typed-world KB: every entity gets a type and a subcluster within the type;
// every relation gets a (head type, tail type) signature and a subcluster
// permutation. Heads attach their type's relations with probability
// relation_presence, and tails come from the signature's tail type, mostly
// from the permuted subcluster, ranked by a Zipf popularity law. A small
// signature-respecting noise floor is mixed in. The result has learnable
// structure at all three levels discovery scores: which relations an entity
// has, which tails are popular, and which tail goes with which head.
struct TypedKbConfig {
    int num_types = 6;
    int entities_per_type = 150;
    int num_relations = 30;
    double relation_presence = 0.75;
    double pair_fact_mean = 1.6;   // mean facts emitted per present (h, r)
    int max_pair_facts = 4;
    int subclusters = 3;
    double subcluster_fidelity = 0.85;
    double zipf_s = 1.3;
    double noise_fraction = 0.02;
    std::uint64_t seed = 0;
};

TripleStore make_typed_kb(const TypedKbConfig& cfg);

// Keep a deterministic degree-stratified sample of heads (every k-th head in
// (distinct head relations desc, id asc) order, k = round(1/fraction)) and
// drop all facts of the others. The vocabulary is left untouched so ids keep
// working; entities that only ever appeared as tails keep their facts only
// through retained heads.
TripleStore subsample_by_heads(const TripleStore& all, double fraction,
                               int min_head_relations, std::uint64_t seed);

}  // namespace ffd
