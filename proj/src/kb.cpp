#include "ffd/kb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ffd {

int Vocab::add_entity(std::string_view label) {
    auto it = entity_index_.find(std::string(label));
    if (it != entity_index_.end()) return it->second;
    int id = static_cast<int>(entity_labels_.size());
    entity_labels_.emplace_back(label);
    entity_index_.emplace(entity_labels_.back(), id);
    return id;
}

int Vocab::add_relation(std::string_view label) {
    auto it = relation_index_.find(std::string(label));
    if (it != relation_index_.end()) return it->second;
    int id = static_cast<int>(relation_labels_.size());
    relation_labels_.emplace_back(label);
    relation_index_.emplace(relation_labels_.back(), id);
    return id;
}

int Vocab::find_entity(std::string_view label) const {
    auto it = entity_index_.find(std::string(label));
    return it == entity_index_.end() ? -1 : it->second;
}

int Vocab::find_relation(std::string_view label) const {
    auto it = relation_index_.find(std::string(label));
    return it == relation_index_.end() ? -1 : it->second;
}

int Vocab::entity_id(std::string_view label) const {
    int id = find_entity(label);
    if (id < 0) throw VocabError("unknown entity label: " + std::string(label));
    return id;
}

int Vocab::relation_id(std::string_view label) const {
    int id = find_relation(label);
    if (id < 0) throw VocabError("unknown relation label: " + std::string(label));
    return id;
}

const std::string& Vocab::entity_label(int id) const {
    if (id < 0 || id >= num_entities())
        throw LookupError("entity id out of range: " + std::to_string(id));
    return entity_labels_[static_cast<std::size_t>(id)];
}

const std::string& Vocab::relation_label(int id) const {
    if (id < 0 || id >= num_relations())
        throw LookupError("relation id out of range: " + std::to_string(id));
    return relation_labels_[static_cast<std::size_t>(id)];
}

TripleStore::TripleStore(std::shared_ptr<const Vocab> vocab, std::vector<Triple> facts)
    : vocab_(std::move(vocab)) {
    facts_.reserve(facts.size());
    fact_set_.reserve(facts.size() * 2);
    for (const Triple& f : facts) {
        if (f.h < 0 || f.h >= vocab_->num_entities() || f.t < 0 ||
            f.t >= vocab_->num_entities() || f.r < 0 || f.r >= vocab_->num_relations())
            throw LookupError("triple ids out of range for vocab");
        if (fact_set_.insert(f).second) facts_.push_back(f);
    }
    by_head_.resize(static_cast<std::size_t>(vocab_->num_entities()));
    by_tail_.resize(static_cast<std::size_t>(vocab_->num_entities()));
    for (const Triple& f : facts_) {
        by_head_[static_cast<std::size_t>(f.h)].emplace_back(f.r, f.t);
        by_tail_[static_cast<std::size_t>(f.t)].emplace_back(f.r, f.h);
    }
}

std::span<const std::pair<int, int>> TripleStore::by_head(int h) const {
    if (h < 0 || h >= vocab_->num_entities())
        throw LookupError("entity id out of range: " + std::to_string(h));
    return by_head_[static_cast<std::size_t>(h)];
}

std::span<const std::pair<int, int>> TripleStore::by_tail(int t) const {
    if (t < 0 || t >= vocab_->num_entities())
        throw LookupError("entity id out of range: " + std::to_string(t));
    return by_tail_[static_cast<std::size_t>(t)];
}

TripleStore load_triples(const std::string& path, std::shared_ptr<const Vocab> vocab) {
    const std::string text = read_file(path);
    std::shared_ptr<Vocab> fresh;
    if (!vocab) fresh = std::make_shared<Vocab>();

    std::vector<Triple> facts;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos < text.size()) {
        ++lineno;
        std::size_t eol = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (eol == std::string::npos ? text.size() : eol) - pos);
        pos = (eol == std::string::npos) ? text.size() : eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        std::size_t t1 = line.find('\t');
        std::size_t t2 = (t1 == std::string_view::npos) ? std::string_view::npos
                                                        : line.find('\t', t1 + 1);
        std::size_t t3 = (t2 == std::string_view::npos) ? std::string_view::npos
                                                        : line.find('\t', t2 + 1);
        if (t1 == std::string_view::npos || t2 == std::string_view::npos ||
            t3 != std::string_view::npos)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected 3 tab-separated fields");
        std::string_view hl = line.substr(0, t1);
        std::string_view rl = line.substr(t1 + 1, t2 - t1 - 1);
        std::string_view tl = line.substr(t2 + 1);
        if (hl.empty() || rl.empty() || tl.empty())
            throw ParseError(path + ":" + std::to_string(lineno) + ": empty field");

        Triple f{};
        if (fresh) {
            f.h = fresh->add_entity(hl);
            f.r = fresh->add_relation(rl);
            f.t = fresh->add_entity(tl);
        } else {
            f.h = vocab->entity_id(hl);
            f.r = vocab->relation_id(rl);
            f.t = vocab->entity_id(tl);
        }
        facts.push_back(f);
    }
    std::shared_ptr<const Vocab> v = fresh ? std::shared_ptr<const Vocab>(fresh) : vocab;
    return TripleStore(std::move(v), std::move(facts));
}

void save_triples(const TripleStore& store, const std::string& path) {
    std::string out;
    out.reserve(store.size() * 24);
    const Vocab& v = store.vocab();
    for (const Triple& f : store.facts()) {
        out += v.entity_label(f.h);
        out += '\t';
        out += v.relation_label(f.r);
        out += '\t';
        out += v.entity_label(f.t);
        out += '\n';
    }
    write_file_atomic(path, out);
}

namespace {

std::vector<int> distinct_head_relations(const TripleStore& store, int h) {
    std::vector<int> rels;
    for (const auto& [r, t] : store.by_head(h)) rels.push_back(r);
    std::sort(rels.begin(), rels.end());
    rels.erase(std::unique(rels.begin(), rels.end()), rels.end());
    return rels;
}

// Per-head relation order used by the splitter. Independent of ratio and of
// the head sample, so sweeps over the ratio shrink each head's train-side
// relation set along a fixed order.
std::vector<int> shuffled_head_relations(const TripleStore& all, int h,
                                         std::uint64_t seed) {
    std::vector<int> rels = distinct_head_relations(all, h);
    Rng rng = seeded_rng(seed, "split:rels:" + std::to_string(h));
    rng.shuffle(rels);
    return rels;
}

int train_side_count(double ratio, int k) {
    // subtract a hair so fp noise cannot bump exact integer products upward
    int n = static_cast<int>(std::ceil(ratio * k / 100.0 - 1e-9));
    return std::max(n, 1);
}

}  // namespace

KbSplit split_fdkb(const TripleStore& all_facts, double ratio, int num_heads,
                   double valid_fraction, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 100.0))
        throw ConfigError("split ratio must lie in (0,100), got " + format_g12(ratio));
    if (num_heads < 1) throw ConfigError("num_heads must be >= 1");
    if (valid_fraction < 0.0)
        throw ConfigError("valid_fraction must be >= 0");

    std::vector<int> eligible;
    for (int e = 0; e < all_facts.vocab().num_entities(); ++e)
        if (static_cast<int>(distinct_head_relations(all_facts, e).size()) >= 2)
            eligible.push_back(e);

    const int n_valid_heads =
        static_cast<int>(std::llround(valid_fraction * num_heads));
    if (num_heads + n_valid_heads > static_cast<int>(eligible.size()))
        throw ConfigError("not enough eligible heads: need " +
                          std::to_string(num_heads + n_valid_heads) + ", have " +
                          std::to_string(eligible.size()));

    Rng rng = seeded_rng(seed, "split");
    rng.shuffle(eligible);
    std::vector<int> test_heads(eligible.begin(), eligible.begin() + num_heads);
    std::vector<int> valid_heads(eligible.begin() + num_heads,
                                 eligible.begin() + num_heads + n_valid_heads);
    std::sort(test_heads.begin(), test_heads.end());
    std::sort(valid_heads.begin(), valid_heads.end());

    std::unordered_map<int, std::unordered_set<int>> test_rels, valid_rels;
    for (int h : test_heads) {
        std::vector<int> rels = shuffled_head_relations(all_facts, h, seed);
        const int k = static_cast<int>(rels.size());
        const int n = train_side_count(ratio, k);
        if (n > k - 1)
            throw ConfigError("ratio " + format_g12(ratio) + " leaves no test relation for head '" +
                              all_facts.vocab().entity_label(h) + "' with " +
                              std::to_string(k) + " relations");
        test_rels[h] = std::unordered_set<int>(rels.begin() + n, rels.end());
    }
    for (int h : valid_heads) {
        std::vector<int> rels = shuffled_head_relations(all_facts, h, seed);
        const int k = static_cast<int>(rels.size());
        const int n = train_side_count(ratio, k);
        if (n > k - 1)
            throw ConfigError("ratio " + format_g12(ratio) +
                              " leaves no validation relation for head '" +
                              all_facts.vocab().entity_label(h) + "'");
        valid_rels[h] = std::unordered_set<int>(rels.begin() + n, rels.end());
    }

    std::vector<Triple> train_f, valid_f, test_f;
    for (const Triple& f : all_facts.facts()) {
        auto it = test_rels.find(f.h);
        if (it != test_rels.end() && it->second.count(f.r)) {
            test_f.push_back(f);
            continue;
        }
        auto iv = valid_rels.find(f.h);
        if (iv != valid_rels.end() && iv->second.count(f.r)) {
            valid_f.push_back(f);
            continue;
        }
        train_f.push_back(f);
    }

    KbSplit split{
        TripleStore(all_facts.vocab_ptr(), std::move(train_f)),
        TripleStore(all_facts.vocab_ptr(), std::move(valid_f)),
        TripleStore(all_facts.vocab_ptr(), std::move(test_f)),
        std::move(test_heads),
    };
    return split;
}

KbSplit shrink_split_train(const KbSplit& base, const TripleStore& all_facts,
                           double base_ratio, double new_ratio, std::uint64_t seed) {
    if (new_ratio > base_ratio + 1e-12)
        throw ConfigError("shrink ratio " + format_g12(new_ratio) +
                          " exceeds base ratio " + format_g12(base_ratio));
    std::unordered_map<int, std::unordered_set<int>> keep;
    for (int h : base.heads) {
        std::vector<int> rels = shuffled_head_relations(all_facts, h, seed);
        const int k = static_cast<int>(rels.size());
        const int n = std::min(train_side_count(new_ratio, k), k - 1);
        keep[h] = std::unordered_set<int>(rels.begin(), rels.begin() + n);
    }
    std::vector<Triple> train_f;
    train_f.reserve(base.train.size());
    for (const Triple& f : base.train.facts()) {
        auto it = keep.find(f.h);
        if (it != keep.end() && !it->second.count(f.r)) continue;
        train_f.push_back(f);
    }
    return KbSplit{TripleStore(base.train.vocab_ptr(), std::move(train_f)), base.valid,
                   base.test, base.heads};
}

RelationProfile relation_profile(const TripleStore& store, int entity, Role role) {
    RelationProfile p;
    p.entity = entity;
    p.role = role;
    p.bits.assign(static_cast<std::size_t>(store.vocab().num_relations()), 0);
    const auto pairs = (role == Role::head) ? store.by_head(entity) : store.by_tail(entity);
    for (const auto& [r, other] : pairs) p.bits[static_cast<std::size_t>(r)] = 1;
    return p;
}

void save_split(const KbSplit& split, const std::string& train_path,
                const std::string& valid_path, const std::string& test_path,
                const std::string& heads_path) {
    save_triples(split.train, train_path);
    save_triples(split.valid, valid_path);
    save_triples(split.test, test_path);
    std::string heads;
    for (int h : split.heads) {
        heads += split.train.vocab().entity_label(h);
        heads += '\n';
    }
    write_file_atomic(heads_path, heads);
}

namespace {

void collect_labels(const std::string& path, Vocab& vocab) {
    TripleStore tmp = load_triples(path);
    // re-add in this file's first-appearance order to build the union vocab
    for (const Triple& f : tmp.facts()) {
        vocab.add_entity(tmp.vocab().entity_label(f.h));
        vocab.add_relation(tmp.vocab().relation_label(f.r));
        vocab.add_entity(tmp.vocab().entity_label(f.t));
    }
}

}  // namespace

KbSplit load_split(const std::string& train_path, const std::string& valid_path,
                   const std::string& test_path, const std::string& heads_path) {
    auto vocab = std::make_shared<Vocab>();
    collect_labels(train_path, *vocab);
    collect_labels(valid_path, *vocab);
    collect_labels(test_path, *vocab);
    std::shared_ptr<const Vocab> cv = vocab;

    KbSplit split{load_triples(train_path, cv), load_triples(valid_path, cv),
                  load_triples(test_path, cv), {}};

    const std::string text = read_file(heads_path);
    std::size_t pos = 0;
    int lineno = 0;
    while (pos < text.size()) {
        ++lineno;
        std::size_t eol = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (eol == std::string::npos ? text.size() : eol) - pos);
        pos = (eol == std::string::npos) ? text.size() : eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        split.heads.push_back(cv->entity_id(line));
    }
    std::sort(split.heads.begin(), split.heads.end());
    return split;
}

}  // namespace ffd
