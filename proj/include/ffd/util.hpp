#pragma once

#include <cstdint>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ffd {

// ---------------------------------------------------------------------------
// Error taxonomy. Everything thrown by the library derives from FfdError so
// the CLI can catch one type at the top level.
// ---------------------------------------------------------------------------

struct FfdError : std::runtime_error {
    explicit FfdError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : FfdError {
    explicit ParseError(const std::string& msg) : FfdError(msg) {}
};

struct VocabError : FfdError {
    explicit VocabError(const std::string& msg) : FfdError(msg) {}
};

struct ConfigError : FfdError {
    explicit ConfigError(const std::string& msg) : FfdError(msg) {}
};

struct LookupError : FfdError {
    explicit LookupError(const std::string& msg) : FfdError(msg) {}
};

struct StateError : FfdError {
    explicit StateError(const std::string& msg) : FfdError(msg) {}
};

struct IoError : FfdError {
    explicit IoError(const std::string& msg) : FfdError(msg) {}
};

struct ContractError : FfdError {
    explicit ContractError(const std::string& msg) : FfdError(msg) {}
};

struct FeedbackError : FfdError {
    explicit FeedbackError(const std::string& msg) : FfdError(msg) {}
};

struct TrainingError : FfdError {
    TrainingError(const std::string& msg, int epoch_)
        : FfdError(msg + " (epoch " + std::to_string(epoch_) + ")"), epoch(epoch_) {}
    int epoch;
};

// ---------------------------------------------------------------------------
// Deterministic random streams. One global seed is expanded per component via
// a fixed label so each stage draws from an independent, reproducible stream.
// ---------------------------------------------------------------------------

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t& state);

// xoshiro256** with splitmix64 seeding; satisfies UniformRandomBitGenerator.
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }
    result_type operator()();

    // uniform in [0,1)
    double uniform();
    // uniform in [lo,hi)
    double uniform(double lo, double hi);
    // unbiased integer in [0,n), n >= 1
    int uniform_int(int n);
    // standard normal via polar Box-Muller (stateful spare)
    double normal();

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
        }
    }

  private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Derive the stream for a named component from the global seed.
Rng seeded_rng(std::uint64_t global_seed, std::string_view label);

// First output of the derived stream, for components that take a plain seed.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view label);

// ---------------------------------------------------------------------------
// Minimal row-major dense matrix of doubles.
// ---------------------------------------------------------------------------

class Mat {
  public:
    Mat() = default;
    Mat(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols),
          a_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return a_.empty(); }

    double& operator()(int r, int c) { return a_[idx(r, c)]; }
    double operator()(int r, int c) const { return a_[idx(r, c)]; }

    double* row(int r) { return a_.data() + idx(r, 0); }
    const double* row(int r) const { return a_.data() + idx(r, 0); }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }
    std::size_t size() const { return a_.size(); }

    void fill(double v) { a_.assign(a_.size(), v); }

  private:
    std::size_t idx(int r, int c) const {
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
               static_cast<std::size_t>(c);
    }
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

bool all_finite(std::span<const double> v);

// ---------------------------------------------------------------------------
// Adam optimizer over a flat parameter vector. step() applies a dense update;
// step_sparse() updates only the given indices (lazy variant for embedding
// rows). Each call counts as one optimization step for bias correction.
// ---------------------------------------------------------------------------

class Adam {
  public:
    Adam() = default;
    Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    void step(std::span<double> params, std::span<const double> grads);
    void step_sparse(std::span<double> params, std::span<const double> grads,
                     std::span<const std::size_t> indices);

    double lr = 0.001;

  private:
    void begin_step();
    void update_one(std::size_t i, std::span<double> params, double g);
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    double b1t_ = 1.0, b2t_ = 1.0;
    std::vector<double> m_, v_;
};

// ---------------------------------------------------------------------------
// Filesystem helpers. write_file_atomic writes to <path>.tmp<pid-ish suffix>
// and renames, so partially written artifacts are never observed.
// ---------------------------------------------------------------------------

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, std::string_view content);

// printf %.12g formatting: enough digits that distinct doubles from the
// pipeline stay distinct in text artifacts, short enough to stay readable.
std::string format_g12(double v);

// Little-endian binary buffers for model containers.
class BinWriter {
  public:
    void raw(const void* p, std::size_t n);
    void magic(std::string_view m8);  // exactly 8 bytes
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void f64s(std::span<const double> v);
    const std::string& buffer() const { return buf_; }

  private:
    std::string buf_;
};

class BinReader {
  public:
    explicit BinReader(std::string data) : data_(std::move(data)) {}
    void expect_magic(std::string_view m8, const std::string& what);
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    void f64s(std::span<double> out);
    bool done() const { return pos_ == data_.size(); }

  private:
    void need(std::size_t n);
    std::string data_;
    std::size_t pos_ = 0;
};

// logsumexp with max-shift stabilization; empty input is an error.
double logsumexp(std::span<const double> v);

int effective_threads(int requested);

}  // namespace ffd
