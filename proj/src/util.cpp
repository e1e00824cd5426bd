#include "ffd/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ffd {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t st = seed;
    for (auto& w : s_) w = splitmix64(st);
}

Rng::result_type Rng::operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

int Rng::uniform_int(int n) {
    // rejection sampling over the top of the 64-bit range keeps it unbiased
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = max() - max() % un;
    std::uint64_t x;
    do {
        x = (*this)();
    } while (x >= limit);
    return static_cast<int>(x % un);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = uniform(-1.0, 1.0);
        v = uniform(-1.0, 1.0);
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

Rng seeded_rng(std::uint64_t global_seed, std::string_view label) {
    std::uint64_t st = global_seed ^ fnv1a(label);
    // one extra mix so labels differing in few bits do not correlate streams
    std::uint64_t mixed = splitmix64(st);
    return Rng(mixed);
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view label) {
    return seeded_rng(global_seed, label)();
}

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

Adam::Adam(std::size_t n, double lr_, double beta1, double beta2, double eps)
    : lr(lr_), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::begin_step() {
    b1t_ *= beta1_;
    b2t_ *= beta2_;
}

void Adam::update_one(std::size_t i, std::span<double> params, double g) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    const double mhat = m_[i] / (1.0 - b1t_);
    const double vhat = v_[i] / (1.0 - b2t_);
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
}

void Adam::step(std::span<double> params, std::span<const double> grads) {
    begin_step();
    for (std::size_t i = 0; i < params.size(); ++i) update_one(i, params, grads[i]);
}

void Adam::step_sparse(std::span<double> params, std::span<const double> grads,
                       std::span<const std::size_t> indices) {
    begin_step();
    for (std::size_t i : indices) update_one(i, params, grads[i]);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open file for writing: " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("short write: " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("rename failed: " + tmp + " -> " + path + ": " + ec.message());
}

std::string format_g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void BinWriter::raw(const void* p, std::size_t n) {
    buf_.append(static_cast<const char*>(p), n);
}

void BinWriter::magic(std::string_view m8) {
    if (m8.size() != 8) throw ContractError("magic must be 8 bytes");
    buf_.append(m8);
}

void BinWriter::u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    raw(b, 4);
}

void BinWriter::u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    raw(b, 8);
}

void BinWriter::f64(double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, 8);
    u64(bits);
}

void BinWriter::f64s(std::span<const double> v) {
    for (double x : v) f64(x);
}

void BinReader::need(std::size_t n) {
    if (pos_ + n > data_.size()) throw ParseError("truncated model file");
}

void BinReader::expect_magic(std::string_view m8, const std::string& what) {
    need(8);
    if (std::string_view(data_.data() + pos_, 8) != m8)
        throw ParseError("bad magic, not a " + what + " file");
    pos_ += 8;
}

std::uint32_t BinReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
}

std::uint64_t BinReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
}

double BinReader::f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void BinReader::f64s(std::span<double> out) {
    for (double& x : out) x = f64();
}

double logsumexp(std::span<const double> v) {
    if (v.empty()) throw ContractError("logsumexp of empty vector");
    double mx = v[0];
    for (double x : v) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

int effective_threads(int requested) {
#ifdef _OPENMP
    if (requested > 0) return requested;
    return omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

}  // namespace ffd
