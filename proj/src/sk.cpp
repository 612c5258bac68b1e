#include "iqo/sk.hpp"

#include <bit>
#include <cmath>

#include "iqo/errors.hpp"

namespace iqo {

namespace {

std::size_t word_count(std::size_t n) { return (n + 63) / 64; }

void require_same_size(const SpinConfig& a, const SpinConfig& b) {
    if (a.size() != b.size())
        throw InvalidArgument("spin configurations differ in length: " + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()));
}

void require_match(const SkInstance& inst, const SpinConfig& c) {
    if (c.size() != inst.n())
        throw InvalidArgument("configuration length " + std::to_string(c.size()) +
                              " does not match instance size " + std::to_string(inst.n()));
}

int hex_value(char ch) {
    if (ch >= '0' && ch <= '9') return ch - '0';
    if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
    if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
    return -1;
}

} // namespace

SpinConfig::SpinConfig(std::size_t n) : n_(n), words_(word_count(n), 0) {}

SpinConfig SpinConfig::from_spins(std::span<const int> spins) {
    SpinConfig c(spins.size());
    for (std::size_t i = 0; i < spins.size(); ++i) {
        if (spins[i] == -1)
            c.flip(i);
        else if (spins[i] != 1)
            throw InvalidArgument("spin entries must be +1 or -1");
    }
    return c;
}

SpinConfig SpinConfig::from_index(std::size_t n, std::uint64_t index) {
    if (n > 64) throw InvalidArgument("from_index requires n <= 64");
    if (n < 64 && (index >> n) != 0) throw InvalidArgument("basis index out of range for n spins");
    SpinConfig c(n);
    if (n > 0) c.words_[0] = index;
    return c;
}

SpinConfig SpinConfig::from_hex(std::size_t n, std::string_view hex) {
    if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
    if (hex.empty()) throw InvalidArgument("empty bit-string hex");
    SpinConfig c(n);
    std::size_t bit = 0;
    for (auto it = hex.rbegin(); it != hex.rend(); ++it, bit += 4) {
        const int v = hex_value(*it);
        if (v < 0) throw InvalidArgument("invalid hex digit in bit-string: " + std::string(hex));
        for (int b = 0; b < 4; ++b) {
            if (!((v >> b) & 1)) continue;
            if (bit + b >= n) throw InvalidArgument("bit-string hex has bits beyond n");
            c.flip(bit + b);
        }
    }
    return c;
}

SpinConfig SpinConfig::random(std::size_t n, Rng& rng) {
    SpinConfig c(n);
    for (std::size_t w = 0; w < c.words_.size(); ++w) {
        c.words_[w] = rng();
        const std::size_t bits = std::min<std::size_t>(64, n - 64 * w);
        if (bits < 64) c.words_[w] &= (std::uint64_t{1} << bits) - 1;
    }
    return c;
}

SpinConfig SpinConfig::flipped(std::size_t i) const {
    SpinConfig c = *this;
    c.flip(i);
    return c;
}

SpinConfig SpinConfig::operator-() const {
    SpinConfig c = *this;
    for (std::size_t w = 0; w < c.words_.size(); ++w) {
        c.words_[w] = ~c.words_[w];
        const std::size_t bits = std::min<std::size_t>(64, n_ - 64 * w);
        if (bits < 64) c.words_[w] &= (std::uint64_t{1} << bits) - 1;
    }
    return c;
}

std::uint64_t SpinConfig::index() const {
    if (n_ > 64) throw InvalidArgument("index() requires n <= 64");
    return words_.empty() ? 0 : words_[0];
}

std::string SpinConfig::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    const std::size_t ndig = std::max<std::size_t>(1, (n_ + 3) / 4);
    std::string out(ndig, '0');
    for (std::size_t d = 0; d < ndig; ++d) {
        int v = 0;
        for (int b = 0; b < 4; ++b) {
            const std::size_t bit = 4 * d + b;
            if (bit < n_ && (*this)[bit] == -1) v |= 1 << b;
        }
        out[ndig - 1 - d] = digits[v];
    }
    return out;
}

std::vector<int> SpinConfig::spins() const {
    std::vector<int> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = (*this)[i];
    return out;
}

SkInstance::SkInstance(std::size_t n, double j_scale, std::uint64_t seed, std::vector<double> couplings)
    : n_(n), j_scale_(j_scale), seed_(seed), couplings_(std::move(couplings)) {
    if (n < 2) throw InvalidArgument("SK instance needs n >= 2");
    if (!(j_scale > 0.0) || !std::isfinite(j_scale)) throw InvalidArgument("j_scale must be positive");
    if (couplings_.size() != n * n) throw InvalidArgument("coupling matrix must be n x n");
    for (std::size_t i = 0; i < n; ++i) {
        if (couplings_[i * n + i] != 0.0) throw InvalidArgument("coupling diagonal must be zero");
        for (std::size_t j = 0; j < i; ++j) {
            const double a = couplings_[i * n + j];
            if (!std::isfinite(a)) throw InvalidArgument("non-finite coupling");
            if (a != couplings_[j * n + i]) throw InvalidArgument("coupling matrix is not symmetric");
        }
    }
}

SkInstance generate_instance(std::size_t n, double j_scale, std::uint64_t seed) {
    if (n < 2) throw InvalidArgument("generate_instance: n must be >= 2");
    if (!(j_scale > 0.0)) throw InvalidArgument("generate_instance: j_scale must be positive");
    Rng rng(seed);
    const double sigma = j_scale / std::sqrt(static_cast<double>(n));
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = rng.normal(0.0, sigma);
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    return SkInstance(n, j_scale, seed, std::move(m));
}

double local_field(const SkInstance& inst, const SpinConfig& c, std::size_t site) {
    const auto row = inst.row(site);
    double h = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) h += row[j] * c[j];
    return h;
}

double energy(const SkInstance& inst, const SpinConfig& c) {
    require_match(inst, c);
    double e = 0.0;
    for (std::size_t i = 0; i < inst.n(); ++i) e += c[i] * local_field(inst, c, i);
    return e;
}

double energy_delta(const SkInstance& inst, const SpinConfig& c, std::size_t site) {
    require_match(inst, c);
    if (site >= inst.n()) throw InvalidArgument("energy_delta: site out of range");
    return -4.0 * c[site] * local_field(inst, c, site);
}

std::size_t hamming(const SpinConfig& a, const SpinConfig& b) {
    require_same_size(a, b);
    std::size_t d = 0;
    const auto wa = a.words();
    const auto wb = b.words();
    for (std::size_t w = 0; w < wa.size(); ++w) d += std::popcount(wa[w] ^ wb[w]);
    return d;
}

double overlap_slope(const SpinConfig& l, const SpinConfig& r) {
    const auto d = hamming(l, r);
    if (l.size() == 0) throw InvalidArgument("overlap_slope: empty configuration");
    return 1.0 - 2.0 * static_cast<double>(d) / static_cast<double>(l.size());
}

LocalMinimum make_minimum(const SkInstance& inst, SpinConfig c) {
    const double e = energy(inst, c);
    return {std::move(c), e, e / (static_cast<double>(inst.n()) * inst.j_scale())};
}

bool is_single_flip_stable(const SkInstance& inst, const SpinConfig& c) {
    require_match(inst, c);
    for (std::size_t i = 0; i < inst.n(); ++i)
        if (c[i] * local_field(inst, c, i) > 0.0) return false;
    return true;
}

} // namespace iqo
