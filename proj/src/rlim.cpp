#include "mcldp/rlim.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace mcldp::rlim {

namespace {

constexpr uint64_t kMaxCodebook = uint64_t{1} << 20;

// a(n) = a(n-1) + a(n-3): valid strings either end in 0 or in "...100".
uint64_t count_unconstrained_tail(uint32_t n) {
    if (n == 0) return 1;
    if (n == 1) return 2;
    if (n == 2) return 3;
    uint64_t a0 = 1, a1 = 2, a2 = 3;  // a(n-3), a(n-2), a(n-1)
    uint64_t cur = 0;
    for (uint32_t i = 3; i <= n; ++i) {
        cur = a2 + a0;
        a0 = a1;
        a1 = a2;
        a2 = cur;
    }
    return cur;
}

// Depth-first enumeration of all valid words of length n (packed MSB-first),
// optionally keeping the last two positions clear.
void enumerate_words(uint32_t n, bool boundary_safe, std::vector<uint64_t>& out) {
    const uint32_t usable = boundary_safe ? (n >= 2 ? n - 2 : 0) : n;
    struct Frame {
        uint64_t word;
        uint32_t pos;
        int64_t last_one;
    };
    std::vector<Frame> stack{{0, 0, -3}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.pos == n) {
            out.push_back(f.word);
            continue;
        }
        // Try 1 first so the zero branch is explored last; final order comes
        // from the sort below anyway.
        if (f.pos < usable && static_cast<int64_t>(f.pos) - f.last_one >= 3) {
            stack.push_back({f.word | (uint64_t{1} << (n - 1 - f.pos)), f.pos + 1,
                             static_cast<int64_t>(f.pos)});
        }
        stack.push_back({f.word, f.pos + 1, f.last_one});
    }
}

}  // namespace

uint64_t rll_count(uint32_t n, bool boundary_safe) {
    if (n > 80) throw std::invalid_argument("rll_count limited to n <= 80");
    if (!boundary_safe) return count_unconstrained_tail(n);
    return n < 2 ? 1 : count_unconstrained_tail(n - 2);
}

Codebook Codebook::build(uint64_t size, bool boundary_safe) {
    if (size < 1) throw std::invalid_argument("codebook size must be >= 1");
    if (size > kMaxCodebook)
        throw std::invalid_argument(
            "codebook size above 2^20 is not materializable; use a smaller domain for coded runs");
    uint32_t n = 0;
    while (rll_count(n, boundary_safe) < size) ++n;
    n = std::max(n, 1u);

    Codebook book;
    book.word_bits_ = n;
    book.boundary_safe_ = boundary_safe;
    std::vector<uint64_t> all;
    enumerate_words(n, boundary_safe, all);
    std::sort(all.begin(), all.end(), [](uint64_t a, uint64_t b) {
        int wa = std::popcount(a), wb = std::popcount(b);
        return wa != wb ? wa < wb : a < b;
    });
    book.words_.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(size));
    book.index_of_.reserve(book.words_.size() * 2);
    for (uint32_t i = 0; i < book.words_.size(); ++i) book.index_of_.emplace(book.words_[i], i);
    return book;
}

std::vector<uint8_t> Codebook::word_as_bits(uint32_t index) const {
    std::vector<uint8_t> bits;
    bits.reserve(word_bits_);
    append_word_bits(index, bits);
    return bits;
}

void Codebook::append_word_bits(uint32_t index, std::vector<uint8_t>& out) const {
    uint64_t w = words_.at(index);
    for (uint32_t t = 0; t < word_bits_; ++t)
        out.push_back(static_cast<uint8_t>((w >> (word_bits_ - 1 - t)) & 1));
}

std::optional<uint32_t> Codebook::index_of(uint64_t word) const {
    auto it = index_of_.find(word);
    if (it == index_of_.end()) return std::nullopt;
    return it->second;
}

void Codebook::dump(std::ostream& out) const {
    for (uint32_t i = 0; i < words_.size(); ++i) {
        uint64_t w = words_[i];
        for (uint32_t t = 0; t < word_bits_; ++t)
            out.put((w >> (word_bits_ - 1 - t)) & 1 ? '1' : '0');
        out.put('\n');
    }
}

std::vector<uint8_t> rlim_correct(std::span<const uint8_t> bits, bool boundary_safe) {
    std::vector<uint8_t> out(bits.begin(), bits.end());
    const auto n = static_cast<int64_t>(out.size());
    int64_t last_kept = -3;
    for (int64_t t = 0; t < n; ++t) {
        if (!out[t]) continue;
        if (t - last_kept <= 2) out[last_kept] = 0;  // the later 1 wins
        last_kept = t;
    }
    if (boundary_safe) {
        for (int64_t t = std::max<int64_t>(0, n - 2); t < n; ++t) out[t] = 0;
    }
    return out;
}

std::optional<uint32_t> rlim_decode(std::span<const uint8_t> bits, const Codebook& codebook) {
    if (bits.size() != codebook.word_bits()) throw std::invalid_argument("codeword length mismatch");
    auto repaired = rlim_correct(bits, codebook.boundary_safe());
    uint64_t word = 0;
    for (uint8_t b : repaired) word = (word << 1) | (b ? 1u : 0u);
    return codebook.index_of(word);
}

}  // namespace mcldp::rlim
