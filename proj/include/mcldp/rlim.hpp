#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <unordered_map>
#include <vector>

namespace mcldp::rlim {

// Number of length-n bit strings in which any two 1-bits are separated by at
// least two 0-bits. With boundary_safe set, strings with a 1 in either of the
// last two positions are excluded as well, so concatenation of safe words
// keeps the constraint across word boundaries.
uint64_t rll_count(uint32_t n, bool boundary_safe);

// Minimum-weight run-length-limited codebook: the `size` constraint-valid
// words of the shortest feasible length, ordered by (Hamming weight,
// lexicographic). Word 0 is always the all-zero word.
class Codebook {
  public:
    static Codebook build(uint64_t size, bool boundary_safe);

    uint32_t word_bits() const { return word_bits_; }
    bool boundary_safe() const { return boundary_safe_; }
    uint64_t size() const { return words_.size(); }

    // The word as a packed integer, first transmitted bit at the most
    // significant of word_bits() positions.
    uint64_t word(uint32_t index) const { return words_.at(index); }

    std::vector<uint8_t> word_as_bits(uint32_t index) const;
    void append_word_bits(uint32_t index, std::vector<uint8_t>& out) const;

    std::optional<uint32_t> index_of(uint64_t word) const;

    // Debug dump: one codeword per line, ordered by index.
    void dump(std::ostream& out) const;

  private:
    uint32_t word_bits_ = 0;
    bool boundary_safe_ = true;
    std::vector<uint64_t> words_;
    std::unordered_map<uint64_t, uint32_t> index_of_;
};

// Left-to-right last-wins repair: whenever a 1 appears at most two positions
// after the most recently kept 1, the earlier 1 is cleared and the new one
// kept. With boundary_safe, 1s in the final two positions are cleared after
// the scan. Output always satisfies the constraint; the repair is idempotent.
std::vector<uint8_t> rlim_correct(std::span<const uint8_t> bits, bool boundary_safe);

// Repair followed by exact codebook lookup; nullopt when the repaired word is
// not one of the selected codewords.
std::optional<uint32_t> rlim_decode(std::span<const uint8_t> bits, const Codebook& codebook);

}  // namespace mcldp::rlim
