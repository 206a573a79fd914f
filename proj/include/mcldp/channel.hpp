#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcldp/rng.hpp"

namespace mcldp::channel {

// Physical constants of one diffusion link. Units: D in um^2/s, radii and
// distance in um, slot duration in s.
struct ChannelParams {
    double diffusion_coefficient = 79.4;  // D
    double receiver_radius = 5.0;         // r_R
    double distance = 10.0;               // r0, center to center
    double slot_duration = 1.0;           // t_s
    uint32_t molecules_per_one = 1000;    // M released per 1-bit
    uint32_t memory = 200;                // I, modeled ISI window in slots
    double noise_variance = 0.0;          // sigma^2 of the counting noise

    void validate() const;
};

// Absorption probabilities per arrival slot. entry[i] for i in [0, I) is the
// probability that a molecule released at a slot start is absorbed during the
// (i+1)-th slot after release; entry[I] is the residual (absorbed later or
// never), so the entries always sum to exactly 1.
struct ChannelCoefficients {
    std::vector<double> p;
};

// Probability that a single molecule is absorbed within time t (F(t)).
double hitting_probability(const ChannelParams& params, double t_seconds);

ChannelCoefficients channel_coefficients(const ChannelParams& params);

// Walker/Vose alias table for O(1) categorical sampling. Construction is
// deterministic in the order of the input weights.
class AliasTable {
  public:
    explicit AliasTable(const std::vector<double>& weights);

    uint32_t sample(Rng& rng) const {
        auto i = static_cast<uint32_t>(rng.below(keep_.size()));
        return rng.next_double() < keep_[i] ? i : alias_[i];
    }

    std::size_t size() const { return keep_.size(); }

  private:
    std::vector<double> keep_;
    std::vector<uint32_t> alias_;
};

// One link with precomputed coefficients, reusable across users.
class Channel {
  public:
    explicit Channel(const ChannelParams& params);

    const ChannelParams& params() const { return params_; }
    const ChannelCoefficients& coefficients() const { return coeffs_; }

    // Simulates one user's transmission of `bits`: every 1-bit releases M
    // molecules whose arrival slots are multinomially distributed over the
    // memory window; arrivals beyond the end of the sequence are discarded.
    // With noise_variance > 0, integer-rounded Gaussian noise is added per
    // slot and totals are clamped at zero.
    std::vector<uint32_t> transmit(std::span<const uint8_t> bits, Rng& rng) const;

    // Arrival-slot counts of a single emission event (length memory + 1; the
    // last entry counts molecules that never arrive within the window).
    std::vector<uint32_t> sample_emission(Rng& rng) const;

  private:
    ChannelParams params_;
    ChannelCoefficients coeffs_;
    AliasTable alias_;
};

std::vector<uint32_t> sample_emission(uint32_t molecules, const ChannelCoefficients& coeffs,
                                      Rng& rng);

std::vector<uint32_t> transmit(std::span<const uint8_t> bits, const ChannelParams& params,
                               Rng& rng);

// Deterministic replay variant: emissions[j] holds the arrival-offset counts
// for the j-th 1-bit of `bits` (in slot order).
std::vector<uint32_t> transmit_fixed(std::span<const uint8_t> bits,
                                     const std::vector<std::vector<uint32_t>>& emissions);

// Threshold detector: bit h is 1 iff counts[h] >= threshold.
std::vector<uint8_t> detect(std::span<const uint32_t> counts, uint32_t threshold);

// Exhaustive scan for the threshold minimizing the total Hamming distance
// between detected and transmitted bits over all users. Ties break toward the
// smallest threshold; the scan covers [1, max observed count + 1] so a
// bit-error-free threshold is always reachable.
uint32_t calibrate_threshold_ber(const std::vector<std::vector<uint8_t>>& transmitted,
                                 const std::vector<std::vector<uint32_t>>& counts);

}  // namespace mcldp::channel
