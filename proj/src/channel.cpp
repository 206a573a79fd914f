#include "mcldp/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcldp::channel {

void ChannelParams::validate() const {
    if (diffusion_coefficient <= 0.0) throw std::invalid_argument("diffusion_coefficient must be positive");
    if (receiver_radius <= 0.0) throw std::invalid_argument("receiver_radius must be positive");
    if (distance <= receiver_radius) throw std::invalid_argument("distance must exceed receiver_radius");
    if (slot_duration <= 0.0) throw std::invalid_argument("slot_duration must be positive");
    if (molecules_per_one < 1) throw std::invalid_argument("molecules_per_one must be >= 1");
    if (memory < 1) throw std::invalid_argument("memory must be >= 1");
    if (noise_variance < 0.0) throw std::invalid_argument("noise_variance must be >= 0");
}

double hitting_probability(const ChannelParams& params, double t_seconds) {
    params.validate();
    if (t_seconds < 0.0) throw std::invalid_argument("time must be >= 0");
    if (t_seconds == 0.0) return 0.0;
    double ratio = params.receiver_radius / params.distance;
    double arg = (params.distance - params.receiver_radius) /
                 std::sqrt(4.0 * params.diffusion_coefficient * t_seconds);
    return ratio * std::erfc(arg);
}

ChannelCoefficients channel_coefficients(const ChannelParams& params) {
    params.validate();
    ChannelCoefficients coeffs;
    coeffs.p.resize(params.memory + 1);
    double prev = 0.0;
    double sum = 0.0;
    for (uint32_t i = 1; i <= params.memory; ++i) {
        double f = hitting_probability(params, i * params.slot_duration);
        double pi = std::max(0.0, f - prev);
        coeffs.p[i - 1] = pi;
        sum += pi;
        prev = f;
    }
    coeffs.p[params.memory] = 1.0 - sum;  // residual keeps the total at exactly 1
    return coeffs;
}

AliasTable::AliasTable(const std::vector<double>& weights) {
    if (weights.empty()) throw std::invalid_argument("alias table needs at least one weight");
    const std::size_t n = weights.size();
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("alias weights must be finite and >= 0");
        total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("alias weights must not all be zero");
    keep_.assign(n, 1.0);
    alias_.resize(n);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = weights[i] * static_cast<double>(n) / total;
        alias_[i] = static_cast<uint32_t>(i);
    }
    // Vose's method with index stacks; processing order is fixed so the
    // resulting table (and thus every downstream draw) is reproducible.
    std::vector<uint32_t> small, large;
    for (std::size_t i = n; i-- > 0;) {
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        uint32_t s = small.back();
        small.pop_back();
        uint32_t l = large.back();
        keep_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    // Leftovers are 1 within rounding error.
    for (uint32_t i : small) keep_[i] = 1.0;
    for (uint32_t i : large) keep_[i] = 1.0;
}

Channel::Channel(const ChannelParams& params)
    : params_(params), coeffs_(channel_coefficients(params)), alias_(coeffs_.p) {}

std::vector<uint32_t> Channel::sample_emission(Rng& rng) const {
    std::vector<uint32_t> counts(coeffs_.p.size(), 0);
    for (uint32_t m = 0; m < params_.molecules_per_one; ++m) counts[alias_.sample(rng)]++;
    return counts;
}

std::vector<uint32_t> Channel::transmit(std::span<const uint8_t> bits, Rng& rng) const {
    if (bits.empty()) throw std::invalid_argument("bit sequence must be nonempty");
    const std::size_t n = bits.size();
    const uint32_t window = params_.memory;
    std::vector<uint32_t> counts(n, 0);
    for (std::size_t slot = 0; slot < n; ++slot) {
        if (!bits[slot]) continue;
        // Draw each molecule's arrival offset; offset `window` means the
        // molecule never arrives within the modeled memory.
        for (uint32_t m = 0; m < params_.molecules_per_one; ++m) {
            uint32_t offset = alias_.sample(rng);
            if (offset < window && slot + offset < n) counts[slot + offset]++;
        }
    }
    if (params_.noise_variance > 0.0) {
        double sigma = std::sqrt(params_.noise_variance);
        for (std::size_t h = 0; h < n; ++h) {
            auto noise = static_cast<int64_t>(std::llround(rng.normal(0.0, sigma)));
            int64_t total = static_cast<int64_t>(counts[h]) + noise;
            counts[h] = total > 0 ? static_cast<uint32_t>(total) : 0;
        }
    }
    return counts;
}

std::vector<uint32_t> sample_emission(uint32_t molecules, const ChannelCoefficients& coeffs,
                                      Rng& rng) {
    AliasTable alias(coeffs.p);
    std::vector<uint32_t> counts(coeffs.p.size(), 0);
    for (uint32_t m = 0; m < molecules; ++m) counts[alias.sample(rng)]++;
    return counts;
}

std::vector<uint32_t> transmit(std::span<const uint8_t> bits, const ChannelParams& params,
                               Rng& rng) {
    return Channel(params).transmit(bits, rng);
}

std::vector<uint32_t> transmit_fixed(std::span<const uint8_t> bits,
                                     const std::vector<std::vector<uint32_t>>& emissions) {
    const std::size_t n = bits.size();
    std::vector<uint32_t> counts(n, 0);
    std::size_t next = 0;
    for (std::size_t slot = 0; slot < n; ++slot) {
        if (!bits[slot]) continue;
        if (next >= emissions.size()) throw std::invalid_argument("not enough emission samples");
        const auto& x = emissions[next++];
        const std::size_t window = x.empty() ? 0 : x.size() - 1;
        for (std::size_t i = 0; i < window && slot + i < n; ++i) counts[slot + i] += x[i];
    }
    return counts;
}

std::vector<uint8_t> detect(std::span<const uint32_t> counts, uint32_t threshold) {
    if (threshold < 1) throw std::invalid_argument("threshold must be >= 1");
    std::vector<uint8_t> bits(counts.size());
    for (std::size_t h = 0; h < counts.size(); ++h) bits[h] = counts[h] >= threshold ? 1 : 0;
    return bits;
}

uint32_t calibrate_threshold_ber(const std::vector<std::vector<uint8_t>>& transmitted,
                                 const std::vector<std::vector<uint32_t>>& counts) {
    if (transmitted.empty() || transmitted.size() != counts.size())
        throw std::invalid_argument("transmitted/count sequences must be nonempty and aligned");
    uint32_t max_count = 0;
    for (const auto& per_user : counts)
        for (uint32_t c : per_user) max_count = std::max(max_count, c);

    // Histogram counts separately under transmitted 0s and 1s, then evaluate
    // every threshold with prefix sums: errors(tau) = |{1-slots, count <
    // tau}| + |{0-slots, count >= tau}|.
    std::vector<uint64_t> h0(static_cast<std::size_t>(max_count) + 1, 0);
    std::vector<uint64_t> h1(static_cast<std::size_t>(max_count) + 1, 0);
    uint64_t total0 = 0;
    for (std::size_t u = 0; u < counts.size(); ++u) {
        if (transmitted[u].size() != counts[u].size())
            throw std::invalid_argument("transmitted/count lengths differ");
        for (std::size_t h = 0; h < counts[u].size(); ++h) {
            if (transmitted[u][h]) {
                h1[counts[u][h]]++;
            } else {
                h0[counts[u][h]]++;
                total0++;
            }
        }
    }
    uint64_t below1 = 0;
    uint64_t below0 = 0;
    uint64_t best_err = UINT64_MAX;
    uint32_t best_tau = 1;
    for (uint32_t tau = 1; tau <= max_count + 1; ++tau) {
        below1 += h1[tau - 1];
        below0 += h0[tau - 1];
        uint64_t err = below1 + (total0 - below0);
        if (err < best_err) {
            best_err = err;
            best_tau = tau;
        }
    }
    return best_tau;
}

}  // namespace mcldp::channel
