#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcldp/channel.hpp"
#include "mcldp/ldp.hpp"
#include "mcldp/rng.hpp"

namespace mcldp::harness {

// One end-to-end experiment: R ground-truth distributions, N users each
// reporting one privatized value per distribution, transmitted back to back
// over the diffusion channel. channel.slot_duration and molecules_per_one are
// the unprivatized baseline resources that get renormalized per mechanism.
struct ExperimentConfig {
    channel::ChannelParams channel;
    std::vector<ldp::Mechanism> mechanisms{ldp::kAllMechanisms,
                                           ldp::kAllMechanisms + std::size(ldp::kAllMechanisms)};
    uint32_t domain_size = 16;   // k
    double epsilon = 1.0;
    uint32_t num_users = 2000;   // N
    uint32_t num_dists = 20;     // R, ground truths per run
    uint32_t pilot_users = 100;  // calibration subset for coded runs
    uint64_t master_seed = 1;
    uint32_t threads = 0;  // 0 = hardware concurrency; never affects results

    void validate(bool coded) const;
};

struct MechanismOutcome {
    ldp::Mechanism mechanism;
    double l1_mean = 0.0;        // average L1 estimation error over the R ground truths
    uint32_t threshold = 0;      // calibrated detection threshold (0 for channel-free runs)
    double slot_duration = 0.0;  // normalized t_s for this mechanism
    uint32_t molecules = 0;      // normalized M for this mechanism
    uint32_t wire_bits = 0;      // bits per transmitted report (codeword length when coded)
    uint64_t one_bits = 0;       // total 1-bits across all users' streams
    uint64_t invalid_reports = 0;
};

struct ExperimentResult {
    std::vector<MechanismOutcome> outcomes;
};

// Uniform draw from the probability simplex (flat Dirichlet via normalized
// unit-rate exponentials).
std::vector<double> sample_simplex(uint32_t k, Rng& rng);

// Draws a 1-based value from a probability vector.
uint32_t sample_categorical(std::span<const double> probs, Rng& rng);

double l1_error(std::span<const double> truth, std::span<const double> estimate);

uint64_t count_ones(std::span<const uint8_t> bits);

// Unprivatized baseline: bits per value and total 1-bits over every user's
// concatenated plain big-endian value encodings.
struct BaselineStats {
    uint32_t bits_per_value = 0;  // l_0
    uint64_t one_bits = 0;        // W_0
};
BaselineStats baseline_stats(const std::vector<std::vector<uint16_t>>& user_values, uint32_t k);

// Equalizes total air time and molecule budget across mechanisms:
// t_s scales by l_0 / l_m exactly, M by W_0 / W_m rounded half to even and
// floored at 1. A mechanism that emits no 1-bits keeps the baseline M.
struct NormalizedResources {
    double slot_duration = 0.0;
    uint32_t molecules = 0;
};
NormalizedResources normalize_resources(uint32_t baseline_bits, double baseline_slot_duration,
                                        uint32_t baseline_molecules, uint64_t baseline_ones,
                                        uint32_t method_bits, uint64_t method_ones);

// Channel-free reference pipeline: reports reach the estimator unchanged.
ExperimentResult run_ideal(const ExperimentConfig& cfg);
// Plain wire encoding over the channel, thresholds calibrated by total bit
// error rate across all users.
ExperimentResult run_uncoded(const ExperimentConfig& cfg);
// Reports mapped to run-length-limited codewords; thresholds calibrated by
// decoded-symbol error rate over the pilot users.
ExperimentResult run_rlim(const ExperimentConfig& cfg);

}  // namespace mcldp::harness
