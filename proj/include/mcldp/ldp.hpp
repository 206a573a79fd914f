#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mcldp/rng.hpp"

namespace mcldp::ldp {

enum class Mechanism { kKrr, kRappor, kOue, kBlh, kOlh, kHr };

inline constexpr Mechanism kAllMechanisms[] = {Mechanism::kKrr, Mechanism::kRappor,
                                               Mechanism::kOue, Mechanism::kBlh,
                                               Mechanism::kOlh, Mechanism::kHr};

std::string mechanism_name(Mechanism m);
std::optional<Mechanism> mechanism_from_name(const std::string& name);

// Picks the prime hash-output alphabet for OLH: the better of the nearest
// primes around floor(e^eps) + 1 under the variance proxy
// (e^eps - 1 + g)^2 / ((e^eps - 1)^2 (g - 1)), never below 2.
uint32_t choose_olh_alphabet(double epsilon);

// One mechanism fully instantiated for a domain size and privacy budget; all
// derived constants are computed once here.
struct MechanismConfig {
    Mechanism mechanism = Mechanism::kKrr;
    uint32_t domain_size = 2;  // k
    double epsilon = 1.0;

    double keep_prob = 0.0;      // p
    double flip_prob = 0.0;      // q (KRR / RAPPOR / OUE)
    uint32_t hash_alphabet = 0;  // g (OLH)
    uint32_t hash_digits = 0;    // m (OLH), base-g digits per value
    uint32_t hash_bits = 0;      // d (BLH), bits per value
    uint32_t hadamard_bits = 0;  // K (HR)
    uint32_t hadamard_size = 0;  // d = 2^K (HR)
    uint32_t report_bits = 0;    // fixed wire length in bits
    uint64_t index_space = 0;    // number of distinct report bit/digit patterns

    static MechanismConfig make(Mechanism mechanism, uint32_t domain_size, double epsilon);
};

struct KrrReport {
    uint32_t value = 1;  // in [1, k]
};
struct UnaryReport {
    std::vector<uint8_t> bits;  // length k (RAPPOR and OUE)
};
struct BlhReport {
    std::vector<uint8_t> hash;  // length d, entries 0/1
    uint8_t bit = 0;            // randomized hashed bit
};
struct OlhReport {
    std::vector<uint8_t> digits;  // length m, entries in [0, g)
    uint32_t value = 1;           // randomized hash output in [1, g]
};
struct HrReport {
    uint32_t value = 1;  // in [1, d]
};

using Report = std::variant<KrrReport, UnaryReport, BlhReport, OlhReport, HrReport>;

bool report_is_valid(const MechanismConfig& cfg, const Report& report);

// Hash helpers, exposed so structural properties can be checked exhaustively.
uint8_t blh_hash(std::span<const uint8_t> hash_vector, uint32_t value);
uint32_t olh_hash(std::span<const uint8_t> hash_digits, uint32_t alphabet, uint32_t value,
                  uint32_t digit_count);
// Membership of column y (1-based in [1, d]) in the positive support set of
// input `value` under the sign matrix (-1)^<row, col>.
bool hr_in_support(uint32_t value, uint32_t y);

// Perturbation. `value` is 1-based in [1, k].
KrrReport perturb_krr(uint32_t value, const MechanismConfig& cfg, Rng& rng);
UnaryReport perturb_rappor(uint32_t value, const MechanismConfig& cfg, Rng& rng);
UnaryReport perturb_oue(uint32_t value, const MechanismConfig& cfg, Rng& rng);
BlhReport perturb_blh(uint32_t value, const MechanismConfig& cfg, Rng& rng);
OlhReport perturb_olh(uint32_t value, const MechanismConfig& cfg, Rng& rng);
HrReport perturb_hr(uint32_t value, const MechanismConfig& cfg, Rng& rng);
Report perturb(uint32_t value, const MechanismConfig& cfg, Rng& rng);

// Unbiased frequency estimation from a batch of reports. Entries may fall
// outside [0, 1]; no projection is applied.
std::vector<double> estimate_krr(std::span<const Report> reports, const MechanismConfig& cfg);
std::vector<double> estimate_rappor(std::span<const Report> reports, const MechanismConfig& cfg);
std::vector<double> estimate_oue(std::span<const Report> reports, const MechanismConfig& cfg);
std::vector<double> estimate_blh(std::span<const Report> reports, const MechanismConfig& cfg);
std::vector<double> estimate_olh(std::span<const Report> reports, const MechanismConfig& cfg);
std::vector<double> estimate_hr(std::span<const Report> reports, const MechanismConfig& cfg);
std::vector<double> estimate(std::span<const Report> reports, const MechanismConfig& cfg);

// Streaming accumulator behind the estimators, usable without materializing a
// contiguous report span.
class EstimateAccumulator {
  public:
    explicit EstimateAccumulator(const MechanismConfig& cfg);
    void add(const Report& report);
    std::vector<double> finish() const;

  private:
    const MechanismConfig* cfg_;
    uint64_t count_ = 0;
    std::vector<uint64_t> tallies_;
};

// Fixed-length big-endian wire encoding; a bijection between report patterns
// and a subset of {0,1}^report_bits.
std::vector<uint8_t> encode_report(const Report& report, const MechanismConfig& cfg);
// Returns nullopt when the bit string decodes outside the valid report range.
std::optional<Report> decode_report(std::span<const uint8_t> bits, const MechanismConfig& cfg);

// Positional base-B interpretation of the report's output vector (B = g for
// OLH, B = 2 otherwise); bijective between patterns and [0, index_space).
uint64_t report_to_index(const Report& report, const MechanismConfig& cfg);
// Defined for any index in [0, index_space); nullopt when the pattern is not
// a valid report (e.g. a KRR index >= k). Throws if the index is out of range.
std::optional<Report> index_to_report(uint64_t index, const MechanismConfig& cfg);

// Uniform draw over valid reports; the substitute for undecodable receptions.
Report uniform_valid_report(const MechanismConfig& cfg, Rng& rng);

}  // namespace mcldp::ldp
