#include "mcldp/ldp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace mcldp::ldp {

namespace {

constexpr uint32_t kMaxDomain = 1u << 20;
constexpr double kMaxEpsilon = 20.0;

uint32_t ceil_log2(uint64_t x) {
    return x <= 1 ? 0 : static_cast<uint32_t>(std::bit_width(x - 1));
}

uint64_t ipow(uint64_t base, uint32_t exp) {
    uint64_t r = 1;
    for (uint32_t i = 0; i < exp; ++i) {
        if (r > UINT64_MAX / base) throw std::overflow_error("index space overflows 64 bits");
        r *= base;
    }
    return r;
}

bool is_prime(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

void append_int_bits(uint64_t z, uint32_t width, std::vector<uint8_t>& out) {
    for (uint32_t t = 0; t < width; ++t) out.push_back(static_cast<uint8_t>((z >> (width - 1 - t)) & 1));
}

uint64_t bits_to_int(std::span<const uint8_t> bits) {
    uint64_t z = 0;
    for (uint8_t b : bits) z = (z << 1) | (b ? 1u : 0u);
    return z;
}

void check_value(uint32_t value, uint32_t k) {
    if (value < 1 || value > k) throw std::invalid_argument("input value outside [1, k]");
}

std::vector<uint8_t> random_bit_vector(uint32_t count, Rng& rng) {
    std::vector<uint8_t> bits(count);
    uint64_t word = 0;
    for (uint32_t j = 0; j < count; ++j) {
        if (j % 64 == 0) word = rng.next_u64();
        bits[j] = static_cast<uint8_t>((word >> (j % 64)) & 1);
    }
    return bits;
}

}  // namespace

std::string mechanism_name(Mechanism m) {
    switch (m) {
        case Mechanism::kKrr: return "krr";
        case Mechanism::kRappor: return "rappor";
        case Mechanism::kOue: return "oue";
        case Mechanism::kBlh: return "blh";
        case Mechanism::kOlh: return "olh";
        case Mechanism::kHr: return "hr";
    }
    return "unknown";
}

std::optional<Mechanism> mechanism_from_name(const std::string& name) {
    for (Mechanism m : kAllMechanisms)
        if (mechanism_name(m) == name) return m;
    return std::nullopt;
}

uint32_t choose_olh_alphabet(double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
    auto g0 = static_cast<uint64_t>(std::floor(std::exp(epsilon))) + 1;
    if (g0 < 2) g0 = 2;
    uint64_t lo = g0;
    while (lo > 2 && !is_prime(lo)) --lo;
    if (lo < 2) lo = 2;
    uint64_t hi = g0;
    while (!is_prime(hi)) ++hi;
    if (lo == hi) return static_cast<uint32_t>(lo);
    double e1 = std::exp(epsilon) - 1.0;
    auto variance_proxy = [e1](uint64_t g) {
        double num = e1 + static_cast<double>(g);
        return num * num / (e1 * e1 * (static_cast<double>(g) - 1.0));
    };
    return static_cast<uint32_t>(variance_proxy(lo) <= variance_proxy(hi) ? lo : hi);
}

MechanismConfig MechanismConfig::make(Mechanism mechanism, uint32_t domain_size, double epsilon) {
    if (domain_size < 2 || domain_size > kMaxDomain)
        throw std::invalid_argument("domain size must be in [2, 2^20]");
    if (epsilon < 0.0 || epsilon > kMaxEpsilon || !std::isfinite(epsilon))
        throw std::invalid_argument("epsilon must be in [0, 20]");

    MechanismConfig cfg;
    cfg.mechanism = mechanism;
    cfg.domain_size = domain_size;
    cfg.epsilon = epsilon;
    const double k = domain_size;
    const double inv_e = std::exp(-epsilon);

    switch (mechanism) {
        case Mechanism::kKrr:
            cfg.keep_prob = 1.0 / (1.0 + (k - 1.0) * inv_e);
            cfg.flip_prob = cfg.keep_prob * inv_e;
            cfg.report_bits = std::max(1u, ceil_log2(domain_size));
            cfg.index_space = uint64_t{1} << cfg.report_bits;
            break;
        case Mechanism::kRappor: {
            double inv_e_half = std::exp(-epsilon / 2.0);
            cfg.keep_prob = 1.0 / (1.0 + inv_e_half);
            cfg.flip_prob = 1.0 - cfg.keep_prob;
            cfg.report_bits = domain_size;
            cfg.index_space = domain_size <= 63 ? (uint64_t{1} << domain_size) : 0;
            break;
        }
        case Mechanism::kOue:
            cfg.keep_prob = 0.5;
            cfg.flip_prob = inv_e / (1.0 + inv_e);
            cfg.report_bits = domain_size;
            cfg.index_space = domain_size <= 63 ? (uint64_t{1} << domain_size) : 0;
            break;
        case Mechanism::kBlh:
            cfg.keep_prob = 1.0 / (1.0 + inv_e);
            cfg.hash_bits = std::max(1u, ceil_log2(domain_size));
            cfg.report_bits = cfg.hash_bits + 1;
            cfg.index_space = uint64_t{1} << cfg.report_bits;
            break;
        case Mechanism::kOlh: {
            cfg.hash_alphabet = choose_olh_alphabet(epsilon);
            cfg.keep_prob = 1.0 / (1.0 + (cfg.hash_alphabet - 1.0) * inv_e);
            uint32_t m = 1;
            uint64_t span = cfg.hash_alphabet;
            while (span < domain_size) {
                span *= cfg.hash_alphabet;
                ++m;
            }
            cfg.hash_digits = m;
            cfg.index_space = ipow(cfg.hash_alphabet, m + 1);
            cfg.report_bits = ceil_log2(cfg.index_space);
            break;
        }
        case Mechanism::kHr:
            cfg.keep_prob = 1.0 / (1.0 + inv_e);
            cfg.hadamard_bits = ceil_log2(static_cast<uint64_t>(domain_size) + 1);
            cfg.hadamard_size = 1u << cfg.hadamard_bits;
            cfg.report_bits = cfg.hadamard_bits;
            cfg.index_space = cfg.hadamard_size;
            break;
    }
    return cfg;
}

bool report_is_valid(const MechanismConfig& cfg, const Report& report) {
    switch (cfg.mechanism) {
        case Mechanism::kKrr: {
            const auto* r = std::get_if<KrrReport>(&report);
            return r && r->value >= 1 && r->value <= cfg.domain_size;
        }
        case Mechanism::kRappor:
        case Mechanism::kOue: {
            const auto* r = std::get_if<UnaryReport>(&report);
            if (!r || r->bits.size() != cfg.domain_size) return false;
            return std::all_of(r->bits.begin(), r->bits.end(), [](uint8_t b) { return b <= 1; });
        }
        case Mechanism::kBlh: {
            const auto* r = std::get_if<BlhReport>(&report);
            if (!r || r->hash.size() != cfg.hash_bits || r->bit > 1) return false;
            return std::all_of(r->hash.begin(), r->hash.end(), [](uint8_t b) { return b <= 1; });
        }
        case Mechanism::kOlh: {
            const auto* r = std::get_if<OlhReport>(&report);
            if (!r || r->digits.size() != cfg.hash_digits) return false;
            if (r->value < 1 || r->value > cfg.hash_alphabet) return false;
            return std::all_of(r->digits.begin(), r->digits.end(),
                               [&](uint8_t d) { return d < cfg.hash_alphabet; });
        }
        case Mechanism::kHr: {
            const auto* r = std::get_if<HrReport>(&report);
            return r && r->value >= 1 && r->value <= cfg.hadamard_size;
        }
    }
    return false;
}

uint8_t blh_hash(std::span<const uint8_t> hash_vector, uint32_t value) {
    uint32_t v = value - 1;
    uint32_t acc = 0;
    const auto d = static_cast<uint32_t>(hash_vector.size());
    for (uint32_t j = 0; j < d; ++j) {
        uint32_t value_bit = (v >> (d - 1 - j)) & 1;
        acc ^= hash_vector[j] & value_bit;
    }
    return static_cast<uint8_t>(acc);
}

uint32_t olh_hash(std::span<const uint8_t> hash_digits, uint32_t alphabet, uint32_t value,
                  uint32_t digit_count) {
    uint64_t v = value - 1;
    uint64_t acc = 0;
    for (uint32_t j = digit_count; j-- > 0;) {
        acc += hash_digits[j] * (v % alphabet);
        v /= alphabet;
    }
    return static_cast<uint32_t>(acc % alphabet);
}

bool hr_in_support(uint32_t value, uint32_t y) {
    return (std::popcount(value & (y - 1)) & 1) == 0;
}

KrrReport perturb_krr(uint32_t value, const MechanismConfig& cfg, Rng& rng) {
    check_value(value, cfg.domain_size);
    if (rng.bernoulli(cfg.keep_prob)) return {value};
    auto other = static_cast<uint32_t>(rng.below(cfg.domain_size - 1)) + 1;
    if (other >= value) ++other;
    return {other};
}

static UnaryReport perturb_unary(uint32_t value, const MechanismConfig& cfg, Rng& rng) {
    check_value(value, cfg.domain_size);
    UnaryReport report;
    report.bits.resize(cfg.domain_size);
    for (uint32_t j = 0; j < cfg.domain_size; ++j) {
        double stay_one = (j == value - 1) ? cfg.keep_prob : cfg.flip_prob;
        report.bits[j] = rng.bernoulli(stay_one) ? 1 : 0;
    }
    return report;
}

UnaryReport perturb_rappor(uint32_t value, const MechanismConfig& cfg, Rng& rng) {
    return perturb_unary(value, cfg, rng);
}

UnaryReport perturb_oue(uint32_t value, const MechanismConfig& cfg, Rng& rng) {
    return perturb_unary(value, cfg, rng);
}

BlhReport perturb_blh(uint32_t value, const MechanismConfig& cfg, Rng& rng) {
    check_value(value, cfg.domain_size);
    BlhReport report;
    report.hash = random_bit_vector(cfg.hash_bits, rng);
    uint8_t hashed = blh_hash(report.hash, value);
    report.bit = rng.bernoulli(cfg.keep_prob) ? hashed : static_cast<uint8_t>(1 - hashed);
    return report;
}

OlhReport perturb_olh(uint32_t value, const MechanismConfig& cfg, Rng& rng) {
    check_value(value, cfg.domain_size);
    OlhReport report;
    report.digits.resize(cfg.hash_digits);
    for (auto& d : report.digits) d = static_cast<uint8_t>(rng.below(cfg.hash_alphabet));
    uint32_t hashed = olh_hash(report.digits, cfg.hash_alphabet, value, cfg.hash_digits);
    uint32_t out;
    if (rng.bernoulli(cfg.keep_prob)) {
        out = hashed;
    } else {
        out = static_cast<uint32_t>(rng.below(cfg.hash_alphabet - 1));
        if (out >= hashed) ++out;
    }
    report.value = out + 1;
    return report;
}

HrReport perturb_hr(uint32_t value, const MechanismConfig& cfg, Rng& rng) {
    check_value(value, cfg.domain_size);
    const uint32_t d = cfg.hadamard_size;
    const uint32_t bits = cfg.hadamard_bits;
    // Target parity 0 lands inside the positive support set.
    uint32_t target = rng.bernoulli(cfg.keep_prob) ? 0u : 1u;
    // The support set is an affine subspace of size d/2: fix the lowest set
    // bit of `value` as the parity corrector and draw the other bits freely.
    auto pivot = static_cast<uint32_t>(std::countr_zero(value));
    uint64_t free_bits = rng.below(d / 2);
    uint32_t y0 = 0;
    uint32_t taken = 0;
    for (uint32_t pos = 0; pos < bits; ++pos) {
        if (pos == pivot) continue;
        if ((free_bits >> taken) & 1) y0 |= 1u << pos;
        ++taken;
    }
    if ((static_cast<uint32_t>(std::popcount(y0 & value)) & 1) != target) y0 |= 1u << pivot;
    return {y0 + 1};
}

Report perturb(uint32_t value, const MechanismConfig& cfg, Rng& rng) {
    switch (cfg.mechanism) {
        case Mechanism::kKrr: return perturb_krr(value, cfg, rng);
        case Mechanism::kRappor: return perturb_rappor(value, cfg, rng);
        case Mechanism::kOue: return perturb_oue(value, cfg, rng);
        case Mechanism::kBlh: return perturb_blh(value, cfg, rng);
        case Mechanism::kOlh: return perturb_olh(value, cfg, rng);
        case Mechanism::kHr: return perturb_hr(value, cfg, rng);
    }
    throw std::logic_error("unreachable");
}

EstimateAccumulator::EstimateAccumulator(const MechanismConfig& cfg) : cfg_(&cfg) {
    switch (cfg.mechanism) {
        case Mechanism::kKrr:
        case Mechanism::kRappor:
        case Mechanism::kOue:
            tallies_.assign(cfg.domain_size, 0);
            break;
        case Mechanism::kBlh:
        case Mechanism::kOlh:
            tallies_.assign(cfg.index_space, 0);
            break;
        case Mechanism::kHr:
            tallies_.assign(cfg.hadamard_size, 0);
            break;
    }
}

void EstimateAccumulator::add(const Report& report) {
    ++count_;
    switch (cfg_->mechanism) {
        case Mechanism::kKrr:
            tallies_[std::get<KrrReport>(report).value - 1]++;
            break;
        case Mechanism::kRappor:
        case Mechanism::kOue: {
            const auto& bits = std::get<UnaryReport>(report).bits;
            for (uint32_t j = 0; j < cfg_->domain_size; ++j) tallies_[j] += bits[j];
            break;
        }
        case Mechanism::kBlh:
        case Mechanism::kOlh:
            tallies_[report_to_index(report, *cfg_)]++;
            break;
        case Mechanism::kHr:
            tallies_[std::get<HrReport>(report).value - 1]++;
            break;
    }
}

std::vector<double> EstimateAccumulator::finish() const {
    if (count_ == 0) throw std::invalid_argument("cannot estimate from zero reports");
    const auto& cfg = *cfg_;
    const auto n = static_cast<double>(count_);
    const uint32_t k = cfg.domain_size;
    std::vector<double> estimate(k, 0.0);
    switch (cfg.mechanism) {
        case Mechanism::kKrr:
        case Mechanism::kRappor:
        case Mechanism::kOue: {
            double denom = cfg.keep_prob - cfg.flip_prob;
            if (denom == 0.0) throw std::domain_error("estimator undefined: p equals q");
            for (uint32_t j = 0; j < k; ++j)
                estimate[j] = (tallies_[j] / n - cfg.flip_prob) / denom;
            break;
        }
        case Mechanism::kBlh: {
            double denom = cfg.keep_prob - 0.5;
            if (denom == 0.0) throw std::domain_error("estimator undefined: p equals 1/2");
            const uint32_t d = cfg.hash_bits;
            std::vector<uint8_t> hash(d);
            for (uint64_t z = 0; z < cfg.index_space; ++z) {
                if (tallies_[z] == 0) continue;
                for (uint32_t j = 0; j < d; ++j) hash[j] = static_cast<uint8_t>((z >> (d - j)) & 1);
                auto bit = static_cast<uint8_t>(z & 1);
                for (uint32_t v = 1; v <= k; ++v)
                    if (blh_hash(hash, v) == bit) estimate[v - 1] += static_cast<double>(tallies_[z]);
            }
            for (uint32_t j = 0; j < k; ++j) estimate[j] = (estimate[j] / n - 0.5) / denom;
            break;
        }
        case Mechanism::kOlh: {
            const uint32_t g = cfg.hash_alphabet;
            const uint32_t m = cfg.hash_digits;
            double denom = cfg.keep_prob - 1.0 / g;
            if (denom == 0.0) throw std::domain_error("estimator undefined: p equals 1/g");
            std::vector<uint8_t> digits(m);
            for (uint64_t z = 0; z < cfg.index_space; ++z) {
                if (tallies_[z] == 0) continue;
                uint64_t rest = z;
                auto y0 = static_cast<uint32_t>(rest % g);
                rest /= g;
                for (uint32_t j = m; j-- > 0;) {
                    digits[j] = static_cast<uint8_t>(rest % g);
                    rest /= g;
                }
                for (uint32_t v = 1; v <= k; ++v)
                    if (olh_hash(digits, g, v, m) == y0) estimate[v - 1] += static_cast<double>(tallies_[z]);
            }
            for (uint32_t j = 0; j < k; ++j) estimate[j] = (estimate[j] / n - 1.0 / g) / denom;
            break;
        }
        case Mechanism::kHr: {
            double e = std::exp(cfg.epsilon);
            if (cfg.epsilon == 0.0) throw std::domain_error("estimator undefined at epsilon = 0");
            double scale = 2.0 * (e + 1.0) / (e - 1.0);
            for (uint32_t v = 1; v <= k; ++v) {
                double members = 0.0;
                for (uint32_t y = 1; y <= cfg.hadamard_size; ++y)
                    if (hr_in_support(v, y)) members += static_cast<double>(tallies_[y - 1]);
                estimate[v - 1] = scale * (members / n - 0.5);
            }
            break;
        }
    }
    return estimate;
}

static std::vector<double> estimate_impl(std::span<const Report> reports,
                                         const MechanismConfig& cfg) {
    EstimateAccumulator acc(cfg);
    for (const auto& r : reports) acc.add(r);
    return acc.finish();
}

std::vector<double> estimate_krr(std::span<const Report> r, const MechanismConfig& c) { return estimate_impl(r, c); }
std::vector<double> estimate_rappor(std::span<const Report> r, const MechanismConfig& c) { return estimate_impl(r, c); }
std::vector<double> estimate_oue(std::span<const Report> r, const MechanismConfig& c) { return estimate_impl(r, c); }
std::vector<double> estimate_blh(std::span<const Report> r, const MechanismConfig& c) { return estimate_impl(r, c); }
std::vector<double> estimate_olh(std::span<const Report> r, const MechanismConfig& c) { return estimate_impl(r, c); }
std::vector<double> estimate_hr(std::span<const Report> r, const MechanismConfig& c) { return estimate_impl(r, c); }
std::vector<double> estimate(std::span<const Report> r, const MechanismConfig& c) { return estimate_impl(r, c); }

std::vector<uint8_t> encode_report(const Report& report, const MechanismConfig& cfg) {
    if (!report_is_valid(cfg, report)) throw std::invalid_argument("report invalid for mechanism config");
    std::vector<uint8_t> bits;
    bits.reserve(cfg.report_bits);
    switch (cfg.mechanism) {
        case Mechanism::kKrr:
            append_int_bits(std::get<KrrReport>(report).value - 1, cfg.report_bits, bits);
            break;
        case Mechanism::kRappor:
        case Mechanism::kOue:
            bits = std::get<UnaryReport>(report).bits;
            break;
        case Mechanism::kBlh: {
            const auto& r = std::get<BlhReport>(report);
            bits = r.hash;
            bits.push_back(r.bit);
            break;
        }
        case Mechanism::kOlh:
            append_int_bits(report_to_index(report, cfg), cfg.report_bits, bits);
            break;
        case Mechanism::kHr:
            append_int_bits(std::get<HrReport>(report).value - 1, cfg.report_bits, bits);
            break;
    }
    return bits;
}

std::optional<Report> decode_report(std::span<const uint8_t> bits, const MechanismConfig& cfg) {
    if (bits.size() != cfg.report_bits) throw std::invalid_argument("wire length mismatch");
    switch (cfg.mechanism) {
        case Mechanism::kKrr: {
            uint64_t z = bits_to_int(bits);
            if (z >= cfg.domain_size) return std::nullopt;
            return Report{KrrReport{static_cast<uint32_t>(z) + 1}};
        }
        case Mechanism::kRappor:
        case Mechanism::kOue:
            return Report{UnaryReport{std::vector<uint8_t>(bits.begin(), bits.end())}};
        case Mechanism::kBlh: {
            BlhReport r;
            r.hash.assign(bits.begin(), bits.end() - 1);
            r.bit = bits.back();
            return Report{r};
        }
        case Mechanism::kOlh: {
            uint64_t z = bits_to_int(bits);
            if (z >= cfg.index_space) return std::nullopt;
            return index_to_report(z, cfg);
        }
        case Mechanism::kHr: {
            uint64_t z = bits_to_int(bits);
            return Report{HrReport{static_cast<uint32_t>(z) + 1}};
        }
    }
    return std::nullopt;
}

uint64_t report_to_index(const Report& report, const MechanismConfig& cfg) {
    if (cfg.index_space == 0)
        throw std::invalid_argument("index space exceeds 64 bits for this mechanism config");
    if (!report_is_valid(cfg, report)) throw std::invalid_argument("report invalid for mechanism config");
    switch (cfg.mechanism) {
        case Mechanism::kKrr: return std::get<KrrReport>(report).value - 1;
        case Mechanism::kRappor:
        case Mechanism::kOue: return bits_to_int(std::get<UnaryReport>(report).bits);
        case Mechanism::kBlh: {
            const auto& r = std::get<BlhReport>(report);
            return (bits_to_int(r.hash) << 1) | r.bit;
        }
        case Mechanism::kOlh: {
            const auto& r = std::get<OlhReport>(report);
            uint64_t z = 0;
            for (uint8_t d : r.digits) z = z * cfg.hash_alphabet + d;
            return z * cfg.hash_alphabet + (r.value - 1);
        }
        case Mechanism::kHr: return std::get<HrReport>(report).value - 1;
    }
    throw std::logic_error("unreachable");
}

std::optional<Report> index_to_report(uint64_t index, const MechanismConfig& cfg) {
    if (cfg.index_space == 0)
        throw std::invalid_argument("index space exceeds 64 bits for this mechanism config");
    if (index >= cfg.index_space) throw std::out_of_range("report index out of range");
    switch (cfg.mechanism) {
        case Mechanism::kKrr:
            if (index >= cfg.domain_size) return std::nullopt;
            return Report{KrrReport{static_cast<uint32_t>(index) + 1}};
        case Mechanism::kRappor:
        case Mechanism::kOue: {
            UnaryReport r;
            r.bits.resize(cfg.domain_size);
            for (uint32_t j = 0; j < cfg.domain_size; ++j)
                r.bits[j] = static_cast<uint8_t>((index >> (cfg.domain_size - 1 - j)) & 1);
            return Report{r};
        }
        case Mechanism::kBlh: {
            BlhReport r;
            r.bit = static_cast<uint8_t>(index & 1);
            uint64_t rest = index >> 1;
            r.hash.resize(cfg.hash_bits);
            for (uint32_t j = cfg.hash_bits; j-- > 0;) {
                r.hash[j] = static_cast<uint8_t>(rest & 1);
                rest >>= 1;
            }
            return Report{r};
        }
        case Mechanism::kOlh: {
            OlhReport r;
            uint64_t rest = index;
            r.value = static_cast<uint32_t>(rest % cfg.hash_alphabet) + 1;
            rest /= cfg.hash_alphabet;
            r.digits.resize(cfg.hash_digits);
            for (uint32_t j = cfg.hash_digits; j-- > 0;) {
                r.digits[j] = static_cast<uint8_t>(rest % cfg.hash_alphabet);
                rest /= cfg.hash_alphabet;
            }
            return Report{r};
        }
        case Mechanism::kHr:
            return Report{HrReport{static_cast<uint32_t>(index) + 1}};
    }
    return std::nullopt;
}

Report uniform_valid_report(const MechanismConfig& cfg, Rng& rng) {
    switch (cfg.mechanism) {
        case Mechanism::kKrr:
            return KrrReport{static_cast<uint32_t>(rng.below(cfg.domain_size)) + 1};
        case Mechanism::kRappor:
        case Mechanism::kOue:
            return UnaryReport{random_bit_vector(cfg.domain_size, rng)};
        case Mechanism::kBlh: {
            BlhReport r;
            r.hash = random_bit_vector(cfg.hash_bits, rng);
            r.bit = static_cast<uint8_t>(rng.below(2));
            return r;
        }
        case Mechanism::kOlh: {
            OlhReport r;
            r.digits.resize(cfg.hash_digits);
            for (auto& d : r.digits) d = static_cast<uint8_t>(rng.below(cfg.hash_alphabet));
            r.value = static_cast<uint32_t>(rng.below(cfg.hash_alphabet)) + 1;
            return r;
        }
        case Mechanism::kHr:
            return HrReport{static_cast<uint32_t>(rng.below(cfg.hadamard_size)) + 1};
    }
    throw std::logic_error("unreachable");
}

}  // namespace mcldp::ldp
