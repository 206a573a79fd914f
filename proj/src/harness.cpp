#include "mcldp/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "mcldp/parallel.hpp"
#include "mcldp/rlim.hpp"

namespace mcldp::harness {

namespace {

enum class Mode { kIdeal, kUncoded, kRlim };

uint64_t mechanism_id(ldp::Mechanism m) { return static_cast<uint64_t>(m); }

struct PreparedInputs {
    std::vector<std::vector<double>> truths;    // R x k
    std::vector<std::vector<uint16_t>> values;  // N x R, 1-based
    BaselineStats baseline;
};

PreparedInputs prepare_inputs(const ExperimentConfig& cfg) {
    PreparedInputs in;
    Rng gt_rng = stream_rng(cfg.master_seed, Stage::kGroundTruth, 0, 0);
    in.truths.reserve(cfg.num_dists);
    for (uint32_t i = 0; i < cfg.num_dists; ++i)
        in.truths.push_back(sample_simplex(cfg.domain_size, gt_rng));

    in.values.assign(cfg.num_users, {});
    parallel_for(cfg.num_users, cfg.threads, [&](std::size_t u) {
        Rng rng = stream_rng(cfg.master_seed, Stage::kValues, 0, u);
        auto& row = in.values[u];
        row.reserve(cfg.num_dists);
        for (uint32_t i = 0; i < cfg.num_dists; ++i)
            row.push_back(static_cast<uint16_t>(sample_categorical(in.truths[i], rng)));
    });
    in.baseline = baseline_stats(in.values, cfg.domain_size);
    return in;
}

// Pilot threshold calibration for coded runs. The decoded-symbol error count
// is piecewise constant in the threshold and only changes where a detected
// pilot bit flips, so it is evaluated once per distinct pilot count. Because
// the pilot set stands in for the whole population, the returned threshold is
// the midpoint of the longest minimal-error run: a plateau edge would sit
// exactly at the pilot noise maximum and misdetect other users' slots.
uint32_t calibrate_threshold_ser(const rlim::Codebook& book,
                                 const std::vector<std::vector<uint32_t>>& counts,
                                 const std::vector<std::vector<uint64_t>>& true_indices,
                                 uint32_t pilot_users, uint32_t reports_per_user) {
    uint32_t max_count = 0;
    for (uint32_t u = 0; u < pilot_users; ++u)
        for (uint32_t c : counts[u]) max_count = std::max(max_count, c);

    std::vector<uint8_t> present(static_cast<std::size_t>(max_count) + 1, 0);
    for (uint32_t u = 0; u < pilot_users; ++u)
        for (uint32_t c : counts[u]) present[c] = 1;

    std::vector<uint32_t> candidates;
    candidates.push_back(1);
    for (uint32_t c = 0; c <= max_count; ++c)
        if (present[c] && c + 1 > 1) candidates.push_back(c + 1);

    const uint32_t n = book.word_bits();
    std::vector<uint8_t> word(n);
    std::vector<uint64_t> errors(candidates.size(), 0);
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        const uint32_t tau = candidates[ci];
        uint64_t err = 0;
        for (uint32_t u = 0; u < pilot_users; ++u) {
            const auto& cnt = counts[u];
            for (uint32_t i = 0; i < reports_per_user; ++i) {
                const std::size_t base = static_cast<std::size_t>(i) * n;
                for (uint32_t b = 0; b < n; ++b) word[b] = cnt[base + b] >= tau ? 1 : 0;
                auto decoded = rlim_decode(word, book);
                if (!decoded || *decoded != true_indices[u][i]) ++err;
            }
        }
        errors[ci] = err;
    }

    const uint64_t best_err = *std::min_element(errors.begin(), errors.end());
    // Candidate ci covers the run [candidates[ci], candidates[ci+1] - 1].
    uint64_t best_len = 0;
    uint32_t best_tau = candidates.front();
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        if (errors[ci] != best_err) continue;
        std::size_t cj = ci;
        while (cj + 1 < candidates.size() && errors[cj + 1] == best_err) ++cj;
        const uint32_t lo = candidates[ci];
        const uint32_t hi = cj + 1 < candidates.size() ? candidates[cj + 1] - 1 : candidates[cj];
        const uint64_t len = hi - lo + 1;
        if (len > best_len) {
            best_len = len;
            best_tau = lo + static_cast<uint32_t>((hi - lo) / 2);
        }
        ci = cj;
    }
    return best_tau;
}

MechanismOutcome run_mechanism(const ExperimentConfig& cfg, const PreparedInputs& in,
                               ldp::Mechanism mech, Mode mode) {
    const auto mc = ldp::MechanismConfig::make(mech, cfg.domain_size, cfg.epsilon);
    const uint32_t N = cfg.num_users;
    const uint32_t R = cfg.num_dists;
    const uint64_t mid = mechanism_id(mech);

    std::vector<std::vector<ldp::Report>> reports(N);
    parallel_for(N, cfg.threads, [&](std::size_t u) {
        Rng rng = stream_rng(cfg.master_seed, Stage::kPerturb, mid, u);
        auto& row = reports[u];
        row.reserve(R);
        for (uint32_t i = 0; i < R; ++i) row.push_back(ldp::perturb(in.values[u][i], mc, rng));
    });

    std::optional<rlim::Codebook> book;
    std::vector<std::vector<uint64_t>> true_indices;
    if (mode == Mode::kRlim) {
        book = rlim::Codebook::build(mc.index_space, true);
        true_indices.assign(N, {});
    }
    const uint32_t wire_bits = mode == Mode::kRlim ? book->word_bits() : mc.report_bits;

    std::vector<std::vector<uint8_t>> streams(N);
    parallel_for(N, cfg.threads, [&](std::size_t u) {
        auto& stream = streams[u];
        stream.reserve(static_cast<std::size_t>(wire_bits) * R);
        for (uint32_t i = 0; i < R; ++i) {
            if (mode == Mode::kRlim) {
                uint64_t s = ldp::report_to_index(reports[u][i], mc);
                true_indices[u].push_back(s);
                book->append_word_bits(static_cast<uint32_t>(s), stream);
            } else {
                auto bits = ldp::encode_report(reports[u][i], mc);
                stream.insert(stream.end(), bits.begin(), bits.end());
            }
        }
    });

    uint64_t method_ones = 0;
    for (const auto& stream : streams) method_ones += count_ones(stream);
    auto norm = normalize_resources(in.baseline.bits_per_value, cfg.channel.slot_duration,
                                    cfg.channel.molecules_per_one, in.baseline.one_bits, wire_bits,
                                    method_ones);

    MechanismOutcome out;
    out.mechanism = mech;
    out.slot_duration = norm.slot_duration;
    out.molecules = norm.molecules;
    out.wire_bits = wire_bits;
    out.one_bits = method_ones;

    std::vector<std::vector<ldp::Report>> decoded;
    const std::vector<std::vector<ldp::Report>>* estimator_input = &reports;

    if (mode != Mode::kIdeal) {
        channel::ChannelParams link = cfg.channel;
        link.slot_duration = norm.slot_duration;
        link.molecules_per_one = norm.molecules;
        channel::Channel ch(link);

        std::vector<std::vector<uint32_t>> counts(N);
        parallel_for(N, cfg.threads, [&](std::size_t u) {
            Rng rng = stream_rng(cfg.master_seed, Stage::kChannel, mid, u);
            counts[u] = ch.transmit(streams[u], rng);
        });

        const uint32_t tau =
            mode == Mode::kUncoded
                ? channel::calibrate_threshold_ber(streams, counts)
                : calibrate_threshold_ser(*book, counts, true_indices, cfg.pilot_users, R);
        out.threshold = tau;

        decoded.assign(N, {});
        std::vector<uint64_t> invalid(N, 0);
        parallel_for(N, cfg.threads, [&](std::size_t u) {
            Rng fallback = stream_rng(cfg.master_seed, Stage::kFallback, mid, u);
            auto detected = channel::detect(counts[u], tau);
            auto& row = decoded[u];
            row.reserve(R);
            for (uint32_t i = 0; i < R; ++i) {
                std::span<const uint8_t> word(detected.data() +
                                                  static_cast<std::size_t>(i) * wire_bits,
                                              wire_bits);
                std::optional<ldp::Report> rep;
                if (mode == Mode::kUncoded) {
                    rep = ldp::decode_report(word, mc);
                } else if (auto idx = rlim::rlim_decode(word, *book)) {
                    rep = ldp::index_to_report(*idx, mc);
                }
                if (!rep) {
                    rep = ldp::uniform_valid_report(mc, fallback);
                    ++invalid[u];
                }
                row.push_back(std::move(*rep));
            }
        });
        for (uint64_t v : invalid) out.invalid_reports += v;
        estimator_input = &decoded;
    }

    double l1_sum = 0.0;
    for (uint32_t i = 0; i < R; ++i) {
        ldp::EstimateAccumulator acc(mc);
        for (uint32_t u = 0; u < N; ++u) acc.add((*estimator_input)[u][i]);
        l1_sum += l1_error(in.truths[i], acc.finish());
    }
    out.l1_mean = l1_sum / R;
    return out;
}

ExperimentResult run(const ExperimentConfig& cfg, Mode mode) {
    cfg.validate(mode == Mode::kRlim);
    PreparedInputs in = prepare_inputs(cfg);
    ExperimentResult result;
    result.outcomes.reserve(cfg.mechanisms.size());
    for (ldp::Mechanism mech : cfg.mechanisms)
        result.outcomes.push_back(run_mechanism(cfg, in, mech, mode));
    return result;
}

}  // namespace

void ExperimentConfig::validate(bool coded) const {
    channel.validate();
    if (domain_size < 2) throw std::invalid_argument("domain_size must be >= 2");
    if (domain_size > UINT16_MAX) throw std::invalid_argument("domain_size must fit 16 bits");
    if (num_users < 1) throw std::invalid_argument("num_users must be >= 1");
    if (num_dists < 1) throw std::invalid_argument("num_dists must be >= 1");
    if (mechanisms.empty()) throw std::invalid_argument("at least one mechanism required");
    if (coded && pilot_users < 1) throw std::invalid_argument("pilot_users must be >= 1");
    if (coded && pilot_users > num_users)
        throw std::invalid_argument("pilot_users must not exceed num_users");
}

std::vector<double> sample_simplex(uint32_t k, Rng& rng) {
    if (k < 2) throw std::invalid_argument("simplex dimension must be >= 2");
    std::vector<double> p(k);
    double total = 0.0;
    for (auto& x : p) {
        x = -std::log(rng.next_double_open());
        total += x;
    }
    for (auto& x : p) x /= total;
    return p;
}

uint32_t sample_categorical(std::span<const double> probs, Rng& rng) {
    double u = rng.next_double();
    double cumulative = 0.0;
    for (std::size_t j = 0; j + 1 < probs.size(); ++j) {
        cumulative += probs[j];
        if (u < cumulative) return static_cast<uint32_t>(j) + 1;
    }
    return static_cast<uint32_t>(probs.size());
}

double l1_error(std::span<const double> truth, std::span<const double> estimate) {
    if (truth.size() != estimate.size()) throw std::invalid_argument("length mismatch");
    double sum = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) sum += std::abs(truth[j] - estimate[j]);
    return sum;
}

uint64_t count_ones(std::span<const uint8_t> bits) {
    uint64_t total = 0;
    for (uint8_t b : bits) total += b;
    return total;
}

BaselineStats baseline_stats(const std::vector<std::vector<uint16_t>>& user_values, uint32_t k) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    BaselineStats stats;
    stats.bits_per_value = std::max(1u, static_cast<uint32_t>(std::bit_width(uint64_t{k} - 1)));
    for (const auto& row : user_values) {
        for (uint16_t value : row) {
            if (value < 1 || value > k) throw std::invalid_argument("value outside [1, k]");
            stats.one_bits += static_cast<uint64_t>(std::popcount(uint32_t{value} - 1u));
        }
    }
    return stats;
}

NormalizedResources normalize_resources(uint32_t baseline_bits, double baseline_slot_duration,
                                        uint32_t baseline_molecules, uint64_t baseline_ones,
                                        uint32_t method_bits, uint64_t method_ones) {
    if (method_bits < 1) throw std::invalid_argument("method_bits must be >= 1");
    NormalizedResources out;
    out.slot_duration =
        baseline_slot_duration * static_cast<double>(baseline_bits) / method_bits;
    if (method_ones == 0) {
        out.molecules = baseline_molecules;
        return out;
    }
    double exact = static_cast<double>(baseline_molecules) * static_cast<double>(baseline_ones) /
                   static_cast<double>(method_ones);
    double rounded = std::nearbyint(exact);  // default FP mode: ties to even
    out.molecules = rounded < 1.0 ? 1u : static_cast<uint32_t>(rounded);
    return out;
}

ExperimentResult run_ideal(const ExperimentConfig& cfg) { return run(cfg, Mode::kIdeal); }
ExperimentResult run_uncoded(const ExperimentConfig& cfg) { return run(cfg, Mode::kUncoded); }
ExperimentResult run_rlim(const ExperimentConfig& cfg) { return run(cfg, Mode::kRlim); }

}  // namespace mcldp::harness
