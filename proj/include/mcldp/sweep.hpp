#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mcldp/harness.hpp"

namespace mcldp::sweep {

enum class Axis { kEpsilon, kK, kTs, kM, kR0, kSigma2, kN };
enum class CodedMode { kUncoded, kRlim, kBoth };

std::string axis_name(Axis axis);
std::optional<Axis> axis_from_name(const std::string& name);
std::string coded_mode_name(CodedMode mode);
std::optional<CodedMode> coded_mode_from_name(const std::string& name);

// A one-dimensional parameter sweep around a fixed experiment template. When
// no axis is configured the sweep is the single template point (reported
// under the epsilon axis).
struct SweepSpec {
    Axis axis = Axis::kEpsilon;
    std::vector<double> values;  // strictly increasing; filled from the template if absent
    harness::ExperimentConfig base;
    CodedMode coded = CodedMode::kUncoded;
    std::set<std::string> explicit_keys;  // config keys that were set in the file

    void validate() const;
};

// Parses the structured key-value config format (one `key = value` per line,
// `#` comments). Unspecified fields keep simulator defaults. Errors carry the
// offending line or field name.
SweepSpec parse_config(std::istream& in);
SweepSpec parse_config_file(const std::string& path);

struct ResultRow {
    double axis_value = 0.0;
    std::string mechanism;
    std::string coded;  // "uncoded" or "rlim"
    uint64_t seed = 0;
    double l1_mean = 0.0;
    uint64_t tau_star = 0;
    double t_s_m = 0.0;
    uint64_t M_m = 0;
    uint64_t l_m = 0;
    uint64_t W_m = 0;
    uint64_t invalid_count = 0;

    bool operator==(const ResultRow&) const = default;
};

using ResultTable = std::vector<ResultRow>;

using ProgressFn = std::function<void(const std::string&)>;
using RowSink = std::function<void(const ResultRow&)>;

// Runs every sweep point for master seeds seed, seed+1, ..., seed+num_seeds-1.
// Rows are produced in deterministic sorted order (axis value, mechanism,
// coded flag, seed) and also handed to `sink` as soon as they are final.
ResultTable run_sweep(const SweepSpec& spec, uint64_t seed, uint32_t num_seeds,
                      const ProgressFn& progress = {}, const RowSink& sink = {});

void write_csv(std::ostream& out, const ResultTable& table);
void write_json(std::ostream& out, const ResultTable& table);
ResultTable read_csv(std::istream& in);
ResultTable read_json(std::istream& in);

}  // namespace mcldp::sweep
