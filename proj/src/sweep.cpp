#include "mcldp/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mcldp::sweep {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& text, const std::string& field) {
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("invalid number for field '" + field + "': " + text);
    }
}

uint64_t parse_unsigned(const std::string& text, const std::string& field) {
    double v = parse_number(text, field);
    if (v < 0 || v != std::floor(v) || v > 9.0e18)
        throw std::invalid_argument("field '" + field + "' must be a nonnegative integer");
    return static_cast<uint64_t>(v);
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> values;
    if (text.find(':') != std::string::npos) {
        auto parts = split(text, ':');
        if (parts.size() != 3) throw std::invalid_argument("range must be start:stop:step");
        double start = parse_number(trim(parts[0]), "values");
        double stop = parse_number(trim(parts[1]), "values");
        double step = parse_number(trim(parts[2]), "values");
        if (step <= 0 || stop < start) throw std::invalid_argument("values range must increase");
        auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 0.5)) + 1;
        for (std::size_t i = 0; i < count; ++i) values.push_back(start + static_cast<double>(i) * step);
    } else {
        for (const auto& piece : split(text, ','))
            values.push_back(parse_number(trim(piece), "values"));
    }
    return values;
}

std::vector<ldp::Mechanism> parse_mechanisms(const std::string& text) {
    std::set<ldp::Mechanism> chosen;
    for (const auto& piece : split(text, ',')) {
        auto name = trim(piece);
        auto m = ldp::mechanism_from_name(name);
        if (!m) throw std::invalid_argument("unknown mechanism '" + name + "'");
        chosen.insert(*m);
    }
    std::vector<ldp::Mechanism> out;  // canonical order regardless of listing order
    for (ldp::Mechanism m : ldp::kAllMechanisms)
        if (chosen.count(m)) out.push_back(m);
    return out;
}

void apply_axis(harness::ExperimentConfig& cfg, Axis axis, double value) {
    auto as_count = [&](const char* what) {
        if (value < 1 || value != std::floor(value))
            throw std::invalid_argument(std::string(what) + " axis values must be positive integers");
        return static_cast<uint32_t>(value);
    };
    switch (axis) {
        case Axis::kEpsilon: cfg.epsilon = value; break;
        case Axis::kK: cfg.domain_size = as_count("k"); break;
        case Axis::kTs: cfg.channel.slot_duration = value; break;
        case Axis::kM: cfg.channel.molecules_per_one = as_count("M"); break;
        case Axis::kR0: cfg.channel.distance = value; break;
        case Axis::kSigma2: cfg.channel.noise_variance = value; break;
        case Axis::kN: cfg.num_users = as_count("N"); break;
    }
}

uint32_t mechanism_rank(const std::string& name) {
    for (uint32_t i = 0; i < std::size(ldp::kAllMechanisms); ++i)
        if (ldp::mechanism_name(ldp::kAllMechanisms[i]) == name) return i;
    return UINT32_MAX;
}

constexpr char kCsvHeader[] =
    "axis_value,mechanism,coded,seed,l1_mean,tau_star,t_s_m,M_m,l_m,W_m,invalid_count";

}  // namespace

std::string axis_name(Axis axis) {
    switch (axis) {
        case Axis::kEpsilon: return "epsilon";
        case Axis::kK: return "k";
        case Axis::kTs: return "t_s";
        case Axis::kM: return "M";
        case Axis::kR0: return "r0";
        case Axis::kSigma2: return "sigma2";
        case Axis::kN: return "N";
    }
    return "unknown";
}

std::optional<Axis> axis_from_name(const std::string& name) {
    for (Axis a : {Axis::kEpsilon, Axis::kK, Axis::kTs, Axis::kM, Axis::kR0, Axis::kSigma2, Axis::kN})
        if (axis_name(a) == name) return a;
    return std::nullopt;
}

std::string coded_mode_name(CodedMode mode) {
    switch (mode) {
        case CodedMode::kUncoded: return "uncoded";
        case CodedMode::kRlim: return "rlim";
        case CodedMode::kBoth: return "both";
    }
    return "unknown";
}

std::optional<CodedMode> coded_mode_from_name(const std::string& name) {
    for (CodedMode m : {CodedMode::kUncoded, CodedMode::kRlim, CodedMode::kBoth})
        if (coded_mode_name(m) == name) return m;
    return std::nullopt;
}

void SweepSpec::validate() const {
    if (values.empty()) throw std::invalid_argument("sweep values must be nonempty");
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] <= values[i - 1])
            throw std::invalid_argument("sweep values must be strictly increasing");
    for (double v : values) {
        harness::ExperimentConfig probe = base;
        apply_axis(probe, axis, v);
        probe.validate(coded != CodedMode::kUncoded);
    }
}

SweepSpec parse_config(std::istream& in) {
    SweepSpec spec;
    // Template defaults: the reference link and full-scale population.
    spec.base.channel = channel::ChannelParams{};
    spec.base.num_users = 10000;
    spec.base.num_dists = 100;

    std::optional<std::string> raw_values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
        auto key = trim(stripped.substr(0, eq));
        auto value = trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("line " + std::to_string(line_no) + ": empty key or value");
        try {
            if (key == "axis") {
                auto axis = axis_from_name(value);
                if (!axis) throw std::invalid_argument("unknown axis '" + value + "'");
                spec.axis = *axis;
            } else if (key == "values") {
                raw_values = value;
            } else if (key == "mechanisms") {
                spec.base.mechanisms = parse_mechanisms(value);
            } else if (key == "coded") {
                auto mode = coded_mode_from_name(value);
                if (!mode) throw std::invalid_argument("unknown coded mode '" + value + "'");
                spec.coded = *mode;
            } else if (key == "D") {
                spec.base.channel.diffusion_coefficient = parse_number(value, key);
            } else if (key == "r_R") {
                spec.base.channel.receiver_radius = parse_number(value, key);
            } else if (key == "r0") {
                spec.base.channel.distance = parse_number(value, key);
            } else if (key == "t_s") {
                spec.base.channel.slot_duration = parse_number(value, key);
            } else if (key == "M") {
                spec.base.channel.molecules_per_one = static_cast<uint32_t>(parse_unsigned(value, key));
            } else if (key == "I") {
                spec.base.channel.memory = static_cast<uint32_t>(parse_unsigned(value, key));
            } else if (key == "sigma2") {
                spec.base.channel.noise_variance = parse_number(value, key);
            } else if (key == "k") {
                spec.base.domain_size = static_cast<uint32_t>(parse_unsigned(value, key));
            } else if (key == "epsilon") {
                spec.base.epsilon = parse_number(value, key);
            } else if (key == "N") {
                spec.base.num_users = static_cast<uint32_t>(parse_unsigned(value, key));
            } else if (key == "R") {
                spec.base.num_dists = static_cast<uint32_t>(parse_unsigned(value, key));
            } else if (key == "pilot_users") {
                spec.base.pilot_users = static_cast<uint32_t>(parse_unsigned(value, key));
            } else if (key == "threads") {
                spec.base.threads = static_cast<uint32_t>(parse_unsigned(value, key));
            } else {
                throw std::invalid_argument("unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
        }
        spec.explicit_keys.insert(key);
    }

    if (raw_values) {
        spec.values = parse_values(*raw_values);
    } else {
        // Single-point sweep at the template's own value for the axis.
        double v = 0;
        switch (spec.axis) {
            case Axis::kEpsilon: v = spec.base.epsilon; break;
            case Axis::kK: v = spec.base.domain_size; break;
            case Axis::kTs: v = spec.base.channel.slot_duration; break;
            case Axis::kM: v = spec.base.channel.molecules_per_one; break;
            case Axis::kR0: v = spec.base.channel.distance; break;
            case Axis::kSigma2: v = spec.base.channel.noise_variance; break;
            case Axis::kN: v = spec.base.num_users; break;
        }
        spec.values = {v};
    }
    spec.validate();
    return spec;
}

SweepSpec parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse_config(in);
}

ResultTable run_sweep(const SweepSpec& spec, uint64_t seed, uint32_t num_seeds,
                      const ProgressFn& progress, const RowSink& sink) {
    spec.validate();
    if (num_seeds < 1) throw std::invalid_argument("num_seeds must be >= 1");
    std::vector<CodedMode> modes;
    if (spec.coded == CodedMode::kBoth) {
        modes = {CodedMode::kUncoded, CodedMode::kRlim};
    } else {
        modes = {spec.coded};
    }

    ResultTable table;
    for (double value : spec.values) {
        ResultTable point_rows;
        for (CodedMode mode : modes) {
            for (uint32_t s = 0; s < num_seeds; ++s) {
                harness::ExperimentConfig cfg = spec.base;
                apply_axis(cfg, spec.axis, value);
                cfg.master_seed = seed + s;
                if (progress) {
                    progress(axis_name(spec.axis) + "=" + format_double(value) +
                             " coded=" + coded_mode_name(mode) +
                             " seed=" + std::to_string(cfg.master_seed));
                }
                auto result = mode == CodedMode::kRlim ? harness::run_rlim(cfg)
                                                       : harness::run_uncoded(cfg);
                for (const auto& out : result.outcomes) {
                    ResultRow row;
                    row.axis_value = value;
                    row.mechanism = ldp::mechanism_name(out.mechanism);
                    row.coded = coded_mode_name(mode);
                    row.seed = cfg.master_seed;
                    row.l1_mean = out.l1_mean;
                    row.tau_star = out.threshold;
                    row.t_s_m = out.slot_duration;
                    row.M_m = out.molecules;
                    row.l_m = out.wire_bits;
                    row.W_m = out.one_bits;
                    row.invalid_count = out.invalid_reports;
                    point_rows.push_back(std::move(row));
                }
            }
        }
        std::sort(point_rows.begin(), point_rows.end(), [](const ResultRow& a, const ResultRow& b) {
            if (auto ra = mechanism_rank(a.mechanism), rb = mechanism_rank(b.mechanism); ra != rb)
                return ra < rb;
            if (a.coded != b.coded) return a.coded < b.coded;  // "rlim" < "uncoded"
            return a.seed < b.seed;
        });
        for (auto& row : point_rows) {
            if (sink) sink(row);
            table.push_back(std::move(row));
        }
    }
    return table;
}

void write_csv(std::ostream& out, const ResultTable& table) {
    out << kCsvHeader << '\n';
    for (const auto& r : table) {
        out << format_double(r.axis_value) << ',' << r.mechanism << ',' << r.coded << ',' << r.seed
            << ',' << format_double(r.l1_mean) << ',' << r.tau_star << ','
            << format_double(r.t_s_m) << ',' << r.M_m << ',' << r.l_m << ',' << r.W_m << ','
            << r.invalid_count << '\n';
    }
}

ResultTable read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty CSV input");
    if (trim(line) != kCsvHeader) throw std::invalid_argument("unexpected CSV header");
    ResultTable table;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split(trim(line), ',');
        if (fields.size() != 11)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 11 fields");
        ResultRow r;
        r.axis_value = parse_number(fields[0], "axis_value");
        r.mechanism = fields[1];
        r.coded = fields[2];
        r.seed = parse_unsigned(fields[3], "seed");
        r.l1_mean = parse_number(fields[4], "l1_mean");
        r.tau_star = parse_unsigned(fields[5], "tau_star");
        r.t_s_m = parse_number(fields[6], "t_s_m");
        r.M_m = parse_unsigned(fields[7], "M_m");
        r.l_m = parse_unsigned(fields[8], "l_m");
        r.W_m = parse_unsigned(fields[9], "W_m");
        r.invalid_count = parse_unsigned(fields[10], "invalid_count");
        table.push_back(std::move(r));
    }
    return table;
}

void write_json(std::ostream& out, const ResultTable& table) {
    out << "[";
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& r = table[i];
        out << (i ? ",\n " : "\n ");
        out << "{\"axis_value\":" << format_double(r.axis_value) << ",\"mechanism\":\""
            << r.mechanism << "\",\"coded\":\"" << r.coded << "\",\"seed\":" << r.seed
            << ",\"l1_mean\":" << format_double(r.l1_mean) << ",\"tau_star\":" << r.tau_star
            << ",\"t_s_m\":" << format_double(r.t_s_m) << ",\"M_m\":" << r.M_m
            << ",\"l_m\":" << r.l_m << ",\"W_m\":" << r.W_m
            << ",\"invalid_count\":" << r.invalid_count << "}";
    }
    out << (table.empty() ? "]" : "\n]") << '\n';
}

ResultTable read_json(std::istream& in) {
    nlohmann::json doc = nlohmann::json::parse(in);
    if (!doc.is_array()) throw std::invalid_argument("JSON results must be an array");
    ResultTable table;
    for (const auto& item : doc) {
        ResultRow r;
        r.axis_value = item.at("axis_value").get<double>();
        r.mechanism = item.at("mechanism").get<std::string>();
        r.coded = item.at("coded").get<std::string>();
        r.seed = item.at("seed").get<uint64_t>();
        r.l1_mean = item.at("l1_mean").get<double>();
        r.tau_star = item.at("tau_star").get<uint64_t>();
        r.t_s_m = item.at("t_s_m").get<double>();
        r.M_m = item.at("M_m").get<uint64_t>();
        r.l_m = item.at("l_m").get<uint64_t>();
        r.W_m = item.at("W_m").get<uint64_t>();
        r.invalid_count = item.at("invalid_count").get<uint64_t>();
        table.push_back(std::move(r));
    }
    return table;
}

}  // namespace mcldp::sweep
