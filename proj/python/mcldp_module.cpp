#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <variant>

#include "mcldp/channel.hpp"
#include "mcldp/harness.hpp"
#include "mcldp/ldp.hpp"
#include "mcldp/rlim.hpp"
#include "mcldp/rng.hpp"
#include "mcldp/sweep.hpp"

namespace py = pybind11;
using namespace mcldp;

namespace {

std::string report_repr(const ldp::Report& report) {
    struct Visitor {
        std::string operator()(const ldp::KrrReport& r) {
            return "KrrReport(value=" + std::to_string(r.value) + ")";
        }
        std::string operator()(const ldp::UnaryReport& r) {
            std::string bits;
            for (uint8_t b : r.bits) bits += b ? '1' : '0';
            return "UnaryReport(bits=" + bits + ")";
        }
        std::string operator()(const ldp::BlhReport& r) {
            std::string h;
            for (uint8_t b : r.hash) h += b ? '1' : '0';
            return "BlhReport(hash=" + h + ", bit=" + std::to_string(int(r.bit)) + ")";
        }
        std::string operator()(const ldp::OlhReport& r) {
            std::string d;
            for (uint8_t x : r.digits) d += std::to_string(int(x));
            return "OlhReport(digits=" + d + ", value=" + std::to_string(r.value) + ")";
        }
        std::string operator()(const ldp::HrReport& r) {
            return "HrReport(value=" + std::to_string(r.value) + ")";
        }
    };
    return std::visit(Visitor{}, report);
}

}  // namespace

PYBIND11_MODULE(_mcldp, m) {
    m.doc() = "Locally private reporting over a diffusion-based molecular channel";

    py::class_<Rng>(m, "Rng")
        .def(py::init<uint64_t>(), py::arg("seed"))
        .def("next_u64", &Rng::next_u64)
        .def("next_double", &Rng::next_double);

    py::class_<channel::ChannelParams>(m, "ChannelParams")
        .def(py::init([](double D, double r_R, double r0, double t_s, uint32_t M, uint32_t I,
                         double sigma2) {
                 channel::ChannelParams p{D, r_R, r0, t_s, M, I, sigma2};
                 p.validate();
                 return p;
             }),
             py::arg("D") = 79.4, py::arg("r_R") = 5.0, py::arg("r0") = 10.0,
             py::arg("t_s") = 1.0, py::arg("M") = 1000, py::arg("I") = 200,
             py::arg("sigma2") = 0.0)
        .def_readwrite("D", &channel::ChannelParams::diffusion_coefficient)
        .def_readwrite("r_R", &channel::ChannelParams::receiver_radius)
        .def_readwrite("r0", &channel::ChannelParams::distance)
        .def_readwrite("t_s", &channel::ChannelParams::slot_duration)
        .def_readwrite("M", &channel::ChannelParams::molecules_per_one)
        .def_readwrite("I", &channel::ChannelParams::memory)
        .def_readwrite("sigma2", &channel::ChannelParams::noise_variance);

    m.def("hitting_probability", &channel::hitting_probability, py::arg("params"), py::arg("t"));
    m.def(
        "channel_coefficients",
        [](const channel::ChannelParams& p) { return channel::channel_coefficients(p).p; },
        py::arg("params"));
    m.def(
        "sample_emission",
        [](uint32_t M, const channel::ChannelParams& p, Rng& rng) {
            return channel::sample_emission(M, channel::channel_coefficients(p), rng);
        },
        py::arg("M"), py::arg("params"), py::arg("rng"));
    m.def(
        "transmit",
        [](const std::vector<uint8_t>& bits, const channel::ChannelParams& p, Rng& rng) {
            return channel::transmit(bits, p, rng);
        },
        py::arg("bits"), py::arg("params"), py::arg("rng"));
    m.def(
        "detect",
        [](const std::vector<uint32_t>& counts, uint32_t tau) {
            return channel::detect(counts, tau);
        },
        py::arg("counts"), py::arg("threshold"));
    m.def("calibrate_threshold_ber", &channel::calibrate_threshold_ber, py::arg("transmitted"),
          py::arg("counts"));

    py::enum_<ldp::Mechanism>(m, "Mechanism")
        .value("KRR", ldp::Mechanism::kKrr)
        .value("RAPPOR", ldp::Mechanism::kRappor)
        .value("OUE", ldp::Mechanism::kOue)
        .value("BLH", ldp::Mechanism::kBlh)
        .value("OLH", ldp::Mechanism::kOlh)
        .value("HR", ldp::Mechanism::kHr);

    py::class_<ldp::MechanismConfig>(m, "MechanismConfig")
        .def_static("make", &ldp::MechanismConfig::make, py::arg("mechanism"), py::arg("k"),
                    py::arg("epsilon"))
        .def_readonly("mechanism", &ldp::MechanismConfig::mechanism)
        .def_readonly("k", &ldp::MechanismConfig::domain_size)
        .def_readonly("epsilon", &ldp::MechanismConfig::epsilon)
        .def_readonly("p", &ldp::MechanismConfig::keep_prob)
        .def_readonly("q", &ldp::MechanismConfig::flip_prob)
        .def_readonly("g", &ldp::MechanismConfig::hash_alphabet)
        .def_readonly("m", &ldp::MechanismConfig::hash_digits)
        .def_readonly("d_blh", &ldp::MechanismConfig::hash_bits)
        .def_readonly("hadamard_K", &ldp::MechanismConfig::hadamard_bits)
        .def_readonly("hadamard_d", &ldp::MechanismConfig::hadamard_size)
        .def_readonly("report_bits", &ldp::MechanismConfig::report_bits)
        .def_readonly("index_space", &ldp::MechanismConfig::index_space);

    py::class_<ldp::KrrReport>(m, "KrrReport")
        .def(py::init<uint32_t>(), py::arg("value"))
        .def_readwrite("value", &ldp::KrrReport::value)
        .def("__repr__", [](const ldp::KrrReport& r) { return report_repr(ldp::Report{r}); });
    py::class_<ldp::UnaryReport>(m, "UnaryReport")
        .def(py::init<std::vector<uint8_t>>(), py::arg("bits"))
        .def_readwrite("bits", &ldp::UnaryReport::bits)
        .def("__repr__", [](const ldp::UnaryReport& r) { return report_repr(ldp::Report{r}); });
    py::class_<ldp::BlhReport>(m, "BlhReport")
        .def(py::init<std::vector<uint8_t>, uint8_t>(), py::arg("hash"), py::arg("bit"))
        .def_readwrite("hash", &ldp::BlhReport::hash)
        .def_readwrite("bit", &ldp::BlhReport::bit)
        .def("__repr__", [](const ldp::BlhReport& r) { return report_repr(ldp::Report{r}); });
    py::class_<ldp::OlhReport>(m, "OlhReport")
        .def(py::init<std::vector<uint8_t>, uint32_t>(), py::arg("digits"), py::arg("value"))
        .def_readwrite("digits", &ldp::OlhReport::digits)
        .def_readwrite("value", &ldp::OlhReport::value)
        .def("__repr__", [](const ldp::OlhReport& r) { return report_repr(ldp::Report{r}); });
    py::class_<ldp::HrReport>(m, "HrReport")
        .def(py::init<uint32_t>(), py::arg("value"))
        .def_readwrite("value", &ldp::HrReport::value)
        .def("__repr__", [](const ldp::HrReport& r) { return report_repr(ldp::Report{r}); });

    m.def("choose_olh_alphabet", &ldp::choose_olh_alphabet, py::arg("epsilon"));
    m.def("perturb", &ldp::perturb, py::arg("value"), py::arg("config"), py::arg("rng"));
    m.def(
        "estimate",
        [](const std::vector<ldp::Report>& reports, const ldp::MechanismConfig& cfg) {
            return ldp::estimate(reports, cfg);
        },
        py::arg("reports"), py::arg("config"));
    m.def("encode_report", &ldp::encode_report, py::arg("report"), py::arg("config"));
    m.def(
        "decode_report",
        [](const std::vector<uint8_t>& bits, const ldp::MechanismConfig& cfg) {
            return ldp::decode_report(bits, cfg);
        },
        py::arg("bits"), py::arg("config"));
    m.def("report_to_index", &ldp::report_to_index, py::arg("report"), py::arg("config"));
    m.def("index_to_report", &ldp::index_to_report, py::arg("index"), py::arg("config"));
    m.def("uniform_valid_report", &ldp::uniform_valid_report, py::arg("config"), py::arg("rng"));

    m.def("rll_count", &rlim::rll_count, py::arg("n"), py::arg("boundary_safe") = true);
    py::class_<rlim::Codebook>(m, "Codebook")
        .def_static("build", &rlim::Codebook::build, py::arg("size"),
                    py::arg("boundary_safe") = true)
        .def_property_readonly("n", &rlim::Codebook::word_bits)
        .def_property_readonly("boundary_safe", &rlim::Codebook::boundary_safe)
        .def("__len__", &rlim::Codebook::size)
        .def("word_bits", &rlim::Codebook::word_as_bits, py::arg("index"))
        .def("index_of", &rlim::Codebook::index_of, py::arg("word"))
        .def("dump", [](const rlim::Codebook& cb) {
            std::ostringstream out;
            cb.dump(out);
            return out.str();
        });
    m.def(
        "rlim_correct",
        [](const std::vector<uint8_t>& bits, bool boundary_safe) {
            return rlim::rlim_correct(bits, boundary_safe);
        },
        py::arg("bits"), py::arg("boundary_safe") = false);
    m.def(
        "rlim_decode",
        [](const std::vector<uint8_t>& bits, const rlim::Codebook& cb) {
            return rlim::rlim_decode(bits, cb);
        },
        py::arg("bits"), py::arg("codebook"));

    py::class_<harness::ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init([](const channel::ChannelParams& ch, std::vector<ldp::Mechanism> mechanisms,
                         uint32_t k, double epsilon, uint32_t N, uint32_t R, uint32_t pilot_users,
                         uint64_t master_seed, uint32_t threads) {
                 harness::ExperimentConfig cfg;
                 cfg.channel = ch;
                 if (!mechanisms.empty()) cfg.mechanisms = std::move(mechanisms);
                 cfg.domain_size = k;
                 cfg.epsilon = epsilon;
                 cfg.num_users = N;
                 cfg.num_dists = R;
                 cfg.pilot_users = pilot_users;
                 cfg.master_seed = master_seed;
                 cfg.threads = threads;
                 return cfg;
             }),
             py::arg("channel") = channel::ChannelParams{},
             py::arg("mechanisms") = std::vector<ldp::Mechanism>{}, py::arg("k") = 16,
             py::arg("epsilon") = 1.0, py::arg("N") = 2000, py::arg("R") = 20,
             py::arg("pilot_users") = 100, py::arg("master_seed") = 1, py::arg("threads") = 0)
        .def_readwrite("channel", &harness::ExperimentConfig::channel)
        .def_readwrite("mechanisms", &harness::ExperimentConfig::mechanisms)
        .def_readwrite("k", &harness::ExperimentConfig::domain_size)
        .def_readwrite("epsilon", &harness::ExperimentConfig::epsilon)
        .def_readwrite("N", &harness::ExperimentConfig::num_users)
        .def_readwrite("R", &harness::ExperimentConfig::num_dists)
        .def_readwrite("pilot_users", &harness::ExperimentConfig::pilot_users)
        .def_readwrite("master_seed", &harness::ExperimentConfig::master_seed)
        .def_readwrite("threads", &harness::ExperimentConfig::threads);

    py::class_<harness::MechanismOutcome>(m, "MechanismOutcome")
        .def_readonly("mechanism", &harness::MechanismOutcome::mechanism)
        .def_readonly("l1_mean", &harness::MechanismOutcome::l1_mean)
        .def_readonly("threshold", &harness::MechanismOutcome::threshold)
        .def_readonly("slot_duration", &harness::MechanismOutcome::slot_duration)
        .def_readonly("molecules", &harness::MechanismOutcome::molecules)
        .def_readonly("wire_bits", &harness::MechanismOutcome::wire_bits)
        .def_readonly("one_bits", &harness::MechanismOutcome::one_bits)
        .def_readonly("invalid_reports", &harness::MechanismOutcome::invalid_reports)
        .def("__repr__", [](const harness::MechanismOutcome& o) {
            return "MechanismOutcome(" + ldp::mechanism_name(o.mechanism) +
                   ", l1_mean=" + std::to_string(o.l1_mean) + ")";
        });

    m.def(
        "run_ideal",
        [](const harness::ExperimentConfig& cfg) { return harness::run_ideal(cfg).outcomes; },
        py::arg("config"));
    m.def(
        "run_uncoded",
        [](const harness::ExperimentConfig& cfg) { return harness::run_uncoded(cfg).outcomes; },
        py::arg("config"));
    m.def(
        "run_rlim",
        [](const harness::ExperimentConfig& cfg) { return harness::run_rlim(cfg).outcomes; },
        py::arg("config"));

    m.def("sample_simplex", &harness::sample_simplex, py::arg("k"), py::arg("rng"));
    m.def("l1_error", &harness::l1_error, py::arg("truth"), py::arg("estimate"));
}
