#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mcldp/rlim.hpp"
#include "mcldp/sweep.hpp"

namespace {

std::string default_output_path(const std::string& format) {
    std::filesystem::path dir = ".";
    if (const char* env = std::getenv("MCLDP_OUT_DIR"); env && *env) dir = env;
    return (dir / ("results." + format)).string();
}

int run_command(const std::string& config_path, uint64_t seed, uint32_t num_seeds,
                const std::string& scale, const std::string& out_path, const std::string& format,
                const std::string& mechanisms, const std::string& coded, uint32_t threads) {
    auto spec = mcldp::sweep::parse_config_file(config_path);

    if (!scale.empty()) {
        // Explicit config-file settings win over the scale presets.
        if (scale == "desk") {
            if (!spec.explicit_keys.count("N")) spec.base.num_users = 2000;
            if (!spec.explicit_keys.count("R")) spec.base.num_dists = 20;
        } else if (scale == "paper") {
            if (!spec.explicit_keys.count("N")) spec.base.num_users = 10000;
            if (!spec.explicit_keys.count("R")) spec.base.num_dists = 100;
        }
    }
    if (!mechanisms.empty()) {
        std::istringstream probe("mechanisms = " + mechanisms + "\n");
        spec.base.mechanisms = mcldp::sweep::parse_config(probe).base.mechanisms;
    }
    if (!coded.empty()) {
        auto mode = mcldp::sweep::coded_mode_from_name(coded);
        if (!mode) {
            std::cerr << "unknown coded mode: " << coded << '\n';
            return 2;
        }
        spec.coded = *mode;
    }
    if (threads) spec.base.threads = threads;
    spec.validate();

    const std::string path = out_path.empty() ? default_output_path(format) : out_path;
    std::ofstream out(path);
    if (!out) {
        std::cerr << "cannot open output file: " << path << '\n';
        return 2;
    }

    mcldp::sweep::ResultTable table;
    auto progress = [](const std::string& msg) { std::cerr << "[mcldp] " << msg << '\n'; };

    if (format == "csv") {
        // Stream rows as they complete so interrupted sweeps keep partial results.
        out << "axis_value,mechanism,coded,seed,l1_mean,tau_star,t_s_m,M_m,l_m,W_m,invalid_count\n";
        out.flush();
        table = mcldp::sweep::run_sweep(spec, seed, num_seeds, progress,
                                        [&](const mcldp::sweep::ResultRow& row) {
                                            mcldp::sweep::ResultTable one{row};
                                            std::ostringstream tmp;
                                            mcldp::sweep::write_csv(tmp, one);
                                            auto text = tmp.str();
                                            out << text.substr(text.find('\n') + 1);
                                            out.flush();
                                        });
    } else {
        table = mcldp::sweep::run_sweep(spec, seed, num_seeds, progress);
        mcldp::sweep::write_json(out, table);
    }
    std::cerr << "[mcldp] wrote " << table.size() << " rows to " << path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte-Carlo simulator for privatized reports over a diffusion channel"};
    app.require_subcommand(1);

    std::string config_path;
    uint64_t seed = 1;
    uint32_t num_seeds = 1;
    std::string scale;
    std::string out_path;
    std::string format = "csv";
    std::string mechanisms;
    std::string coded;
    uint32_t threads = 0;

    auto* run = app.add_subcommand("run", "run a sweep described by a config file");
    run->add_option("config", config_path, "key = value config file")->required();
    run->add_option("--seed", seed, "first master seed (default 1)");
    run->add_option("--seeds", num_seeds, "number of consecutive master seeds (default 1)");
    run->add_option("--scale", scale, "population preset: desk (N=2000, R=20) or paper (N=10000, R=100)")
        ->check(CLI::IsMember({"desk", "paper"}));
    run->add_option("--out", out_path, "output path (default $MCLDP_OUT_DIR/results.<format>)");
    run->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--mechanisms", mechanisms, "comma-separated mechanism subset");
    run->add_option("--coded", coded, "coding mode: uncoded, rlim or both");
    run->add_option("--threads", threads, "worker threads (0 = hardware)");

    uint64_t book_size = 16;
    bool unsafe_tail = false;
    std::string book_out;
    auto* book = app.add_subcommand("codebook", "print a run-length-limited codebook");
    book->add_option("--size", book_size, "number of codewords")->required();
    book->add_flag("--unsafe-tail", unsafe_tail, "allow 1-bits in the last two positions");
    book->add_option("--out", book_out, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return run_command(config_path, seed, num_seeds, scale, out_path, format, mechanisms,
                               coded, threads);
        if (book->parsed()) {
            auto cb = mcldp::rlim::Codebook::build(book_size, !unsafe_tail);
            if (book_out.empty()) {
                cb.dump(std::cout);
            } else {
                std::ofstream out(book_out);
                if (!out) {
                    std::cerr << "cannot open output file: " << book_out << '\n';
                    return 2;
                }
                cb.dump(out);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
