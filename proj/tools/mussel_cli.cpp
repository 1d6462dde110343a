// mussel: command-line front end for the delayed mussel-algae analysis library.

#include "mussel/cli.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Common {
    std::string config;
    std::vector<std::string> sets;
    std::string out = "out";
    std::map<std::string, std::string> flags; // per-command numeric flags, applied last
};

void add_numeric(CLI::App* cmd, Common& c, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
        "--" + key, [&c, key](const std::string& v) { c.flags[key] = v; }, help);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delayed mussel-algae model: stability, Hopf/Turing analysis and simulation"};
    app.require_subcommand(1);

    struct Spec {
        mussel::Command command;
        const char* help;
        std::vector<std::pair<const char*, const char*>> numeric;
    };
    const std::vector<Spec> specs = {
        {mussel::Command::classify, "hypotheses, equilibria and delay-free stability verdicts",
         {{"n_scan", "highest Neumann mode scanned"}}},
        {mussel::Command::hopf_curve, "Hopf points in r over an alpha range (tau = 0)",
         {{"alpha_lo", "lower alpha"}, {"alpha_hi", "upper alpha"}, {"resolution", "alpha samples"}}},
        {mussel::Command::turing_curve, "Turing critical curve in the (alpha, r) plane",
         {{"alpha_lo", "lower alpha"}, {"alpha_hi", "upper alpha"}, {"resolution", "alpha samples"}}},
        {mussel::Command::tau_star, "critical delays and the first delay-induced Hopf point",
         {{"n_max", "highest mode scanned (-1: automatic)"}, {"j_max", "crossings per mode"}}},
        {mussel::Command::normal_form, "direction and stability of the bifurcating orbit", {}},
        {mussel::Command::simulate, "integrate the delayed reaction-diffusion system",
         {{"N", "grid intervals"}, {"dt", "requested time step"}, {"t_end", "final time"},
          {"sample_interval", "output spacing"}, {"amplitude", "initial cosine amplitude"},
          {"wave_number", "initial cosine wave number"}, {"transient", "discarded fraction"}}},
        {mussel::Command::sweep, "orbit amplitude over a range of r (ODE reduction)",
         {{"r_lo", "lower r"}, {"r_hi", "upper r"}, {"r_count", "number of r values"}, {"dt", "time step"},
          {"t_end", "final time"}, {"transient", "discarded fraction"}}},
        {mussel::Command::verify, "closed forms against independent oracles", {}},
    };

    std::vector<Common> commons(specs.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        auto* cmd = app.add_subcommand(mussel::to_string(specs[i].command), specs[i].help);
        auto& c = commons[i];
        cmd->add_option("--config", c.config, "key = value configuration file");
        cmd->add_option("--set", c.sets, "override key=value (repeatable)")->allow_extra_args(false);
        cmd->add_option("--out", c.out, "output directory")->capture_default_str();
        for (const auto& [key, help] : specs[i].numeric) add_numeric(cmd, c, key, help);
        subs.push_back(cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mussel::exit_usage;
    }

    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        const Common& c = commons[i];
        try {
            std::vector<std::string> overrides = c.sets;
            for (const auto& [k, v] : c.flags) overrides.push_back(k + "=" + v);
            const std::optional<std::filesystem::path> config =
                c.config.empty() ? std::nullopt : std::optional<std::filesystem::path>(c.config);
            const mussel::RunConfig cfg = mussel::load_config(specs[i].command, config, overrides, c.out);
            return mussel::run(cfg, std::cerr);
        } catch (const mussel::Error& e) {
            std::cerr << "error [" << mussel::to_string(e.kind()) << "]: " << e.what() << "\n";
            return mussel::exit_code_for(e.kind());
        }
    }
    return mussel::exit_usage;
}
