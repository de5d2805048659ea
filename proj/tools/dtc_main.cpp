#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dtc/lattice.hpp"
#include "dtc/runner.hpp"
#include "dtc/statevector.hpp"

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> backend;
    std::optional<std::size_t> chi_max;
    std::optional<std::string> out;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Disorder and sampling seed");
    cmd->add_option("--backend", o.backend, "exact or mps")->check(CLI::IsMember({"exact", "mps"}));
    cmd->add_option("--chi-max", o.chi_max, "MPS bond-dimension cap")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "Output directory");
}

dtc::RunConfig resolve(const std::string& path, const Overrides& o) {
    dtc::RunConfig c = dtc::load_config(path);
    if (o.seed) c.seed = *o.seed;
    if (o.backend) c.backend.kind = *o.backend == "exact" ? dtc::BackendKind::Exact : dtc::BackendKind::Mps;
    if (o.chi_max) c.backend.policy.chi_max = *o.chi_max;
    if (o.out) c.output_dir = *o.out;
    dtc::validate(c);
    return c;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kicked-XXZ Floquet circuits on heavy-hex lattices"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;

    auto* simulate = app.add_subcommand("simulate", "Evolve every grid point and write per-point results");
    simulate->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    add_overrides(simulate, ov);

    auto* phase = app.add_subcommand("phase-diagram", "Delta_MBL and Delta_DTC over the (epsilon, phi) grid");
    phase->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    add_overrides(phase, ov);

    std::string raw, reference, small_target, small_reference;
    auto* recover = app.add_subcommand("recover", "Recover Delta and chi from a measured series");
    recover->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    recover->add_option("--raw", raw, "CSV of the measured target series")->required()->check(CLI::ExistingFile);
    recover->add_option("--reference", reference, "CSV measured at the Clifford reference")->check(CLI::ExistingFile);
    recover->add_option("--small-target", small_target, "CSV of the small system at the target")
        ->check(CLI::ExistingFile);
    recover->add_option("--small-reference", small_reference, "CSV of the small system at the reference")
        ->check(CLI::ExistingFile);
    add_overrides(recover, ov);

    std::size_t rows = 1, cols = 1;
    std::string lattice_out;
    auto* lattice = app.add_subcommand("export-lattice", "Print the lattice graph and layer coloring as JSON");
    lattice->add_option("--rows", rows, "Hexagon rows")->check(CLI::PositiveNumber);
    lattice->add_option("--cols", cols, "Hexagon columns")->check(CLI::PositiveNumber);
    lattice->add_option("--out", lattice_out, "Output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            dtc::run_simulate(resolve(config_path, ov));
        } else if (phase->parsed()) {
            const auto c = resolve(config_path, ov);
            std::filesystem::create_directories(c.output_dir);
            write_json(c.output_dir / "config.resolved", dtc::config_to_json(c));
            write_json(c.output_dir / "phase_diagram.json", dtc::phase_diagram_to_json(dtc::run_phase_diagram(c)));
        } else if (recover->parsed()) {
            const auto c = resolve(config_path, ov);
            dtc::MeasuredInputs in;
            in.target = dtc::read_channels_csv(raw);
            if (!reference.empty()) in.reference = dtc::read_channels_csv(reference);
            if (!small_target.empty()) in.small_target = dtc::read_channels_csv(small_target);
            if (!small_reference.empty()) in.small_reference = dtc::read_channels_csv(small_reference);
            const auto rep = dtc::recover_measured(c, in);
            std::filesystem::create_directories(c.output_dir);
            write_json(c.output_dir / "config.resolved", dtc::config_to_json(c));
            write_json(c.output_dir / "recovery_report.json", dtc::recovery_to_json(rep));
            std::ofstream os(c.output_dir / "recovered.csv");
            os << "t,delta_recovered,chi_recovered,flagged\n";
            os.precision(17);
            for (std::size_t t = 0; t < rep.delta.values.size(); ++t) {
                const bool chi_flag = t < rep.chi_nn.flagged.size() && rep.chi_nn.flagged[t];
                const double chi = t < rep.chi_nn.values.size() ? rep.chi_nn.values[t] : std::nan("");
                os << t << ',' << rep.delta.values[t] << ',' << chi << ',' << ((rep.delta.flagged[t] || chi_flag) ? 1 : 0)
                   << "\n";
            }
        } else if (lattice->parsed()) {
            const auto j = dtc::lattice_to_json(dtc::build_lattice(rows, cols)).dump(2);
            if (lattice_out.empty()) {
                std::cout << j << "\n";
            } else {
                std::ofstream os(lattice_out);
                os << j << "\n";
            }
        }
    } catch (const dtc::CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
