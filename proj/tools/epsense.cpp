// epsense: QFI limits for non-Hermitian scattering sensors.
//
//   epsense report <model> [flags]   single-point JSON report at --omega
//   epsense sweep  --spec <file> | [flags]
//   epsense figure <id> --out <path>
//
// Exit codes: 0 success, 2 usage, 3 frequency at a pole, 4 I/O failure.

#include "epsense/errors.hpp"
#include "epsense/figures.hpp"
#include "epsense/model.hpp"
#include "epsense/qfi.hpp"
#include "epsense/spectral.hpp"
#include "epsense/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;
using namespace epsense;

struct ModelFlags {
    double gamma = 1.0;
    double v = 0.25;
    double v1 = std::sqrt(2.0) / (3.0 * std::sqrt(3.0));
    double v2 = 1.0 / (6.0 * std::sqrt(3.0));
    double kappa = 0.0;
    double rho = 0.0;
    double phi = 0.0;
    double gamma_wg = 0.5;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
    cmd->add_option("--gamma", f.gamma, "Waveguide coupling strength");
    cmd->add_option("--v", f.v, "Intercavity coupling (two-ring)");
    cmd->add_option("--v1", f.v1, "First coupling (three-ring)");
    cmd->add_option("--v2", f.v2, "Second coupling (three-ring)");
    cmd->add_option("--kappa", f.kappa, "Internal loss rate per cavity");
    cmd->add_option("--rho", f.rho, "Mirror reflection coefficient");
    cmd->add_option("--phi", f.phi, "Ring-to-mirror propagation phase");
    cmd->add_option("--gamma-wg", f.gamma_wg, "Waveguide coupling (single-ring)");
}

ModelParams to_params(const std::string& model, const ModelFlags& f) {
    if (model == "two-ring") return TwoRingParams{f.gamma, f.v, f.kappa};
    if (model == "three-ring") return ThreeRingParams{f.gamma, f.v1, f.v2, f.kappa};
    if (model == "single-ring") return SingleRingParams{f.gamma_wg, f.kappa};
    if (model == "mirror-ring") return MirrorRingParams{f.gamma, f.rho, f.phi};
    throw CLI::ValidationError("model", "unknown model '" + model + "'");
}

std::pair<ScatteringModel, Perturbation> build_model(const ModelParams& p) {
    if (const auto* t = std::get_if<TwoRingParams>(&p)) return build_two_ring(*t);
    if (const auto* t = std::get_if<ThreeRingParams>(&p)) return build_three_ring(*t);
    if (const auto* t = std::get_if<SingleRingParams>(&p)) return build_single_ring(*t);
    return build_mirror_ring(std::get<MirrorRingParams>(p));
}

// Normalization used for the dimensionless outputs; the single-ring reports
// in units of gamma = 2 gamma_wg so that it is comparable to the other setups.
double gamma_scale(const ModelParams& p) {
    if (const auto* t = std::get_if<TwoRingParams>(&p)) return t->gamma;
    if (const auto* t = std::get_if<ThreeRingParams>(&p)) return t->gamma;
    if (const auto* t = std::get_if<SingleRingParams>(&p)) return 2.0 * t->gamma_wg;
    return std::get<MirrorRingParams>(p).gamma;
}

json params_json(const ModelParams& p) {
    json j;
    if (const auto* t = std::get_if<TwoRingParams>(&p)) {
        j["gamma"] = t->gamma;
        j["v"] = std::abs(t->v);
        j["kappa"] = t->kappa;
    } else if (const auto* t = std::get_if<ThreeRingParams>(&p)) {
        j["gamma"] = t->gamma;
        j["v1"] = std::abs(t->v1);
        j["v2"] = std::abs(t->v2);
        j["kappa"] = t->kappa;
    } else if (const auto* t = std::get_if<SingleRingParams>(&p)) {
        j["gamma_wg"] = t->gamma_wg;
        j["kappa"] = t->kappa;
    } else {
        const auto& m = std::get<MirrorRingParams>(p);
        j["gamma"] = m.gamma;
        j["rho"] = m.rho;
        j["phi"] = m.phi;
    }
    return j;
}

int write_text(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream os(out);
    if (!os) {
        std::cerr << "epsense: cannot open '" << out << "' for writing\n";
        return 4;
    }
    os << text;
    if (!os.good()) {
        std::cerr << "epsense: write to '" << out << "' failed\n";
        return 4;
    }
    return 0;
}

int run_report(const std::string& model, const ModelFlags& f, double omega,
               const std::string& out) {
    const ModelParams params = to_params(model, f);
    auto [m, pert] = build_model(params);
    validate(m);
    const double g = gamma_scale(params);
    const double g2 = g * g;

    const QfiEvaluation ev = evaluate(m, pert, omega);
    const CMat heff = effective_hamiltonian(m);
    const KatoDecomposition kd = kato_decompose(heff);

    // Highest-order cluster, nearest to the probe frequency on a tie.
    std::size_t best = 0;
    for (std::size_t c = 1; c < kd.clusters.size(); ++c) {
        const auto& a = kd.clusters[c];
        const auto& b = kd.clusters[best];
        if (a.order > b.order ||
            (a.order == b.order &&
             std::abs(cplx(omega, 0.0) - a.omega) < std::abs(cplx(omega, 0.0) - b.omega)))
            best = c;
    }
    const auto& bc = kd.clusters[best];
    const double xi = spectral_response_strength(kd, best);

    json j;
    j["model"] = model;
    j["parameters"] = params_json(params);
    j["omega"] = omega;
    j["gamma_scale"] = g;
    j["i_max_gamma2"] = g2 * ev.i_max;
    j["i_avg_gamma2"] = g2 * ev.i_avg;
    if (ev.i_reduced)
        j["i_reduced_gamma2"] = g2 * *ev.i_reduced;
    else
        j["i_reduced_gamma2"] = nullptr;
    j["xi"] = xi;
    j["bound_localized"] = g2 * ev.bounds.localized;
    j["bound_general"] = g2 * ev.bounds.general;

    json res = json::array();
    for (const auto& c : kd.clusters) {
        json rj;
        rj["omega_re"] = c.omega.real();
        rj["omega_im"] = c.omega.imag();
        rj["order"] = c.order;
        rj["is_ep"] = c.is_ep;
        rj["decay_rate"] = std::abs(c.omega.imag());
        if (c.order == 1) {
            try {
                const Eigensystem es = eig(heff);
                std::size_t mi = 0;
                for (std::size_t i = 1; i < es.values.size(); ++i)
                    if (std::abs(es.values[i] - c.omega) < std::abs(es.values[mi] - c.omega))
                        mi = i;
                rj["petermann"] = petermann_factor(heff, mi);
            } catch (const NearDefective&) {
                rj["petermann"] = nullptr;
            }
        } else {
            rj["petermann"] = nullptr;
        }
        res.push_back(std::move(rj));
    }
    j["resonances"] = std::move(res);

    if (bc.order >= 2 && bc.is_ep && bc.omega.imag() != 0.0)
        j["enhancement_factor"] =
            enhancement_factor(xi, std::abs(bc.omega.imag()), bc.order);
    else
        j["enhancement_factor"] = nullptr;

    return write_text(out, j.dump(2) + "\n");
}

int run_sweep_cmd(const std::string& spec_file, const std::string& model, const ModelFlags& f,
                  const std::string& parameter, double start, double stop,
                  std::size_t points, const std::string& scale, const std::string& outputs,
                  bool track_v_opt, const std::string& format, const std::string& out) {
    SweepSpec spec;
    if (!spec_file.empty()) {
        std::ifstream is(spec_file);
        if (!is) {
            std::cerr << "epsense: cannot read '" << spec_file << "'\n";
            return 4;
        }
        spec = parse_sweep_config(is);
    } else {
        spec.model = to_params(model, f);
        spec.parameter = parameter;
        spec.grid.start = start;
        spec.grid.stop = stop;
        spec.grid.points = points;
        spec.grid.log_scale = (scale == "log");
        std::stringstream ss(outputs);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) spec.outputs.push_back(item);
        spec.track_v_opt = track_v_opt;
    }
    const SweepResult r = run_sweep(spec);
    if (format == "json") return write_text(out, to_json_string(r) + "\n");
    std::ostringstream os;
    write_csv(r, os);
    return write_text(out, os.str());
}

int run_figure(const std::string& id, const std::string& format, const std::string& out) {
    const SweepResult r = figure_data(id);
    if (format == "json") return write_text(out, to_json_string(r) + "\n");
    std::ostringstream os;
    write_csv(r, os);
    return write_text(out, os.str());
}

} // namespace

int main(int argc, char** argv) {
    if (const char* seed = std::getenv("EPSENSE_SEED")) {
        try {
            set_power_iteration_seed(std::stoull(seed));
        } catch (const std::exception&) {
            std::cerr << "epsense: EPSENSE_SEED must be an unsigned integer\n";
            return 2;
        }
    }

    CLI::App app{"QFI limits for non-Hermitian scattering sensors"};
    app.require_subcommand(1);

    std::string model = "two-ring", out, format = "csv";
    double omega = 0.0;
    ModelFlags flags;

    auto* report = app.add_subcommand("report", "Single-point QFI report (JSON)");
    report->add_option("model", model, "two-ring|three-ring|single-ring|mirror-ring")
        ->required();
    add_model_flags(report, flags);
    report->add_option("--omega", omega, "Probe frequency");
    report->add_option("--out", out, "Output path (default stdout)");

    std::string spec_file, parameter = "v", scale = "linear", outputs = "i_max";
    double start = 0.05, stop = 0.6;
    std::size_t points = 111;
    bool track_v_opt = false;

    auto* sweep = app.add_subcommand("sweep", "Parameter sweep (CSV/JSON)");
    sweep->add_option("--spec", spec_file, "Sweep config file (key = value lines)");
    sweep->add_option("model", model, "Model when no --spec is given");
    add_model_flags(sweep, flags);
    sweep->add_option("--parameter", parameter, "Swept parameter name");
    sweep->add_option("--start", start, "Grid start");
    sweep->add_option("--stop", stop, "Grid stop");
    sweep->add_option("--points", points, "Grid points");
    sweep->add_option("--scale", scale, "linear|log");
    sweep->add_option("--outputs", outputs, "Comma-separated output columns");
    sweep->add_flag("--track-v-opt", track_v_opt, "Two-ring: v follows |V|_opt(kappa)");
    sweep->add_option("--format", format, "csv|json");
    sweep->add_option("--out", out, "Output path (default stdout)");

    std::string fig_id;
    auto* figure = app.add_subcommand("figure", "Emit a canned figure data set");
    figure->add_option("id", fig_id, "fig2|fig3|fig4a|fig4b|fig5|fig6")->required();
    figure->add_option("--format", format, "csv|json");
    figure->add_option("--out", out, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (report->parsed()) return run_report(model, flags, omega, out);
        if (sweep->parsed())
            return run_sweep_cmd(spec_file, model, flags, parameter, start, stop, points,
                                 scale, outputs, track_v_opt, format, out);
        return run_figure(fig_id, format, out);
    } catch (const AtPole& e) {
        std::cerr << "epsense: " << e.what() << "\n";
        return 3;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "epsense: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "epsense: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "epsense: " << e.what() << "\n";
        return 1;
    }
}
