#include "epsense/sweep.hpp"
#include "epsense/errors.hpp"
#include "epsense/qfi.hpp"
#include "epsense/spectral.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace epsense {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kKnownOutputs = {
    "i_max", "i_avg", "i_reduced", "i_mod", "xi",
    "bound_localized", "bound_general", "ldos", "phase"};

const std::vector<std::string> kKnownParameters = {
    "v", "v1", "v2", "kappa", "gamma", "gamma_wg", "rho", "phi", "omega", "epsilon"};

ModelParams with_parameter(const ModelParams& base, const std::string& name, double value) {
    ModelParams p = base;
    std::visit(
        [&](auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, TwoRingParams>) {
                if (name == "v") { m.v = value; return; }
                if (name == "kappa") { m.kappa = value; return; }
                if (name == "gamma") { m.gamma = value; return; }
            } else if constexpr (std::is_same_v<T, ThreeRingParams>) {
                if (name == "v1") { m.v1 = value; return; }
                if (name == "v2") { m.v2 = value; return; }
                if (name == "kappa") { m.kappa = value; return; }
                if (name == "gamma") { m.gamma = value; return; }
            } else if constexpr (std::is_same_v<T, SingleRingParams>) {
                if (name == "gamma_wg") { m.gamma_wg = value; return; }
                if (name == "kappa") { m.kappa = value; return; }
            } else {
                if (name == "rho") { m.rho = value; return; }
                if (name == "phi") { m.phi = value; return; }
                if (name == "gamma") { m.gamma = value; return; }
            }
            if (name != "omega" && name != "epsilon")
                throw Error("sweep: parameter '" + name + "' does not apply to this model");
        },
        p);
    return p;
}

std::pair<ScatteringModel, Perturbation> build(const ModelParams& p) {
    return std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, TwoRingParams>) return build_two_ring(m);
            else if constexpr (std::is_same_v<T, ThreeRingParams>) return build_three_ring(m);
            else if constexpr (std::is_same_v<T, SingleRingParams>) return build_single_ring(m);
            else return build_mirror_ring(m);
        },
        p);
}

double output_xi(const CMat& heff, double omega) {
    const KatoDecomposition kd = kato_decompose(heff);
    // Highest-order cluster; ties broken by distance to the probe frequency.
    std::size_t best = 0;
    for (std::size_t c = 1; c < kd.clusters.size(); ++c) {
        const auto& cand = kd.clusters[c];
        const auto& cur = kd.clusters[best];
        if (cand.order > cur.order ||
            (cand.order == cur.order &&
             std::abs(cplx(omega, 0.0) - cand.omega) < std::abs(cplx(omega, 0.0) - cur.omega)))
            best = c;
    }
    return spectral_response_strength(kd, best);
}

std::vector<double> evaluate_row(const SweepSpec& spec, double x) {
    double omega = 0.0;
    double epsilon = 0.0;
    ModelParams params = spec.model;
    if (spec.parameter == "omega") omega = x;
    else if (spec.parameter == "epsilon") epsilon = x;
    else params = with_parameter(spec.model, spec.parameter, x);

    if (spec.track_v_opt) {
        auto* tr = std::get_if<TwoRingParams>(&params);
        if (!tr) throw Error("sweep: track_v_opt requires the two-ring model");
        tr->v = std::sqrt((tr->gamma + tr->kappa) * tr->kappa / 4.0);
    }

    std::vector<double> row;
    row.reserve(spec.outputs.size() + 2);
    row.push_back(x);
    try {
        auto [m, pert] = build(params);
        if (epsilon != 0.0) m.h_sys = m.h_sys + cplx(epsilon, 0.0) * pert.h1;
        const CMat heff = effective_hamiltonian(m);
        for (const auto& out : spec.outputs) {
            if (out == "i_max") {
                row.push_back(qfi_max(m, pert, omega).value);
            } else if (out == "i_avg") {
                row.push_back(qfi_average(m, pert, omega));
            } else if (out == "i_reduced") {
                if (!pert.localized_site) { row.push_back(kNaN); continue; }
                const std::size_t ch = m.observed_channels.front();
                row.push_back(reduced_qfi(m, pert, omega, ch, ch));
            } else if (out == "i_mod") {
                if (m.n_modes == 2 && m.n_channels() == 1)
                    row.push_back(decay_modified_qfi(m, pert, omega));
                else
                    row.push_back(kNaN);
            } else if (out == "xi") {
                row.push_back(output_xi(heff, omega));
            } else if (out == "bound_localized" || out == "bound_general") {
                const KatoDecomposition kd = kato_decompose(heff);
                double bestv = 0.0;
                for (std::size_t c = 0; c < kd.clusters.size(); ++c)
                    bestv = std::max(bestv, out == "bound_localized"
                                                ? qfi_bound_localized(kd, c, omega)
                                                : qfi_bound_general(m, pert, kd, c, omega));
                row.push_back(bestv);
            } else if (out == "ldos") {
                if (!pert.localized_site) { row.push_back(kNaN); continue; }
                row.push_back(ldos(m, *pert.localized_site, omega).rho);
            } else if (out == "phase") {
                if (m.n_channels() != 1) { row.push_back(kNaN); continue; }
                row.push_back(std::arg(scattering_matrix(m, omega)(0, 0)));
            } else {
                throw Error("sweep: unknown output '" + out + "'");
            }
        }
        row.push_back(0.0); // at_pole
    } catch (const AtPole&) {
        row.resize(1);
        row.insert(row.end(), spec.outputs.size(), kNaN);
        row.push_back(1.0);
    }
    return row;
}

void append_metadata(const SweepSpec& spec, SweepResult& r) {
    r.metadata.emplace_back("artifact", "epsense 1.0");
    r.metadata.emplace_back("units", "omega_0 = 0, per-unit-photon-flux QFI");
    r.metadata.emplace_back("model", model_name(spec.model));
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            auto num = [](double v) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", v);
                return std::string(buf);
            };
            if constexpr (std::is_same_v<T, TwoRingParams>) {
                r.metadata.emplace_back("gamma", num(m.gamma));
                r.metadata.emplace_back("v", num(std::abs(m.v)));
                r.metadata.emplace_back("kappa", num(m.kappa));
            } else if constexpr (std::is_same_v<T, ThreeRingParams>) {
                r.metadata.emplace_back("gamma", num(m.gamma));
                r.metadata.emplace_back("v1", num(std::abs(m.v1)));
                r.metadata.emplace_back("v2", num(std::abs(m.v2)));
                r.metadata.emplace_back("kappa", num(m.kappa));
            } else if constexpr (std::is_same_v<T, SingleRingParams>) {
                r.metadata.emplace_back("gamma_wg", num(m.gamma_wg));
                r.metadata.emplace_back("kappa", num(m.kappa));
            } else {
                r.metadata.emplace_back("gamma", num(m.gamma));
                r.metadata.emplace_back("rho", num(m.rho));
                r.metadata.emplace_back("phi", num(m.phi));
            }
        },
        spec.model);
    r.metadata.emplace_back("parameter", spec.parameter);
    r.metadata.emplace_back("seed", std::to_string(power_iteration_seed()));
}

} // namespace

std::string model_name(const ModelParams& p) {
    switch (p.index()) {
        case 0: return "two-ring";
        case 1: return "three-ring";
        case 2: return "single-ring";
        default: return "mirror-ring";
    }
}

void validate(const SweepSpec& spec) {
    if (spec.grid.points < 2) throw Error("sweep: need at least 2 grid points");
    if (!(spec.grid.start < spec.grid.stop)) throw Error("sweep: need start < stop");
    if (spec.grid.log_scale && spec.grid.start <= 0.0)
        throw Error("sweep: log scale requires start > 0");
    if (std::find(kKnownParameters.begin(), kKnownParameters.end(), spec.parameter) ==
        kKnownParameters.end())
        throw Error("sweep: unknown parameter '" + spec.parameter + "'");
    if (spec.outputs.empty()) throw Error("sweep: no outputs requested");
    for (const auto& o : spec.outputs)
        if (std::find(kKnownOutputs.begin(), kKnownOutputs.end(), o) == kKnownOutputs.end())
            throw Error("sweep: unknown output '" + o + "'");
}

std::vector<double> sweep_grid_values(const SweepGrid& grid) {
    std::vector<double> xs(grid.points);
    const double n1 = static_cast<double>(grid.points - 1);
    for (std::size_t i = 0; i < grid.points; ++i) {
        const double t = static_cast<double>(i) / n1;
        xs[i] = grid.log_scale
                    ? grid.start * std::pow(grid.stop / grid.start, t)
                    : grid.start + (grid.stop - grid.start) * t;
    }
    return xs;
}

SweepResult run_sweep_serial(const SweepSpec& spec) {
    validate(spec);
    SweepResult r;
    r.columns.push_back(spec.parameter);
    for (const auto& o : spec.outputs) r.columns.push_back(o);
    r.columns.push_back("at_pole");
    append_metadata(spec, r);

    const std::vector<double> xs = sweep_grid_values(spec.grid);
    r.rows.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) r.rows[i] = evaluate_row(spec, xs[i]);
    return r;
}

SweepResult run_sweep(const SweepSpec& spec) {
    validate(spec);
    SweepResult r;
    r.columns.push_back(spec.parameter);
    for (const auto& o : spec.outputs) r.columns.push_back(o);
    r.columns.push_back("at_pole");
    append_metadata(spec, r);

    const std::vector<double> xs = sweep_grid_values(spec.grid);
    r.rows.resize(xs.size());
    const std::int64_t n = static_cast<std::int64_t>(xs.size());
    std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            r.rows[static_cast<std::size_t>(i)] = evaluate_row(spec, xs[static_cast<std::size_t>(i)]);
        } catch (...) {
            // exceptions must not escape the parallel region; rethrow after
#pragma omp critical(epsense_sweep_error)
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return r;
}

void write_csv(const SweepResult& r, std::ostream& os) {
    for (const auto& [k, v] : r.metadata) os << "# " << k << " = " << v << "\n";
    for (std::size_t i = 0; i < r.columns.size(); ++i)
        os << r.columns[i] << (i + 1 < r.columns.size() ? "," : "\n");
    char buf[40];
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            os << buf << (i + 1 < row.size() ? "," : "\n");
        }
    }
}

std::string to_json_string(const SweepResult& r) {
    nlohmann::json j;
    for (const auto& [k, v] : r.metadata) j["metadata"][k] = v;
    j["columns"] = r.columns;
    auto& rows = j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json jr = nlohmann::json::array();
        for (double v : row) {
            if (std::isnan(v)) jr.push_back(nullptr);
            else jr.push_back(v);
        }
        rows.push_back(std::move(jr));
    }
    return j.dump(2);
}

SweepSpec parse_sweep_config(std::istream& is) {
    SweepSpec spec;
    std::string model = "two-ring";
    double gamma = 1.0, v = 0.25, v1 = 0.0, v2 = 0.0, kappa = 0.0;
    double rho = 0.0, phi = 0.0, gamma_wg = 0.5;
    bool v_opt = false;
    spec.grid = {0.05, 0.6, 111, false};

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        auto numval = [&] {
            try {
                std::size_t pos = 0;
                const double d = std::stod(val, &pos);
                if (pos != val.size()) throw std::invalid_argument(val);
                return d;
            } catch (const std::exception&) {
                throw Error("config line " + std::to_string(lineno) + ": bad number '" + val + "'");
            }
        };
        if (key == "model") model = val;
        else if (key == "gamma") gamma = numval();
        else if (key == "v") { if (val == "opt") v_opt = true; else v = numval(); }
        else if (key == "v1") v1 = numval();
        else if (key == "v2") v2 = numval();
        else if (key == "kappa") kappa = numval();
        else if (key == "rho") rho = numval();
        else if (key == "phi") phi = numval();
        else if (key == "gamma_wg") gamma_wg = numval();
        else if (key == "parameter") spec.parameter = val;
        else if (key == "start") spec.grid.start = numval();
        else if (key == "stop") spec.grid.stop = numval();
        else if (key == "points") spec.grid.points = static_cast<std::size_t>(numval());
        else if (key == "scale") {
            if (val == "log") spec.grid.log_scale = true;
            else if (val == "linear") spec.grid.log_scale = false;
            else throw Error("config line " + std::to_string(lineno) + ": scale must be linear|log");
        } else if (key == "outputs") {
            spec.outputs.clear();
            std::stringstream ss(val);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (!item.empty()) spec.outputs.push_back(item);
            }
        } else {
            throw Error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }

    if (model == "two-ring") spec.model = TwoRingParams{gamma, v, kappa};
    else if (model == "three-ring") spec.model = ThreeRingParams{gamma, v1, v2, kappa};
    else if (model == "single-ring") spec.model = SingleRingParams{gamma_wg, kappa};
    else if (model == "mirror-ring") spec.model = MirrorRingParams{gamma, rho, phi};
    else throw Error("config: unknown model '" + model + "'");
    spec.track_v_opt = v_opt;
    if (spec.outputs.empty()) spec.outputs = {"i_max"};
    if (spec.parameter.empty()) spec.parameter = "v";
    validate(spec);
    return spec;
}

} // namespace epsense
