#pragma once

// Parameter sweeps over the model zoo. Rows are independent, so the hot
// path is an OpenMP-parallel loop; run_sweep_serial is the reference
// implementation kept for testing and benchmarking. Both produce bitwise
// identical results in grid order.

#include "epsense/model.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace epsense {

using ModelParams =
    std::variant<TwoRingParams, ThreeRingParams, SingleRingParams, MirrorRingParams>;

struct SweepGrid {
    double start = 0.0;
    double stop = 1.0;
    std::size_t points = 2;
    bool log_scale = false;
};

struct SweepSpec {
    ModelParams model;
    std::string parameter; // v | v1 | v2 | kappa | gamma | gamma_wg | rho | phi | omega | epsilon
    SweepGrid grid;
    std::vector<std::string> outputs; // i_max | i_avg | i_reduced | i_mod | xi |
                                      // bound_localized | bound_general | ldos | phase
    bool track_v_opt = false;         // two-ring: v follows |V|_opt(kappa)
};

struct SweepResult {
    std::vector<std::string> columns; // parameter, outputs..., at_pole
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;
};

void validate(const SweepSpec& spec);
std::vector<double> sweep_grid_values(const SweepGrid& grid);

SweepResult run_sweep(const SweepSpec& spec);
SweepResult run_sweep_serial(const SweepSpec& spec);

// '#'-prefixed metadata block, then a header row, then data rows with 17
// significant digits.
void write_csv(const SweepResult& r, std::ostream& os);
std::string to_json_string(const SweepResult& r);

// `key = value` lines with '#' comments.
SweepSpec parse_sweep_config(std::istream& is);

std::string model_name(const ModelParams& p);

} // namespace epsense
