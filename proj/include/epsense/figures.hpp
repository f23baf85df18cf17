#pragma once

// Canned data sets behind `epsense figure <id>`. Each returns a table in the
// same shape the sweep engine produces, so the CSV/JSON writers are shared.

#include "epsense/sweep.hpp"

#include <string>
#include <vector>

namespace epsense {

// Known ids: fig2, fig3, fig4a, fig4b, fig5, fig6. Throws Error otherwise.
SweepResult figure_data(const std::string& id);

std::vector<std::string> figure_ids();

} // namespace epsense
