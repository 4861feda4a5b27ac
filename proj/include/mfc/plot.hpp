#pragma once

#include <string>
#include <vector>

namespace mfc {

// Renders one SVG line plot per numeric column of the CSV against its first
// column. A column named "<base>_ci95" is drawn as a shaded band around
// "<base>" instead of getting its own plot. Returns the produced paths.
std::vector<std::string> plot_csv(const std::string &csv_path,
                                  const std::string &out_dir);

} // namespace mfc
