#include "mfc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mfc/csv.hpp"
#include "mfc/manifest.hpp"

namespace mfc {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 50.0;

struct AxisMap {
  double lo, hi, pix_lo, pix_hi;
  double operator()(double v) const {
    if (hi == lo)
      return 0.5 * (pix_lo + pix_hi);
    return pix_lo + (v - lo) / (hi - lo) * (pix_hi - pix_lo);
  }
};

std::string trim_number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void render_svg(const std::string &path, const std::string &title,
                const std::string &xlabel, const std::string &ylabel,
                const std::vector<double> &x, const std::vector<double> &y,
                const std::vector<double> &band) {
  double xlo = *std::min_element(x.begin(), x.end());
  double xhi = *std::max_element(x.begin(), x.end());
  double ylo = y[0], yhi = y[0];
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double pad = band.empty() ? 0.0 : band[i];
    ylo = std::min(ylo, y[i] - pad);
    yhi = std::max(yhi, y[i] + pad);
  }
  if (ylo == yhi) {
    ylo -= 1.0;
    yhi += 1.0;
  }

  const AxisMap mx{xlo, xhi, kMarginLeft, kWidth - kMarginRight};
  const AxisMap my{ylo, yhi, kHeight - kMarginBottom, kMarginTop};

  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw std::runtime_error("plot: cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // axes
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop
      << "\" x2=\"" << kMarginLeft << "\" y2=\"" << kHeight - kMarginBottom
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kHeight - kMarginBottom
      << "\" x2=\"" << kWidth - kMarginRight << "\" y2=\""
      << kHeight - kMarginBottom << "\" stroke=\"black\"/>\n";

  // ticks
  for (int k = 0; k <= 4; ++k) {
    const double fx = xlo + (xhi - xlo) * k / 4.0;
    const double fy = ylo + (yhi - ylo) * k / 4.0;
    out << "<text x=\"" << mx(fx) << "\" y=\"" << kHeight - kMarginBottom + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << trim_number(fx)
        << "</text>\n";
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << my(fy) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << trim_number(fy)
        << "</text>\n";
  }

  // confidence band
  if (!band.empty()) {
    out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" "
           "points=\"";
    for (std::size_t i = 0; i < x.size(); ++i)
      out << mx(x[i]) << ',' << my(y[i] + band[i]) << ' ';
    for (std::size_t i = x.size(); i-- > 0;)
      out << mx(x[i]) << ',' << my(y[i] - band[i]) << ' ';
    out << "\"/>\n";
  }

  // series
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" "
         "points=\"";
  for (std::size_t i = 0; i < x.size(); ++i)
    out << mx(x[i]) << ',' << my(y[i]) << ' ';
  out << "\"/>\n";

  out << "<text x=\"" << kWidth / 2 << "\" y=\"18\" font-size=\"13\" "
      << "text-anchor=\"middle\">" << title << "</text>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
      << "\" font-size=\"12\" text-anchor=\"middle\">" << xlabel
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << kHeight / 2
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 "
         "16 "
      << kHeight / 2 << ")\">" << ylabel << "</text>\n";
  out << "</svg>\n";
}

bool is_numeric(const std::string &s) {
  if (s.empty())
    return false;
  char *end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

} // namespace

std::vector<std::string> plot_csv(const std::string &csv_path,
                                  const std::string &out_dir) {
  if (!std::filesystem::exists(csv_path))
    throw std::runtime_error("plot: no such file: " + csv_path);
  const CsvTable table = read_csv(csv_path);
  if (table.rows.empty())
    throw std::runtime_error("plot: no data rows in " + csv_path);
  ensure_directory(out_dir);

  const std::string stem = std::filesystem::path(csv_path).stem().string();
  const std::vector<Scalar> x = table.numeric_column(0);

  std::vector<std::string> produced;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    const std::string &name = table.header[c];
    if (name.size() > 5 && name.ends_with("_ci95"))
      continue; // band column, folded into its base series
    if (!is_numeric(table.rows.front()[c]))
      continue;
    const std::vector<Scalar> y = table.numeric_column(static_cast<int>(c));
    std::vector<Scalar> band;
    const int band_col = table.column_index(name + "_ci95");
    if (band_col >= 0)
      band = table.numeric_column(band_col);

    const std::string out_path =
        (std::filesystem::path(out_dir) / (stem + "_" + name + ".svg"))
            .string();
    render_svg(out_path, stem + ": " + name, table.header[0], name, x, y,
               band);
    produced.push_back(out_path);
  }
  if (produced.empty())
    throw std::runtime_error("plot: no numeric metric columns in " + csv_path);
  return produced;
}

} // namespace mfc
