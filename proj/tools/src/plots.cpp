#include <fmt/format.h>

#include "commands.hpp"

namespace crashdyn::cli {

namespace {

constexpr const char* kDensities = R"(# One-point return densities, one curve per day.
set datafile separator ','
set key off
set xlabel 'x'
set ylabel 't'
set zlabel 'P(x,t)'
splot '../densities.csv' using 2:1:3 every ::1 with points pointtype 7 pointsize 0.4
)";

constexpr const char* kCoefficients = R"(# Estimated drift and diffusion coefficients on the (x, t) grid.
set datafile separator ','
set key off
set multiplot layout 1,2
set title 'D1(x,t)'
splot '../field.csv' using 2:1:3 every ::1 with points pointtype 7 pointsize 0.4
set title 'D2(x,t)'
splot '../field.csv' using 2:1:4 every ::1 with points pointtype 7 pointsize 0.4
unset multiplot
)";

constexpr const char* kPotential = R"(# Reconstructed potential against the simulated surface.
set datafile separator ','
set xlabel 'x'
set ylabel 't'
set zlabel 'U'
splot '../field.csv' using 2:1:5 every ::1 title 'estimated' with points pointtype 7 pointsize 0.4, \
      '../potential_surface.csv' using 1:2:3 every ::1 title 'model' with lines
)";

constexpr const char* kDiffusion = R"(# Diffusion coefficient in time.
set datafile separator ','
set xlabel 't'
set ylabel 'D2'
set logscale y
plot '../field.csv' using 1:4 every ::1 title 'estimated' with points pointtype 7 pointsize 0.4, \
     '../diffusion_surface.csv' using 2:3 every ::1 title 'model' with lines
)";

constexpr const char* kIndex = R"(# Averaged simulated index; fitted parameters are in index_fit.json.
set datafile separator ','
set xlabel 't'
set ylabel 'S(t)'
plot '../index.csv' using 1:2 every ::1 title 'mean index' with linespoints
)";

}  // namespace

void write_plot_scripts(const std::filesystem::path& out_dir, const std::vector<double>& threshold_multiples) {
  const auto dir = out_dir / "plots";
  write_text(dir / "densities.gp", kDensities);
  write_text(dir / "coefficients.gp", kCoefficients);
  write_text(dir / "potential.gp", kPotential);
  write_text(dir / "diffusion.gp", kDiffusion);
  write_text(dir / "index.gp", kIndex);

  std::string omori =
      "# Cumulative exceedance counts on log-log axes.\n"
      "set datafile separator ','\n"
      "set logscale xy\n"
      "set xlabel 't'\n"
      "set ylabel 'N(t)'\n"
      "plot ";
  for (std::size_t i = 0; i < threshold_multiples.size(); ++i) {
    const auto m = format_multiple(threshold_multiples[i]);
    omori += fmt::format("{}'../omori_N_{}.csv' using 1:2 every ::2 title '{} sigma' with linespoints",
                         i == 0 ? "" : ", \\\n     ", m, m);
  }
  omori += "\n";
  write_text(dir / "omori.gp", omori);
}

}  // namespace crashdyn::cli
