#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "povmshadow/qcore.hpp"

namespace povmshadow {

/// Hyperbolic lens phase grid, wrapped to [0, 2pi), on a square pixel
/// lattice. Lengths in micrometers.
struct PhaseProfile {
  Eigen::MatrixXd grid;            // grid(iy, ix), radians in [0, 2pi)
  double pitch_um = 0.5;
  double focal_length_um = 150.0;
  double wavelength_um = 0.81;
  double focus_x_um = 0.0;
  double focus_y_um = 0.0;
  double x_min_um = 0.0;
  double y_min_um = 0.0;
};

struct PillarSpec {
  double theta = 0.0;  // radians
  double l_x_nm = 0.0;
  double l_y_nm = 0.0;
  double phi_x = 0.0;  // radians
  double phi_y = 0.0;  // radians
  double t_x = 1.0;
  double t_y = 1.0;
};

struct StokesVector {
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
};

/// One metasurface region: basis pair it separates and the two focus points.
struct RegionSpec {
  std::string basis;  // "HV", "PM" (+/-) or "RL"
  char pauli_axis;    // z, x, y
  double x_min_um, x_max_um, y_min_um, y_max_um;
  double focus_x_um;  // +- this x for the two foci
  double focus_y_um;
};

/// Phase Phi = -(2 pi / lambda)(sqrt((x-x0)^2 + (y-y0)^2 + f^2) - f), wrapped.
double lens_phase(double x_um, double y_um, double focus_x_um, double focus_y_um,
                  double focal_length_um, double wavelength_um);

/// Evaluate the lens phase at the pixel centers of a region.
PhaseProfile phase_profile(const RegionSpec& region, double focus_x_um, double focus_y_um,
                           double focal_length_um = 150.0, double wavelength_um = 0.81,
                           double pitch_um = 0.5);

/// R(theta) diag(e^{i phi_x}, e^{i phi_y}) R(-theta).
Eigen::Matrix2cd pillar_unitary(double theta, double phi_x, double phi_y);

/// Circular-polarization design solve: theta = (Phi+ - Phi-)/4,
/// phi_x = (Phi+ + Phi-)/2 (with phi_y = phi_x - pi implied).
std::pair<double, double> circular_design(double phi_plus, double phi_minus);

/// Library entry minimizing wrapped |phi_x - target|; ties broken by the
/// higher min(t_x, t_y).
const PillarSpec& select_pillar(double target_phi_x, const std::vector<PillarSpec>& library);

/// s1 = (I_H - I_V)/(I_H + I_V) etc. from the intensity sextet (H,V,+,-,R,L).
StokesVector stokes_from_intensities(const std::array<double, 6>& intensities);

/// The three fixed regions (extent, basis pair, foci).
std::vector<RegionSpec> region_layout();

/// 16-entry circular-region pillar library from the bundled CSV
/// (l_x_nm, l_y_nm, phi_x_over_2pi, phi_y_over_2pi, t_x, t_y).
std::vector<PillarSpec> load_pillar_library(const std::string& csv_path);

void write_phase_profile_csv(std::ostream& out, const PhaseProfile& profile);

/// Layout manifest for the circular region: one line per pixel,
/// `region, x_um, y_um, theta, l_x_nm, l_y_nm`.
void write_circular_layout(std::ostream& out, const std::vector<PillarSpec>& library);

}  // namespace povmshadow
