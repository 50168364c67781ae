#include "povmshadow/metadesign.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace povmshadow {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_phase(double phi) {
  phi = std::fmod(phi, kTwoPi);
  if (phi < 0.0) phi += kTwoPi;
  return phi;
}

double wrapped_distance(double a, double b) {
  const double diff = std::abs(wrap_phase(a) - wrap_phase(b));
  return std::min(diff, kTwoPi - diff);
}

}  // namespace

double lens_phase(double x_um, double y_um, double focus_x_um, double focus_y_um,
                  double focal_length_um, double wavelength_um) {
  const double dx = x_um - focus_x_um;
  const double dy = y_um - focus_y_um;
  const double raw = -(kTwoPi / wavelength_um) *
                     (std::sqrt(dx * dx + dy * dy + focal_length_um * focal_length_um) -
                      focal_length_um);
  return wrap_phase(raw);
}

PhaseProfile phase_profile(const RegionSpec& region, double focus_x_um, double focus_y_um,
                           double focal_length_um, double wavelength_um, double pitch_um) {
  if (focal_length_um <= 0.0) throw domain_error("phase_profile: focal length must be positive");
  if (wavelength_um <= 0.0) throw domain_error("phase_profile: wavelength must be positive");
  PhaseProfile p;
  p.pitch_um = pitch_um;
  p.focal_length_um = focal_length_um;
  p.wavelength_um = wavelength_um;
  p.focus_x_um = focus_x_um;
  p.focus_y_um = focus_y_um;
  p.x_min_um = region.x_min_um;
  p.y_min_um = region.y_min_um;
  const int nx = static_cast<int>(std::lround((region.x_max_um - region.x_min_um) / pitch_um));
  const int ny = static_cast<int>(std::lround((region.y_max_um - region.y_min_um) / pitch_um));
  p.grid.resize(ny, nx);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const double x = region.x_min_um + (ix + 0.5) * pitch_um;
      const double y = region.y_min_um + (iy + 0.5) * pitch_um;
      p.grid(iy, ix) = lens_phase(x, y, focus_x_um, focus_y_um, focal_length_um, wavelength_um);
    }
  return p;
}

Eigen::Matrix2cd pillar_unitary(double theta, double phi_x, double phi_y) {
  Eigen::Matrix2d rot;
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  Eigen::Matrix2cd diag = Eigen::Matrix2cd::Zero();
  diag(0, 0) = std::polar(1.0, phi_x);
  diag(1, 1) = std::polar(1.0, phi_y);
  return rot.cast<cplx>() * diag * rot.transpose().cast<cplx>();
}

std::pair<double, double> circular_design(double phi_plus, double phi_minus) {
  return {(phi_plus - phi_minus) / 4.0, (phi_plus + phi_minus) / 2.0};
}

const PillarSpec& select_pillar(double target_phi_x, const std::vector<PillarSpec>& library) {
  if (library.empty()) throw domain_error("select_pillar: empty library");
  const PillarSpec* best = &library.front();
  double best_dist = wrapped_distance(best->phi_x, target_phi_x);
  for (const auto& entry : library) {
    const double dist = wrapped_distance(entry.phi_x, target_phi_x);
    const double tol = 1e-12;
    if (dist < best_dist - tol ||
        (std::abs(dist - best_dist) <= tol &&
         std::min(entry.t_x, entry.t_y) > std::min(best->t_x, best->t_y))) {
      best = &entry;
      best_dist = dist;
    }
  }
  return *best;
}

StokesVector stokes_from_intensities(const std::array<double, 6>& i) {
  // order H, V, +, -, R, L
  const double dz = i[0] + i[1];
  const double dx = i[2] + i[3];
  const double dy = i[4] + i[5];
  if (dz <= 0.0 || dx <= 0.0 || dy <= 0.0)
    throw domain_error("stokes_from_intensities: zero denominator");
  return {(i[0] - i[1]) / dz, (i[2] - i[3]) / dx, (i[4] - i[5]) / dy};
}

std::vector<RegionSpec> region_layout() {
  // Extents and foci per the fabrication parameter table: the H/V region
  // focuses at (+-35, 70), +/- at (+-35, 0), R/L at (+-35, -70), all in um.
  return {
      {"HV", 'z', -105.0, 105.0, 35.0, 105.0, 35.0, 70.0},
      {"PM", 'x', -105.0, 105.0, -35.0, 35.0, 35.0, 0.0},
      {"RL", 'y', -105.0, 105.0, -105.0, -35.0, 35.0, -70.0},
  };
}

std::vector<PillarSpec> load_pillar_library(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw domain_error("cannot open pillar library: " + csv_path);
  std::vector<PillarSpec> library;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("l_x", 0) == 0) continue;
    std::istringstream ls(line);
    PillarSpec p;
    char comma;
    double phi_x_frac, phi_y_frac;
    if (!(ls >> p.l_x_nm >> comma >> p.l_y_nm >> comma >> phi_x_frac >> comma >> phi_y_frac >>
          comma >> p.t_x >> comma >> p.t_y))
      throw domain_error("malformed pillar library row: " + line);
    p.phi_x = phi_x_frac * kTwoPi;
    p.phi_y = phi_y_frac * kTwoPi;
    library.push_back(p);
  }
  if (library.empty()) throw domain_error("pillar library is empty: " + csv_path);
  return library;
}

void write_phase_profile_csv(std::ostream& out, const PhaseProfile& profile) {
  out.precision(17);
  for (Eigen::Index iy = 0; iy < profile.grid.rows(); ++iy) {
    for (Eigen::Index ix = 0; ix < profile.grid.cols(); ++ix) {
      if (ix) out << ",";
      out << profile.grid(iy, ix);
    }
    out << "\n";
  }
}

void write_circular_layout(std::ostream& out, const std::vector<PillarSpec>& library) {
  const auto regions = region_layout();
  const RegionSpec* circular = nullptr;
  for (const auto& r : regions)
    if (r.basis == "RL") circular = &r;
  const PhaseProfile plus = phase_profile(*circular, circular->focus_x_um, circular->focus_y_um);
  const PhaseProfile minus = phase_profile(*circular, -circular->focus_x_um, circular->focus_y_um);
  out << "region, x_um, y_um, theta, l_x_nm, l_y_nm\n";
  out.precision(12);
  for (Eigen::Index iy = 0; iy < plus.grid.rows(); ++iy)
    for (Eigen::Index ix = 0; ix < plus.grid.cols(); ++ix) {
      const auto [theta, phi_x] = circular_design(plus.grid(iy, ix), minus.grid(iy, ix));
      const PillarSpec& pillar = select_pillar(phi_x, library);
      const double x = circular->x_min_um + (ix + 0.5) * plus.pitch_um;
      const double y = circular->y_min_um + (iy + 0.5) * plus.pitch_um;
      out << circular->basis << ", " << x << ", " << y << ", " << theta << ", " << pillar.l_x_nm
          << ", " << pillar.l_y_nm << "\n";
    }
}

}  // namespace povmshadow
