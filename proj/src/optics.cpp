#include "qdim/optics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qdim {

BeamGeometry::BeamGeometry(double sigma, double separation)
    : sigma_um(sigma), separation_um(separation) {
  if (!(sigma > 0.0)) throw std::invalid_argument("beam sigma must be > 0");
  if (!(separation >= 0.0)) throw std::invalid_argument("beam separation must be >= 0");
}

MaterialModel::MaterialModel(double n, double wavelength, int n_passes)
    : refractive_index(n), wavelength_nm(wavelength), passes(n_passes) {
  if (!(n > 1.0)) throw std::invalid_argument("refractive index must be > 1");
  if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be > 0");
  if (n_passes != 1 && n_passes != 2) throw std::invalid_argument("passes must be 1 or 2");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double overlap_xi(const BeamGeometry& geom) {
  return 2.0 * normal_tail(geom.separation_um / (2.0 * geom.sigma_um));
}

double window_weight(const BeamGeometry& geom, double s_um) {
  const double half = 0.5 * geom.separation_um;
  return normal_cdf((s_um + half) / geom.sigma_um) - normal_cdf((s_um - half) / geom.sigma_um);
}

double window_weight_derivative(const BeamGeometry& geom, double s_um) {
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  const double half = 0.5 * geom.separation_um;
  const double zp = (s_um + half) / geom.sigma_um;
  const double zm = (s_um - half) / geom.sigma_um;
  return kInvSqrt2Pi * (std::exp(-0.5 * zp * zp) - std::exp(-0.5 * zm * zm)) / geom.sigma_um;
}

double height_to_phase(double height_nm, const MaterialModel& mat) {
  return mat.passes * 2.0 * std::numbers::pi * (mat.refractive_index - 1.0) * height_nm /
         mat.wavelength_nm;
}

double phase_to_height(double phase_rad, const MaterialModel& mat) {
  return phase_rad * mat.wavelength_nm /
         (mat.passes * 2.0 * std::numbers::pi * (mat.refractive_index - 1.0));
}

}  // namespace qdim
