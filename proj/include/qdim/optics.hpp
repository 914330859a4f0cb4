#pragma once

namespace qdim {

/// Gaussian probe-beam geometry at the sample plane. The photon density of
/// each beam is an isotropic Gaussian with standard deviation `sigma_um`;
/// the two polarization beams are displaced by `separation_um` along the
/// differential axis.
struct BeamGeometry {
  double sigma_um = 11.25;
  double separation_um = 45.0;

  BeamGeometry() = default;
  BeamGeometry(double sigma, double separation);
};

/// Converts sample height to optical phase. Defaults are BK7 glass probed in
/// transmission at 810 nm; `passes` is 2 for reflection geometries.
struct MaterialModel {
  double refractive_index = 1.5107;
  double wavelength_nm = 810.0;
  int passes = 1;

  MaterialModel() = default;
  MaterialModel(double n, double wavelength, int passes = 1);
};

/// Standard normal CDF and upper tail.
double normal_cdf(double z);
double normal_tail(double z);

/// Fraction of one beam's photon density lying on the far side of the other
/// beam, i.e. the mass of the density outside the window between the two
/// beam centers: 2 * normal_tail(separation / (2 sigma)). Returns 1 for
/// fully overlapped beams (separation 0) and falls to 0 as they separate.
double overlap_xi(const BeamGeometry& geom);

/// Density mass inside the inter-beam window centered at offset `s` from the
/// window midpoint: w(s) = Phi((s + a/2)/sigma) - Phi((s - a/2)/sigma).
/// w(0) = 1 - overlap_xi, even in s, unimodal.
double window_weight(const BeamGeometry& geom, double s_um);

/// d/ds of window_weight.
double window_weight_derivative(const BeamGeometry& geom, double s_um);

/// Phase imprinted by a relief step of height h:
/// passes * 2*pi*(n - 1)*h / lambda.
double height_to_phase(double height_nm, const MaterialModel& mat);

/// Exact inverse of height_to_phase.
double phase_to_height(double phase_rad, const MaterialModel& mat);

}  // namespace qdim
