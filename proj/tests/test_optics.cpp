#include "qdim/optics.hpp"

#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "oracles.hpp"

using namespace qdim;

TEST_CASE("overlap_xi endpoints and the reference geometry") {
  // Zero separation: the window has no width, everything overlaps.
  CHECK(overlap_xi(BeamGeometry(11.25, 0.0)) == doctest::Approx(1.0).epsilon(1e-15));

  // sigma = 11.25 um, separation 45 um: 2 * normal_tail(2)
  const double xi = overlap_xi(BeamGeometry(11.25, 45.0));
  CHECK(xi == doctest::Approx(0.0455003).epsilon(1e-4));
  CHECK(std::abs(xi - 2.0 * normal_tail(2.0)) < 1e-15);

  // Widely separated beams do not overlap.
  CHECK(overlap_xi(BeamGeometry(1.0, 40.0)) < 1e-12);

  CHECK_THROWS_AS(BeamGeometry(0.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(BeamGeometry(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("overlap_xi agrees with 2D quadrature of the beam density") {
  for (double separation : {0.0, 10.0, 22.5, 45.0, 70.0}) {
    const BeamGeometry geom(11.25, separation);
    CHECK(std::abs(overlap_xi(geom) - oracles::overlap_by_quadrature(11.25, separation)) <
          1e-8);
  }
}

TEST_CASE("window_weight matches the Gaussian mass between the beams") {
  const BeamGeometry geom(11.25, 45.0);

  // Centered: complement of the overlap, exactly.
  CHECK(std::abs(window_weight(geom, 0.0) + overlap_xi(geom) - 1.0) < 1e-12);
  CHECK(window_weight(geom, 0.0) == doctest::Approx(0.9544997).epsilon(1e-5));

  // Centered on one beam: Phi(4) - Phi(0).
  CHECK(window_weight(geom, 22.5) == doctest::Approx(0.4999683).epsilon(1e-5));
  CHECK(std::abs(window_weight(geom, 22.5) -
                 oracles::gaussian_window_by_quadrature(11.25, -45.0, 0.0)) < 1e-10);

  // Far away: nothing.
  CHECK(window_weight(geom, 50.0 * 11.25) < 1e-14);

  // Even and unimodal with the peak at the midpoint.
  double previous = window_weight(geom, -120.0);
  for (double s = -110.0; s <= 0.0; s += 10.0) {
    const double w = window_weight(geom, s);
    CHECK(std::abs(w - window_weight(geom, -s)) < 1e-14);
    CHECK(w > previous);
    previous = w;
  }
}

TEST_CASE("window_weight_derivative matches finite differences") {
  const BeamGeometry geom(11.25, 45.0);
  for (double s : {-40.0, -10.0, 0.0, 5.0, 22.5, 60.0}) {
    const double fd = oracles::central_difference(
        [&](double x) { return window_weight(geom, x); }, s, 1e-5);
    CHECK(window_weight_derivative(geom, s) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("beam diameter read as 4 sigma reproduces the reference overlap") {
  const double diameter = 45.0;
  const BeamGeometry geom(diameter / 4.0, diameter);
  const double xi = overlap_xi(geom);
  CHECK(xi > 0.045);
  CHECK(xi < 0.047);
}

TEST_CASE("height/phase conversion round trips") {
  const MaterialModel bk7;
  CHECK(height_to_phase(0.0, bk7) == 0.0);

  // 17.3 nm of BK7 at 810 nm, single pass.
  const double phase = height_to_phase(17.3, bk7);
  CHECK(phase == doctest::Approx(0.0685347).epsilon(1e-4));
  CHECK(phase_to_height(phase, bk7) == doctest::Approx(17.3).epsilon(1e-12));

  const MaterialModel reflective(1.5107, 810.0, 2);
  CHECK(height_to_phase(17.3, reflective) == doctest::Approx(2.0 * phase).epsilon(1e-12));

  for (double h : {-20.0, 0.07, 3.5, 17.3, 250.0}) {
    CHECK(std::abs(phase_to_height(height_to_phase(h, bk7), bk7) - h) < 1e-9);
  }

  CHECK_THROWS_AS(MaterialModel(0.9, 810.0), std::invalid_argument);
  CHECK_THROWS_AS(MaterialModel(1.5, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(MaterialModel(1.5, 810.0, 3), std::invalid_argument);
}
