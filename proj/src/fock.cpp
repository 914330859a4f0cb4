#include "qdim/fock.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace qdim {

namespace {

constexpr int kMaxOraclePhotons = 10;

// Exact integer binomials; C(10,5) = 252 so int64 has headroom to spare.
std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t result = 1;
  for (int i = 0; i < k; ++i) result = result * (n - i) / (i + 1);
  return result;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;  // exact in double for n <= 10
}

void check_state(const TwoModeFockState& state) {
  if (state.total_photons < 1) throw std::invalid_argument("state must hold at least one photon");
  if (state.amplitudes.size() != static_cast<std::size_t>(state.total_photons) + 1)
    throw std::invalid_argument("amplitude vector length must be total_photons + 1");
}

}  // namespace

double state_norm_sq(const TwoModeFockState& state) {
  double s = 0.0;
  for (const auto& a : state.amplitudes) s += std::norm(a);
  return s;
}

bool states_equal_up_to_phase(const TwoModeFockState& a, const TwoModeFockState& b,
                              double tolerance) {
  if (a.total_photons != b.total_photons) return false;
  auto gauge = [](const TwoModeFockState& s) {
    std::size_t pivot = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
      if (std::abs(s.amplitudes[i]) > best) {
        best = std::abs(s.amplitudes[i]);
        pivot = i;
      }
    }
    const auto p = s.amplitudes[pivot];
    return std::abs(p) > 0.0 ? std::conj(p) / std::abs(p) : std::complex<double>(1.0);
  };
  const auto ga = gauge(a);
  const auto gb = gauge(b);
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) {
    if (std::abs(ga * a.amplitudes[i] - gb * b.amplitudes[i]) > tolerance) return false;
  }
  return true;
}

TwoModeFockState make_noon(int total_photons, double relative_phase) {
  if (total_photons < 1) throw std::invalid_argument("NOON state needs total_photons >= 1");
  TwoModeFockState state;
  state.total_photons = total_photons;
  state.basis = PolarizationBasis::HV;
  state.amplitudes.assign(static_cast<std::size_t>(total_photons) + 1, {0.0, 0.0});
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  state.amplitudes[static_cast<std::size_t>(total_photons)] = {inv_sqrt2, 0.0};
  state.amplitudes[0] =
      std::polar(inv_sqrt2, static_cast<double>(total_photons) * relative_phase);
  return state;
}

TwoModeFockState apply_mode_phase(const TwoModeFockState& state, double phase, int mode) {
  check_state(state);
  if (mode != 1 && mode != 2) throw std::invalid_argument("mode must be 1 or 2");
  TwoModeFockState out = state;
  const int n_total = state.total_photons;
  for (int n = 0; n <= n_total; ++n) {
    const int count = mode == 1 ? n : n_total - n;
    out.amplitudes[static_cast<std::size_t>(n)] *= std::polar(1.0, phase * count);
  }
  return out;
}

TwoModeFockState rotate_to_diagonal(const TwoModeFockState& state) {
  check_state(state);
  const int n_total = state.total_photons;
  if (n_total > kMaxOraclePhotons)
    throw std::out_of_range("diagonal rotation supports at most 10 photons");

  TwoModeFockState out;
  out.total_photons = n_total;
  out.basis = state.basis == PolarizationBasis::HV ? PolarizationBasis::PM : PolarizationBasis::HV;
  out.amplitudes.assign(static_cast<std::size_t>(n_total) + 1, {0.0, 0.0});

  // |n;m>_in -> sum_a U[a][n] |a; N-a>_out with
  //   U[a][n] = 2^{-N/2} sqrt(a! b! / (n! m!)) sum_j C(n,j) C(m,a-j) (-1)^{m-a+j},
  // from expanding ((P+M)/sqrt2)^n ((P-M)/sqrt2)^m with exact integers.
  const double scale = std::pow(2.0, -0.5 * n_total);
  for (int n = 0; n <= n_total; ++n) {
    const auto& amp_in = state.amplitudes[static_cast<std::size_t>(n)];
    if (amp_in == std::complex<double>(0.0, 0.0)) continue;
    const int m = n_total - n;
    for (int a = 0; a <= n_total; ++a) {
      const int b = n_total - a;
      std::int64_t signed_sum = 0;
      const int j_lo = a - m > 0 ? a - m : 0;
      const int j_hi = n < a ? n : a;
      for (int j = j_lo; j <= j_hi; ++j) {
        const std::int64_t term = binomial(n, j) * binomial(m, a - j);
        signed_sum += ((m - a + j) % 2 == 0) ? term : -term;
      }
      if (signed_sum == 0) continue;
      const double coeff =
          scale * std::sqrt(factorial(a) * factorial(b) / (factorial(n) * factorial(m)));
      out.amplitudes[static_cast<std::size_t>(a)] +=
          amp_in * (coeff * static_cast<double>(signed_sum));
    }
  }
  return out;
}

double odd_count_probability(const TwoModeFockState& state, int mode) {
  check_state(state);
  if (mode != 1 && mode != 2) throw std::invalid_argument("mode must be 1 or 2");
  const int n_total = state.total_photons;
  double prob = 0.0;
  for (int n = 0; n <= n_total; ++n) {
    const int count = mode == 1 ? n : n_total - n;
    if (count % 2 == 1) prob += std::norm(state.amplitudes[static_cast<std::size_t>(n)]);
  }
  return prob;
}

std::vector<double> oracle_fringe(int total_photons, double bias_phase,
                                  const std::vector<double>& phase_grid) {
  if (total_photons < 1 || total_photons > kMaxOraclePhotons)
    throw std::out_of_range("oracle_fringe supports total_photons in [1, 10]");
  const TwoModeFockState probe = make_noon(total_photons, bias_phase);
  std::vector<double> out;
  out.reserve(phase_grid.size());
  for (double phi : phase_grid) {
    const TwoModeFockState shifted = apply_mode_phase(probe, phi, 2);
    const TwoModeFockState rotated = rotate_to_diagonal(shifted);
    out.push_back(odd_count_probability(rotated, 2));
  }
  return out;
}

}  // namespace qdim
