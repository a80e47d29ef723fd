#pragma once

#include <functional>
#include <optional>

#include "qpdyn/grid.hpp"
#include "qpdyn/states.hpp"

namespace qpdyn {

/// Operator of the restricted class O = f(q) + g(p) (no q.p cross terms).
/// The mean-value contraction evaluates O at pair midpoints (q'+q'')/2,
/// which live on the half-step lattice of the axis, so each part is stored
/// as 2n-1 samples at step/2 starting at the axis origin.
class ObservableSpec {
 public:
  static ObservableSpec position_fn(const Grid1D& q_axis, const std::function<double(double)>& f);
  static ObservableSpec momentum_fn(const Grid1D& p_axis, const std::function<double(double)>& g);
  static ObservableSpec sum(const ObservableSpec& q_part, const ObservableSpec& p_part);

  static ObservableSpec identity(const Grid1D& q_axis);              // f(q) = 1
  static ObservableSpec position(const Grid1D& q_axis);              // f(q) = q
  static ObservableSpec momentum(const Grid1D& p_axis);              // g(p) = p
  static ObservableSpec potential(const Grid1D& q_axis, const PotentialSpec& v);
  static ObservableSpec kinetic(const Grid1D& p_axis, const KineticSpec& t);
  static ObservableSpec hamiltonian(const PhaseGrid& pg, const KineticSpec& t,
                                    const PotentialSpec& v);

  bool has_q() const { return q_axis_.has_value(); }
  bool has_p() const { return p_axis_.has_value(); }
  const Grid1D& q_axis() const { return *q_axis_; }
  const Grid1D& p_axis() const { return *p_axis_; }

  /// f at axis.origin + r * axis.step / 2, r in [0, 2n-1).
  const std::vector<double>& q_mid_samples() const { return q_mid_; }
  const std::vector<double>& p_mid_samples() const { return p_mid_; }

 private:
  std::optional<Grid1D> q_axis_;
  std::optional<Grid1D> p_axis_;
  std::vector<double> q_mid_;
  std::vector<double> p_mid_;
};

/// Husimi density |rho(q,p)|^2; nonnegative by construction.
RealField husimi(const PhaseField& qp);

/// Quadrature sum of the Husimi density; 1 for a unit-norm underlying state.
double trace_norm(const PhaseField& qp);

/// Phase-space mean value
///   (4 pi)^(-1) sum e^{i(q'' p' - q' p'')/2} rho*(q'',p'')
///                 O((q'+q'')/2, (p'+p'')/2) rho(q',p') d^4
/// evaluated via the separable O(N^3) contraction. The imaginary residue is
/// checked against 1e-8 (exceeding it signals non-Hermitian input or a
/// broken grid) and then discarded.
///
/// For O = 1 this equals trace_norm on states in the image of psi_to_qp;
/// off that subspace the kernel projects first, so the two can differ.
double expectation_direct(const PhaseField& qp, const ObservableSpec& obs);

/// Same mean value through the reduced route: reconstruct psi(q) / psi(p)
/// and integrate f|psi(q)|^2 + g|psi(p)|^2.
double expectation_reduced(const PhaseField& qp, const ObservableSpec& obs);

inline constexpr double kExpectationResidueTol = 1e-8;

}  // namespace qpdyn
