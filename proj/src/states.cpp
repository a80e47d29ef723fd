#include "qpdyn/states.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qpdyn/errors.hpp"

namespace qpdyn {

namespace {
// exp(350)^2 * depth stays below the double overflow threshold.
constexpr double kMorseExponentCap = 350.0;
}  // namespace

PotentialSpec PotentialSpec::morse(double v0, double depth, double a, double q_eq) {
  if (!(depth > 0.0) || !(a > 0.0))
    throw InvalidInput("PotentialSpec::morse: need depth > 0 and a > 0");
  PotentialSpec s;
  s.v_ = MorseParams{v0, depth, a, q_eq};
  return s;
}

PotentialSpec PotentialSpec::harmonic(double m, double omega) {
  if (!(m > 0.0) || !(omega > 0.0))
    throw InvalidInput("PotentialSpec::harmonic: need m > 0 and omega > 0");
  PotentialSpec s;
  s.v_ = HarmonicParams{m, omega};
  return s;
}

PotentialSpec PotentialSpec::free_particle() {
  PotentialSpec s;
  s.v_ = FreeParams{};
  return s;
}

double PotentialSpec::evaluate(double q) const {
  if (const auto* m = std::get_if<MorseParams>(&v_)) {
    double x = -m->a * (q - m->q_eq);
    if (x > kMorseExponentCap) x = kMorseExponentCap;
    const double e = std::exp(x);
    return m->v0 + m->depth * (1.0 - e) * (1.0 - e);
  }
  if (const auto* h = std::get_if<HarmonicParams>(&v_)) {
    return 0.5 * h->m * h->omega * h->omega * q * q;
  }
  return 0.0;
}

const char* PotentialSpec::kind_name() const {
  if (std::holds_alternative<MorseParams>(v_)) return "morse";
  if (std::holds_alternative<HarmonicParams>(v_)) return "harmonic";
  return "free";
}

KineticSpec KineticSpec::non_relativistic(double m) {
  if (!(m > 0.0)) throw InvalidInput("KineticSpec::non_relativistic: need m > 0");
  KineticSpec s;
  s.v_ = NonRelativisticParams{m};
  return s;
}

KineticSpec KineticSpec::relativistic(double m0, double c) {
  if (!(m0 > 0.0) || !(c > 0.0)) throw InvalidInput("KineticSpec::relativistic: need m0, c > 0");
  KineticSpec s;
  s.v_ = RelativisticParams{m0, c};
  return s;
}

double KineticSpec::evaluate(double p) const {
  if (const auto* nr = std::get_if<NonRelativisticParams>(&v_)) {
    return p * p / (2.0 * nr->m);
  }
  const auto& r = std::get<RelativisticParams>(v_);
  const double rest = r.m0 * r.c * r.c;
  return std::sqrt(r.c * r.c * p * p + rest * rest);
}

bool KineticSpec::is_relativistic() const {
  return std::holds_alternative<RelativisticParams>(v_);
}

double KineticSpec::rest_energy() const {
  if (const auto* r = std::get_if<RelativisticParams>(&v_)) return r->m0 * r->c * r->c;
  return 0.0;
}

double KineticSpec::mass() const {
  if (const auto* nr = std::get_if<NonRelativisticParams>(&v_)) return nr->m;
  return std::get<RelativisticParams>(v_).m0;
}

const char* KineticSpec::kind_name() const {
  return is_relativistic() ? "relativistic" : "nonrelativistic";
}

WaveFn coherent_state(const Grid1D& grid, const CoherentStateSpec& spec,
                      BoundaryDiagnostic* diag) {
  if (grid.axis_kind != AxisKind::position)
    throw InvalidInput("coherent_state: expected a position grid");
  if (!std::isfinite(spec.q0) || !std::isfinite(spec.p0))
    throw InvalidInput("coherent_state: non-finite center");

  WaveFn psi = make_wavefn(grid);
  const double amp = std::pow(std::numbers::pi, -0.25);
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double dq = grid.sample(j) - spec.q0;
    psi.values[j] = amp * std::exp(-0.5 * dq * dq) * std::polar(1.0, spec.p0 * dq);
  }
  if (diag) *diag = boundary_diagnostic(psi);
  return psi;
}

BoundaryDiagnostic boundary_diagnostic(const WaveFn& psi) {
  BoundaryDiagnostic d;
  if (psi.values.empty()) return d;
  d.left_amp = std::abs(psi.values.front());
  d.right_amp = std::abs(psi.values.back());
  d.truncated = d.left_amp > kBoundaryAmplitudeThreshold ||
                d.right_amp > kBoundaryAmplitudeThreshold;
  return d;
}

Superposition superpose(const std::vector<std::pair<Complex, WaveFn>>& terms) {
  if (terms.empty()) throw InvalidInput("superpose: no terms");
  const Grid1D& grid = terms.front().second.grid;
  for (const auto& [c, psi] : terms)
    if (psi.grid != grid) throw InvalidInput("superpose: terms on different grids");

  WaveFn sum = make_wavefn(grid);
  for (const auto& [c, psi] : terms)
    for (std::size_t j = 0; j < grid.n; ++j) sum.values[j] += c * psi.values[j];

  const double norm = quadrature_norm(sum);
  if (!(norm > 1e-300))
    throw InvalidInput("superpose: zero-norm result (perfectly cancelling superposition)");
  const double scale = 1.0 / norm;
  for (Complex& v : sum.values) v *= scale;
  return Superposition{std::move(sum), scale};
}

AxisField potential_values(const Grid1D& grid, const PotentialSpec& spec, ClampDiagnostic* diag) {
  if (grid.axis_kind != AxisKind::position)
    throw InvalidInput("potential_values: expected a position grid");
  AxisField out{grid, std::vector<double>(grid.n)};
  ClampDiagnostic local;
  const auto* morse = std::get_if<MorseParams>(&spec.variant());
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double q = grid.sample(j);
    if (morse) {
      const double x = -morse->a * (q - morse->q_eq);
      if (x > kMorseExponentCap) {
        local.clamped = true;
        local.worst_exponent = std::max(local.worst_exponent, x);
      }
    }
    out.values[j] = spec.evaluate(q);
  }
  if (diag) *diag = local;
  return out;
}

AxisField kinetic_values(const Grid1D& grid, const KineticSpec& spec) {
  if (grid.axis_kind != AxisKind::momentum)
    throw InvalidInput("kinetic_values: expected a momentum grid");
  AxisField out{grid, std::vector<double>(grid.n)};
  for (std::size_t k = 0; k < grid.n; ++k) out.values[k] = spec.evaluate(grid.sample(k));
  return out;
}

}  // namespace qpdyn
