#include "qpdyn/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "qpdyn/errors.hpp"

namespace qpdyn {

namespace fft {

namespace {

// FFTW planning is not thread-safe; execution through fftw_execute_dft is.
// FFTW_ESTIMATE keeps the chosen algorithm independent of runtime timing so
// repeated runs are bit-identical; FFTW_UNALIGNED lets plans run on any
// caller buffer.
std::mutex plan_mutex;

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

fftw_plan plan_for(std::size_t n, int sign) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  PlanPair& pair = cache[n];
  fftw_plan& slot = (sign == FFTW_FORWARD) ? pair.forward : pair.backward;
  if (!slot) {
    std::vector<Complex> dummy(n);
    auto* buf = reinterpret_cast<fftw_complex*>(dummy.data());
    slot = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!slot) throw NumericalFailure("fftw_plan_dft_1d failed");
  }
  return slot;
}

}  // namespace

void dft(std::span<const Complex> in, std::span<Complex> out, int sign) {
  if (in.size() != out.size()) throw InvalidInput("fft::dft: size mismatch");
  if (in.empty()) return;
  // Per-thread memo of the last plans avoids the plan-cache mutex on the
  // hot path (RHS evaluations perform hundreds of same-size transforms).
  struct Memo {
    std::size_t n = 0;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
  };
  thread_local Memo memo;
  if (memo.n != in.size()) {
    memo.n = in.size();
    memo.fwd = plan_for(in.size(), FFTW_FORWARD);
    memo.bwd = plan_for(in.size(), FFTW_BACKWARD);
  }
  fftw_plan plan = sign < 0 ? memo.fwd : memo.bwd;
  // in is not modified for out-of-place transforms; the const_cast only
  // adapts to FFTW's non-const API.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plan, src, dst);
}

}  // namespace fft

namespace {

void require_conjugate(const Grid1D& q, const Grid1D& p, const char* what) {
  if (q.axis_kind != AxisKind::position || p.axis_kind != AxisKind::momentum)
    throw InvalidInput(std::string(what) + ": axis kinds are not (position, momentum)");
  if (conjugate_momentum_grid(q) != p)
    throw InvalidInput(std::string(what) + ": p axis is not conjugate to the q axis");
}

}  // namespace

WaveFn fourier_q_to_p(const WaveFn& psi_q, const Grid1D& p_axis) {
  require_conjugate(psi_q.grid, p_axis, "fourier_q_to_p");
  const std::size_t n = psi_q.grid.n;
  const double dq = psi_q.grid.step;
  const double q0 = psi_q.grid.origin;

  // p_origin = -pi/dq makes e^{-i j dq p_origin} = (-1)^j.
  std::vector<Complex> tmp(n);
  for (std::size_t j = 0; j < n; ++j) tmp[j] = (j & 1) ? -psi_q.values[j] : psi_q.values[j];

  WaveFn out{p_axis, std::vector<Complex>(n)};
  fft::dft(tmp, out.values, -1);

  const double scale = dq / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t k = 0; k < n; ++k) {
    const double pk = p_axis.sample(k);
    out.values[k] *= scale * std::polar(1.0, -q0 * pk);
  }
  return out;
}

WaveFn fourier_p_to_q(const WaveFn& psi_p, const Grid1D& q_axis) {
  require_conjugate(q_axis, psi_p.grid, "fourier_p_to_q");
  const std::size_t n = psi_p.grid.n;
  const double dp = psi_p.grid.step;
  const double q0 = q_axis.origin;

  std::vector<Complex> tmp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double pk = psi_p.grid.sample(k);
    tmp[k] = psi_p.values[k] * std::polar(1.0, q0 * pk);
  }

  WaveFn out{q_axis, std::vector<Complex>(n)};
  fft::dft(tmp, out.values, +1);

  const double scale = dp / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] *= (j & 1) ? -scale : scale;
  }
  return out;
}

}  // namespace qpdyn
