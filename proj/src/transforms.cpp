#include "qpdyn/transforms.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

#include "qpdyn/errors.hpp"
#include "qpdyn/fft.hpp"
#include "qpdyn/parallel.hpp"

namespace qpdyn {

namespace {

constexpr double kPi = std::numbers::pi;
const double kGaborNorm = 1.0 / std::sqrt(2.0 * std::pow(kPi, 1.5));  // (2 pi^(3/2))^(-1/2)
const double kBackNorm = 1.0 / std::sqrt(2.0 * std::sqrt(kPi));       // (2 sqrt(pi))^(-1/2)
const double kKirkwoodNorm = 1.0 / std::sqrt(4.0 * kPi);
constexpr double kWignerResidueTol = 1e-10;

int parity(std::size_t i) { return (i & 1) ? -1 : 1; }

// Precomputed per-grid tables shared by the transforms. Conjugate pairs
// always have n_q == n_p == n.
struct Tables {
  std::size_t n = 0;
  std::vector<double> win_q;       // e^{-(d*dq)^2/2}, d in [0, n)
  std::vector<double> win_p;       // e^{-(d*dp)^2/2}
  std::vector<Complex> half;       // n*n: e^{+i q_j p_k / 2}, q-major
  std::vector<Complex> mom_shift;  // n: e^{-i q_origin p_k}
  std::vector<Complex> omega;      // n: e^{+2 pi i t / n}
  std::vector<Complex> base_pos;   // n: e^{+i q_origin dp k}
};

struct TableKey {
  std::size_t n;
  double q0, dq, p0, dp;
  auto tie() const { return std::tie(n, q0, dq, p0, dp); }
  bool operator<(const TableKey& o) const { return tie() < o.tie(); }
};

const Tables& tables_for(const PhaseGrid& pg) {
  static std::mutex mutex;
  static std::map<TableKey, std::unique_ptr<Tables>> cache;

  const TableKey key{pg.q_axis.n, pg.q_axis.origin, pg.q_axis.step, pg.p_axis.origin,
                     pg.p_axis.step};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  auto t = std::make_unique<Tables>();
  const std::size_t n = pg.q_axis.n;
  const double dq = pg.q_axis.step;
  const double dp = pg.p_axis.step;
  t->n = n;
  t->win_q.resize(n);
  t->win_p.resize(n);
  for (std::size_t d = 0; d < n; ++d) {
    const double xq = static_cast<double>(d) * dq;
    const double xp = static_cast<double>(d) * dp;
    t->win_q[d] = std::exp(-0.5 * xq * xq);
    t->win_p[d] = std::exp(-0.5 * xp * xp);
  }
  t->half.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    const double qj = pg.q_axis.sample(j);
    for (std::size_t k = 0; k < n; ++k)
      t->half[j * n + k] = std::polar(1.0, 0.5 * qj * pg.p_axis.sample(k));
  }
  t->mom_shift.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    t->mom_shift[k] = std::polar(1.0, -pg.q_axis.origin * pg.p_axis.sample(k));
  t->omega.resize(n);
  for (std::size_t u = 0; u < n; ++u)
    t->omega[u] = std::polar(1.0, 2.0 * kPi * static_cast<double>(u) / static_cast<double>(n));
  t->base_pos.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    t->base_pos[k] = std::polar(1.0, pg.q_axis.origin * dp * static_cast<double>(k));

  const Tables& ref = *t;
  cache.emplace(key, std::move(t));
  return ref;
}

void require_phase_grid(const PhaseGrid& pg, const char* what) {
  if (!is_conjugate_pair(pg))
    throw InvalidInput(std::string(what) + ": phase grid is not a conjugate (q,p) pair");
}

void require_q_match(const WaveFn& psi, const PhaseGrid& pg, const char* what) {
  require_phase_grid(pg, what);
  if (psi.grid != pg.q_axis)
    throw InvalidInput(std::string(what) + ": psi grid does not match the q axis");
}

void require_p_match(const WaveFn& psi, const PhaseGrid& pg, const char* what) {
  require_phase_grid(pg, what);
  if (psi.grid != pg.p_axis)
    throw InvalidInput(std::string(what) + ": psi grid does not match the p axis");
}

std::size_t wrap_mod(long long v, std::size_t n) {
  const long long m = static_cast<long long>(n);
  long long r = v % m;
  if (r < 0) r += m;
  return static_cast<std::size_t>(r);
}

}  // namespace

const std::vector<Complex>& half_phase_table(const PhaseGrid& pg) {
  require_phase_grid(pg, "half_phase_table");
  return tables_for(pg).half;
}

PhaseField psi_to_qp(const WaveFn& psi, const PhaseGrid& pg, Impl impl) {
  require_q_match(psi, pg, "psi_to_qp");
  const Tables& t = tables_for(pg);
  const std::size_t n = t.n;
  const double dq = pg.q_axis.step;
  PhaseField out = make_phase_field(pg);

  if (impl == Impl::fast) {
    parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
      std::vector<Complex> v(n), x(n);
      for (std::size_t m = lo; m < hi; ++m) {
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t d = m > j ? m - j : j - m;
          v[j] = static_cast<double>(parity(j)) * t.win_q[d] * psi.values[j];
        }
        fft::dft(v, x, -1);
        Complex* row = out.values.data() + m * n;
        const Complex* half_row = t.half.data() + m * n;
        for (std::size_t k = 0; k < n; ++k)
          row[k] = kGaborNorm * dq * x[k] * t.mom_shift[k] * half_row[k];
      }
    });
  } else {
    parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t m = lo; m < hi; ++m) {
        const double qm = pg.q_axis.sample(m);
        Complex* row = out.values.data() + m * n;
        for (std::size_t k = 0; k < n; ++k) {
          const double pk = pg.p_axis.sample(k);
          Complex s{0.0, 0.0};
          for (std::size_t j = 0; j < n; ++j) {
            const double qj = pg.q_axis.sample(j);
            const double w = std::exp(-0.5 * (qm - qj) * (qm - qj));
            s += w * psi.values[j] * std::polar(1.0, -qj * pk);
          }
          row[k] = kGaborNorm * dq * std::polar(1.0, 0.5 * qm * pk) * s;
        }
      }
    });
  }
  ensure_finite(out.values, "psi_to_qp");
  return out;
}

PhaseField psi_p_to_qp(const WaveFn& psi_p, const PhaseGrid& pg, Impl impl) {
  require_p_match(psi_p, pg, "psi_p_to_qp");
  const Tables& t = tables_for(pg);
  const std::size_t n = t.n;
  const double dp = pg.p_axis.step;
  PhaseField out = make_phase_field(pg);

  if (impl == Impl::fast) {
    // Column k of the output needs sum_l win_p(k,l) psi(p_l) e^{+i q_m p_l};
    // with e^{i q_m p_l} = e^{i q0 p_l} (-1)^m e^{2 pi i m l / n} this is one
    // backward DFT per column.
    parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
      std::vector<Complex> u(n), y(n);
      for (std::size_t k = lo; k < hi; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
          const std::size_t d = k > l ? k - l : l - k;
          u[l] = t.win_p[d] * psi_p.values[l] * std::conj(t.mom_shift[l]);
        }
        fft::dft(u, y, +1);
        for (std::size_t m = 0; m < n; ++m) {
          const Complex val = kGaborNorm * dp * static_cast<double>(parity(m)) * y[m] *
                              std::conj(t.half[m * n + k]);
          out.values[m * n + k] = val;
        }
      }
    });
  } else {
    parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t m = lo; m < hi; ++m) {
        const double qm = pg.q_axis.sample(m);
        Complex* row = out.values.data() + m * n;
        for (std::size_t k = 0; k < n; ++k) {
          const double pk = pg.p_axis.sample(k);
          Complex s{0.0, 0.0};
          for (std::size_t l = 0; l < n; ++l) {
            const double pl = pg.p_axis.sample(l);
            const double w = std::exp(-0.5 * (pk - pl) * (pk - pl));
            s += w * psi_p.values[l] * std::polar(1.0, qm * pl);
          }
          row[k] = kGaborNorm * dp * std::polar(1.0, -0.5 * qm * pk) * s;
        }
      }
    });
  }
  ensure_finite(out.values, "psi_p_to_qp");
  return out;
}

WaveFn qp_to_psi_q(const PhaseField& qp) {
  require_phase_grid(qp.grid, "qp_to_psi_q");
  const Tables& t = tables_for(qp.grid);
  const std::size_t n = t.n;
  WaveFn psi = make_wavefn(qp.grid.q_axis);
  const double dp = qp.grid.p_axis.step;
  for (std::size_t m = 0; m < n; ++m) {
    const Complex* row = qp.values.data() + m * n;
    const Complex* half_row = t.half.data() + m * n;
    Complex s{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) s += row[k] * half_row[k];
    psi.values[m] = kBackNorm * dp * s;
  }
  ensure_finite(psi.values, "qp_to_psi_q");
  return psi;
}

WaveFn qp_to_psi_p(const PhaseField& qp) {
  require_phase_grid(qp.grid, "qp_to_psi_p");
  const Tables& t = tables_for(qp.grid);
  const std::size_t n = t.n;
  WaveFn psi = make_wavefn(qp.grid.p_axis);
  const double dq = qp.grid.q_axis.step;
  // stream row-major and accumulate per column; summation order over m is
  // fixed, so results do not depend on scheduling
  for (std::size_t m = 0; m < n; ++m) {
    const Complex* row = qp.values.data() + m * n;
    const Complex* half_row = t.half.data() + m * n;
    Complex* acc = psi.values.data();
    for (std::size_t k = 0; k < n; ++k) acc[k] += row[k] * std::conj(half_row[k]);
  }
  for (std::size_t k = 0; k < n; ++k) psi.values[k] *= kBackNorm * dq;
  ensure_finite(psi.values, "qp_to_psi_p");
  return psi;
}

PhaseField psi_to_kirkwood(const WaveFn& psi, const PhaseGrid& pg, Impl impl) {
  require_q_match(psi, pg, "psi_to_kirkwood");
  const std::size_t n = pg.q_axis.n;
  PhaseField out = make_phase_field(pg);

  std::vector<Complex> ft(n);
  if (impl == Impl::fast) {
    WaveFn psi_p = fourier_q_to_p(psi, pg.p_axis);
    ft = std::move(psi_p.values);
  } else {
    const double scale = pg.q_axis.step / std::sqrt(2.0 * kPi);
    for (std::size_t k = 0; k < n; ++k) {
      const double pk = pg.p_axis.sample(k);
      Complex s{0.0, 0.0};
      for (std::size_t j = 0; j < n; ++j)
        s += psi.values[j] * std::polar(1.0, -pg.q_axis.sample(j) * pk);
      ft[k] = scale * s;
    }
  }

  for (std::size_t m = 0; m < n; ++m) {
    const Complex conj_psi = std::conj(psi.values[m]);
    Complex* row = out.values.data() + m * n;
    for (std::size_t k = 0; k < n; ++k) row[k] = conj_psi * ft[k];
  }
  ensure_finite(out.values, "psi_to_kirkwood");
  return out;
}

PhaseField qp_to_kirkwood(const PhaseField& qp, Impl impl) {
  require_phase_grid(qp.grid, "qp_to_kirkwood");
  const Tables& t = tables_for(qp.grid);
  const std::size_t n = t.n;
  const double dq = qp.grid.q_axis.step;
  const double dp = qp.grid.p_axis.step;
  PhaseField out = make_phase_field(qp.grid);

  if (impl == Impl::fast) {
    // The double integral factorizes into two 1-D sums and an outer product.
    std::vector<Complex> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
      Complex s{0.0, 0.0};
      for (std::size_t j = 0; j < n; ++j)
        s += qp.values[j * n + k] * std::conj(t.half[j * n + k]);
      a[k] = s * dq;
    }
    for (std::size_t m = 0; m < n; ++m) {
      const Complex* row = qp.values.data() + m * n;
      const Complex* half_row = t.half.data() + m * n;
      Complex s{0.0, 0.0};
      for (std::size_t l = 0; l < n; ++l) s += row[l] * half_row[l];
      b[m] = s * dp;
    }
    for (std::size_t m = 0; m < n; ++m) {
      const Complex bm = std::conj(b[m]) * kKirkwoodNorm;
      Complex* row = out.values.data() + m * n;
      for (std::size_t k = 0; k < n; ++k) row[k] = bm * a[k];
    }
  } else {
    parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t m = lo; m < hi; ++m) {
        const double qm = qp.grid.q_axis.sample(m);
        Complex* row = out.values.data() + m * n;
        for (std::size_t k = 0; k < n; ++k) {
          const double pk = qp.grid.p_axis.sample(k);
          Complex s{0.0, 0.0};
          for (std::size_t j = 0; j < n; ++j) {
            const double qj = qp.grid.q_axis.sample(j);
            for (std::size_t l = 0; l < n; ++l) {
              const double pl = qp.grid.p_axis.sample(l);
              s += qp.values[j * n + k] * std::conj(qp.values[m * n + l]) *
                   std::polar(1.0, -0.5 * (qj * pk + qm * pl));
            }
          }
          row[k] = kKirkwoodNorm * dq * dp * s;
        }
      }
    });
  }
  ensure_finite(out.values, "qp_to_kirkwood");
  return out;
}

std::vector<Complex> half_step_refine(const WaveFn& psi) {
  if (psi.grid.axis_kind != AxisKind::position)
    throw InvalidInput("half_step_refine: expected a position-space state");
  const std::size_t n = psi.grid.n;
  const Grid1D p_axis = conjugate_momentum_grid(psi.grid);
  WaveFn spec = fourier_q_to_p(psi, p_axis);
  // Shift by half a step in position space: multiply the spectrum by
  // e^{+i (dq/2) p_k}.
  for (std::size_t k = 0; k < n; ++k)
    spec.values[k] *= std::polar(1.0, 0.5 * psi.grid.step * p_axis.sample(k));
  WaveFn half = fourier_p_to_q(spec, psi.grid);

  std::vector<Complex> fine(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    fine[2 * j] = psi.values[j];
    fine[2 * j + 1] = half.values[j];
  }
  return fine;
}

RealField psi_to_wigner(const WaveFn& psi, const PhaseGrid& pg, Impl impl) {
  require_q_match(psi, pg, "psi_to_wigner");
  const Tables& t = tables_for(pg);
  const std::size_t n = t.n;
  const double dq = pg.q_axis.step;
  const std::vector<Complex> fine = half_step_refine(psi);
  RealField out = make_real_field(pg);
  double residue = 0.0;
  std::mutex residue_mutex;

  const double scale = dq / (2.0 * kPi);
  if (impl == Impl::fast) {
    parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
      std::vector<Complex> folded(n), x(n);
      double local_res = 0.0;
      for (std::size_t m = lo; m < hi; ++m) {
        std::fill(folded.begin(), folded.end(), Complex{0.0, 0.0});
        const long long fm = 2 * static_cast<long long>(m);
        const long long lmax = std::min<long long>(fm, 2 * static_cast<long long>(n) - 1 - fm);
        for (long long l = -lmax; l <= lmax; ++l) {
          const Complex d = fine[static_cast<std::size_t>(fm + l)] *
                            std::conj(fine[static_cast<std::size_t>(fm - l)]);
          const std::size_t r = wrap_mod(l, n);
          folded[r] += (l & 1) ? -d : d;
        }
        fft::dft(folded, x, -1);
        double* row = out.values.data() + m * n;
        for (std::size_t k = 0; k < n; ++k) {
          row[k] = scale * x[k].real();
          local_res = std::max(local_res, std::abs(scale * x[k].imag()));
        }
      }
      std::lock_guard<std::mutex> lock(residue_mutex);
      residue = std::max(residue, local_res);
    });
  } else {
    parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
      double local_res = 0.0;
      for (std::size_t m = lo; m < hi; ++m) {
        const long long fm = 2 * static_cast<long long>(m);
        const long long lmax = std::min<long long>(fm, 2 * static_cast<long long>(n) - 1 - fm);
        double* row = out.values.data() + m * n;
        for (std::size_t k = 0; k < n; ++k) {
          const double pk = pg.p_axis.sample(k);
          Complex s{0.0, 0.0};
          for (long long l = -lmax; l <= lmax; ++l) {
            const Complex d = fine[static_cast<std::size_t>(fm + l)] *
                              std::conj(fine[static_cast<std::size_t>(fm - l)]);
            s += d * std::polar(1.0, -static_cast<double>(l) * dq * pk);
          }
          row[k] = scale * s.real();
          local_res = std::max(local_res, std::abs(scale * s.imag()));
        }
      }
      std::lock_guard<std::mutex> lock(residue_mutex);
      residue = std::max(residue, local_res);
    });
  }
  if (residue > kWignerResidueTol)
    throw NumericalFailure("psi_to_wigner: imaginary residue " + std::to_string(residue) +
                           " above threshold");
  ensure_finite(out.values, "psi_to_wigner");
  return out;
}

RealField qp_to_wigner_1d(const PhaseField& qp, Impl impl) {
  require_phase_grid(qp.grid, "qp_to_wigner_1d");
  const Tables& t = tables_for(qp.grid);
  const std::size_t n = t.n;
  const double dq = qp.grid.q_axis.step;
  const double dp = qp.grid.p_axis.step;
  const double scale = dq * dp / kPi;
  RealField out = make_real_field(qp.grid);
  double residue = 0.0;
  std::mutex residue_mutex;

  if (impl == Impl::fast) {
    // Per output row m and offset a, the ups-sum is a linear convolution of
    // the chirped row (m-a) with the conjugated row (m+a), evaluated at even
    // indices. Row spectra of the conjugated rows are cached once.
    const std::size_t nc = 2 * n;  // convolution length
    std::vector<std::vector<Complex>> zhat(n, std::vector<Complex>(nc));
    parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
      std::vector<Complex> zp(nc);
      for (std::size_t r = lo; r < hi; ++r) {
        std::fill(zp.begin(), zp.end(), Complex{0.0, 0.0});
        for (std::size_t c = 0; c < n; ++c) zp[c] = std::conj(qp.values[r * n + c]);
        fft::dft(zp, zhat[r], -1);
      }
    });

    parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
      std::vector<Complex> up(nc), uhat(nc), conv(nc), acc(n);
      std::vector<Complex> chirp(n);
      double local_res = 0.0;
      for (std::size_t m = lo; m < hi; ++m) {
        // chirp_m[c] = e^{+i q_m dp c}
        for (std::size_t c = 0; c < n; ++c)
          chirp[c] = t.base_pos[c] * t.omega[(m * c) % n];
        std::fill(acc.begin(), acc.end(), Complex{0.0, 0.0});
        const long long amax = std::min<long long>(m, n - 1 - m);
        for (long long a = -amax; a <= amax; ++a) {
          const std::size_t row_lo = static_cast<std::size_t>(static_cast<long long>(m) - a);
          const std::size_t row_hi = static_cast<std::size_t>(static_cast<long long>(m) + a);
          std::fill(up.begin(), up.end(), Complex{0.0, 0.0});
          const Complex* x = qp.values.data() + row_lo * n;
          for (std::size_t c = 0; c < n; ++c) up[c] = x[c] * chirp[c];
          fft::dft(up, uhat, -1);
          const std::vector<Complex>& zh = zhat[row_hi];
          for (std::size_t s = 0; s < nc; ++s) uhat[s] *= zh[s];
          fft::dft(uhat, conv, +1);
          const double inv = 1.0 / static_cast<double>(nc);
          // e^{+i p_k a dq} = (-1)^a omega[(a k) % n]
          const double asign = (a & 1) ? -1.0 : 1.0;
          for (std::size_t k = 0; k < n; ++k) {
            const std::size_t idx = wrap_mod(a * static_cast<long long>(k), n);
            acc[k] += asign * t.omega[idx] * conv[2 * k] * inv;
          }
        }
        double* row = out.values.data() + m * n;
        for (std::size_t k = 0; k < n; ++k) {
          // e^{-i q_m dp k} = conj(chirp_m[k])
          const Complex w = std::conj(chirp[k]) * acc[k] * scale;
          row[k] = w.real();
          local_res = std::max(local_res, std::abs(w.imag()));
        }
      }
      std::lock_guard<std::mutex> lock(residue_mutex);
      residue = std::max(residue, local_res);
    });
  } else {
    parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
      double local_res = 0.0;
      for (std::size_t m = lo; m < hi; ++m) {
        const double qm = qp.grid.q_axis.sample(m);
        const long long amax = std::min<long long>(m, n - 1 - m);
        double* row = out.values.data() + m * n;
        for (std::size_t k = 0; k < n; ++k) {
          const double pk = qp.grid.p_axis.sample(k);
          const long long bmax = std::min<long long>(k, n - 1 - k);
          Complex s{0.0, 0.0};
          for (long long a = -amax; a <= amax; ++a) {
            const Complex* lo_row = qp.values.data() + (m - a) * n;
            const Complex* hi_row = qp.values.data() + (m + a) * n;
            const double xi = static_cast<double>(a) * dq;
            for (long long b = -bmax; b <= bmax; ++b) {
              const double ups = static_cast<double>(b) * dp;
              s += lo_row[k - b] * std::conj(hi_row[k + b]) *
                   std::polar(1.0, -(qm * ups - pk * xi));
            }
          }
          const Complex w = s * scale;
          row[k] = w.real();
          local_res = std::max(local_res, std::abs(w.imag()));
        }
      }
      std::lock_guard<std::mutex> lock(residue_mutex);
      residue = std::max(residue, local_res);
    });
  }
  if (residue > kWignerResidueTol)
    throw NumericalFailure("qp_to_wigner_1d: imaginary residue " + std::to_string(residue) +
                           " above threshold");
  ensure_finite(out.values, "qp_to_wigner_1d");
  return out;
}

PhaseField phase_identity(const PhaseField& qp, Impl impl) {
  require_phase_grid(qp.grid, "phase_identity");
  const Tables& t = tables_for(qp.grid);
  const std::size_t n = t.n;
  const double c = qp.grid.q_axis.step * qp.grid.p_axis.step / (4.0 * kPi);
  PhaseField out = make_phase_field(qp.grid);

  if (impl == Impl::fast) {
    // out = c * H . (rho^T . conj(H)) with H[j][k] = e^{+i q_j p_k / 2}.
    std::vector<Complex> rho_t(n * n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < n; ++l) rho_t[l * n + j] = qp.values[j * n + l];

    std::vector<Complex> a(n * n);
    parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t l = lo; l < hi; ++l) {
        Complex* arow = a.data() + l * n;
        for (std::size_t j = 0; j < n; ++j) {
          const Complex v = rho_t[l * n + j];
          const Complex* hrow = t.half.data() + j * n;
          for (std::size_t k = 0; k < n; ++k) arow[k] += v * std::conj(hrow[k]);
        }
      }
    });
    parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t m = lo; m < hi; ++m) {
        Complex* orow = out.values.data() + m * n;
        const Complex* hrow = t.half.data() + m * n;
        for (std::size_t l = 0; l < n; ++l) {
          const Complex v = hrow[l];
          const Complex* arow = a.data() + l * n;
          for (std::size_t k = 0; k < n; ++k) orow[k] += v * arow[k];
        }
        for (std::size_t k = 0; k < n; ++k) orow[k] *= c;
      }
    });
  } else {
    parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t m = lo; m < hi; ++m) {
        Complex* orow = out.values.data() + m * n;
        const Complex* hm = t.half.data() + m * n;
        for (std::size_t k = 0; k < n; ++k) {
          Complex s{0.0, 0.0};
          for (std::size_t j = 0; j < n; ++j) {
            const Complex hj = std::conj(t.half[j * n + k]);
            const Complex* rrow = qp.values.data() + j * n;
            for (std::size_t l = 0; l < n; ++l) s += rrow[l] * hm[l] * hj;
          }
          orow[k] = c * s;
        }
      }
    });
  }
  ensure_finite(out.values, "phase_identity");
  return out;
}

PhaseField gabor_no_phase(const WaveFn& psi, const PhaseGrid& pg, Impl impl) {
  PhaseField rho = psi_to_qp(psi, pg, impl);
  const Tables& t = tables_for(pg);
  const std::size_t n = t.n;
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t k = 0; k < n; ++k) rho.values[m * n + k] *= std::conj(t.half[m * n + k]);
  return rho;
}

}  // namespace qpdyn
