#pragma once

#include <bit>
#include <cstdint>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

#include "kmono/core.hpp"

namespace kmono {

// Fourier coefficients over {±1}^d indexed by subset mask S:
// coeffs[S] = E_x[χ_S(x) f(x)] with χ_S(x) = (-1)^popcount(S & x).
template <typename Scalar = double>
struct Spectrum {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  int d = 0;
  Vector coeffs;

  Scalar operator[](Mask s) const { return coeffs[static_cast<Eigen::Index>(s)]; }
  Scalar weight() const { return coeffs.squaredNorm(); }
};

using SpectrumView = Spectrum<double>;

inline constexpr int chi(Mask s, Mask x) noexcept { return (std::popcount(s & x) & 1) ? -1 : 1; }

// Unnormalized in-place butterfly; applying it twice multiplies by 2^d.
template <typename Derived>
void fwht_inplace(Eigen::DenseBase<Derived>& v) {
  const Eigen::Index n = v.size();
  if (n & (n - 1)) throw std::invalid_argument("fwht_inplace: length must be a power of two");
  for (Eigen::Index h = 1; h < n; h *= 2) {
    for (Eigen::Index i = 0; i < n; i += 2 * h) {
      for (Eigen::Index j = i; j < i + h; ++j) {
        const auto a = v(j);
        const auto b = v(j + h);
        v(j) = a + b;
        v(j + h) = a - b;
      }
    }
  }
}

// ±1 view of a Boolean table: value 1 ↦ +1, value 0 ↦ -1.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> to_pm1(const FunctionTable& f) {
  if (f.r() != 2) throw std::invalid_argument("to_pm1: table must be Boolean (r = 2)");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(static_cast<Eigen::Index>(f.size()));
  for (std::uint64_t x = 0; x < f.size(); ++x) out[static_cast<Eigen::Index>(x)] = f[x] ? Scalar(1) : Scalar(-1);
  return out;
}

// Inverse of to_pm1; non-negative entries map to 1.
template <typename Derived>
FunctionTable from_pm1(const Eigen::DenseBase<Derived>& pm, int d) {
  return FunctionTable::tabulate(Domain::hypercube(d), 2, [&](std::uint64_t x) {
    return pm(static_cast<Eigen::Index>(x)) >= 0 ? 1 : 0;
  });
}

// Normalized transform: coeffs[S] = 2^-d Σ_x χ_S(x) f(x).
template <typename Derived>
Spectrum<typename Derived::Scalar> wht(const Eigen::DenseBase<Derived>& f) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = f.size();
  if (n <= 0 || (n & (n - 1))) throw std::invalid_argument("wht: length must be a power of two");
  Spectrum<Scalar> spec;
  spec.d = std::countr_zero(static_cast<std::uint64_t>(n));
  if (spec.d > kMaxCubeDim) throw std::invalid_argument("wht: d exceeds 26");
  spec.coeffs = f.derived().template cast<Scalar>();
  fwht_inplace(spec.coeffs);
  spec.coeffs /= static_cast<Scalar>(n);
  return spec;
}

// f(x) = Σ_S coeffs[S] χ_S(x).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inverse_wht(const Spectrum<Scalar>& spec) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = spec.coeffs;
  fwht_inplace(out);
  return out;
}

// Σ_{|S| > tau} coeffs[S]^2.
template <typename Scalar>
Scalar spectral_tail(const Spectrum<Scalar>& spec, int tau) {
  if (tau < 0 || tau > spec.d) throw std::invalid_argument("spectral_tail: tau must lie in [0, d]");
  Scalar tail = 0;
  for (Eigen::Index s = 0; s < spec.coeffs.size(); ++s)
    if (std::popcount(static_cast<std::uint64_t>(s)) > tau) tail += spec.coeffs[s] * spec.coeffs[s];
  return tail;
}

// CSV rows "mask,popcount,coefficient".
template <typename Scalar>
void write_spectrum_csv(std::ostream& out, const Spectrum<Scalar>& spec) {
  out << "mask,popcount,coefficient\n";
  const auto old = out.precision(17);
  for (Eigen::Index s = 0; s < spec.coeffs.size(); ++s)
    out << s << ',' << std::popcount(static_cast<std::uint64_t>(s)) << ',' << spec.coeffs[s] << '\n';
  out.precision(old);
}

}  // namespace kmono
