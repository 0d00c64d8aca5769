#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace msgp {

using Complex = std::complex<double>;

struct DftPlans;

// Regular site grid X = {0..m_1-1} x ... x {0..m_d-1} paired with the
// half-integer-shifted frequency grid W, w_l(t) = 2*pi*(t - m_l/2 + 1/2)/m_l.
// No frequency coordinate is ever 0 or +-pi, so w -> -w is a fixed-point-free
// involution on W.
//
// Flat indices are row-major (last dimension fastest) for both grids; the
// frequency with multi-index t is stored at the same flat position as the site
// with multi-index t.
//
// The unitary transform Q has entries exp(j x.w) / sqrt(|W|). forward() applies
// Q* (sites -> frequencies) and inverse() applies Q. Copies share FFT plans and
// are safe to use concurrently.
class Lattice {
 public:
  explicit Lattice(std::vector<std::size_t> sizes);

  std::size_t dims() const { return sizes_.size(); }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t size() const { return total_; }

  std::size_t flatten(std::span<const std::size_t> index) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;

  double frequency(std::size_t dim, std::size_t t) const;
  // All d coordinates of the frequency at flat index `flat`.
  void frequency(std::size_t flat, std::span<double> out) const;

  // Flat index of -w.
  std::size_t mirror(std::size_t flat) const { return mirror_[flat]; }
  // Canonical half-space {w in W : w_1 > 0}, in increasing flat order. Every
  // frequency is either in it or the mirror of exactly one member.
  const std::vector<std::size_t>& half_space() const { return half_; }

  void forward(std::span<const Complex> sites, std::span<Complex> freqs) const;
  void inverse(std::span<const Complex> freqs, std::span<Complex> sites) const;

  bool operator==(const Lattice& other) const { return sizes_ == other.sizes_; }
  bool operator!=(const Lattice& other) const { return !(*this == other); }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 1;
  std::vector<std::size_t> mirror_;
  std::vector<std::size_t> half_;
  std::vector<Complex> phase_;  // exp(-j x.c), c_l = pi(1 - m_l)/m_l
  std::shared_ptr<const DftPlans> plans_;
};

Lattice build_lattice(std::vector<std::size_t> sizes);

std::vector<Complex> dft_forward(const Lattice& lattice, std::span<const Complex> sites);
std::vector<Complex> dft_inverse(const Lattice& lattice, std::span<const Complex> freqs);

}  // namespace msgp
