#include "msgp/lattice.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "msgp/error.hpp"

namespace msgp {

namespace {

// The FFTW planner is not re-entrant; plan execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct DftPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit DftPlans(const std::vector<std::size_t>& sizes, std::size_t total) {
    std::vector<int> n(sizes.begin(), sizes.end());
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* buf = fftw_alloc_complex(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, FFTW_FORWARD, flags);
    backward = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, FFTW_BACKWARD, flags);
    fftw_free(buf);
    if (!forward || !backward) fail(ErrorKind::numerical, "FFTW failed to create a plan");
  }
  ~DftPlans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  DftPlans(const DftPlans&) = delete;
  DftPlans& operator=(const DftPlans&) = delete;
};

Lattice::Lattice(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) fail(ErrorKind::config, "lattice needs at least one dimension");
  for (auto m : sizes_) {
    if (m < 2 || m % 2 != 0) {
      fail(ErrorKind::config, "lattice sizes must be even (got " + std::to_string(m) + ")");
    }
  }
  const std::size_t d = sizes_.size();
  strides_.assign(d, 1);
  for (std::size_t l = d; l-- > 1;) strides_[l - 1] = strides_[l] * sizes_[l];
  total_ = strides_[0] * sizes_[0];

  mirror_.resize(total_);
  phase_.resize(total_);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < total_; ++flat) {
    std::size_t mirrored = 0;
    double angle = 0.0;
    for (std::size_t l = 0; l < d; ++l) {
      mirrored += (sizes_[l] - 1 - idx[l]) * strides_[l];
      const double m = static_cast<double>(sizes_[l]);
      angle -= static_cast<double>(idx[l]) * std::numbers::pi * (1.0 - m) / m;
    }
    mirror_[flat] = mirrored;
    phase_[flat] = std::polar(1.0, angle);
    if (idx[0] >= sizes_[0] / 2) half_.push_back(flat);
    for (std::size_t l = d; l-- > 0;) {
      if (++idx[l] < sizes_[l]) break;
      idx[l] = 0;
    }
  }
  plans_ = std::make_shared<const DftPlans>(sizes_, total_);
}

std::size_t Lattice::flatten(std::span<const std::size_t> index) const {
  if (index.size() != dims()) fail(ErrorKind::data, "site index has wrong dimension");
  std::size_t flat = 0;
  for (std::size_t l = 0; l < dims(); ++l) {
    if (index[l] >= sizes_[l]) fail(ErrorKind::data, "site index outside the lattice");
    flat += index[l] * strides_[l];
  }
  return flat;
}

std::vector<std::size_t> Lattice::unflatten(std::size_t flat) const {
  std::vector<std::size_t> out(dims());
  for (std::size_t l = 0; l < dims(); ++l) {
    out[l] = flat / strides_[l];
    flat %= strides_[l];
  }
  return out;
}

double Lattice::frequency(std::size_t dim, std::size_t t) const {
  const double m = static_cast<double>(sizes_[dim]);
  return 2.0 * std::numbers::pi * (static_cast<double>(t) - m / 2.0 + 0.5) / m;
}

void Lattice::frequency(std::size_t flat, std::span<double> out) const {
  for (std::size_t l = 0; l < dims(); ++l) {
    out[l] = frequency(l, flat / strides_[l]);
    flat %= strides_[l];
  }
}

void Lattice::forward(std::span<const Complex> sites, std::span<Complex> freqs) const {
  if (sites.size() != total_ || freqs.size() != total_) {
    fail(ErrorKind::data, "dft_forward: expected " + std::to_string(total_) + " values, got " +
                              std::to_string(sites.size()));
  }
  for (std::size_t i = 0; i < total_; ++i) freqs[i] = sites[i] * phase_[i];
  auto* buf = reinterpret_cast<fftw_complex*>(freqs.data());
  fftw_execute_dft(plans_->forward, buf, buf);
  const double scale = 1.0 / std::sqrt(static_cast<double>(total_));
  for (auto& v : freqs) v *= scale;
}

void Lattice::inverse(std::span<const Complex> freqs, std::span<Complex> sites) const {
  if (sites.size() != total_ || freqs.size() != total_) {
    fail(ErrorKind::data, "dft_inverse: expected " + std::to_string(total_) + " values, got " +
                              std::to_string(freqs.size()));
  }
  if (sites.data() != freqs.data()) std::copy(freqs.begin(), freqs.end(), sites.begin());
  auto* buf = reinterpret_cast<fftw_complex*>(sites.data());
  fftw_execute_dft(plans_->backward, buf, buf);
  const double scale = 1.0 / std::sqrt(static_cast<double>(total_));
  for (std::size_t i = 0; i < total_; ++i) sites[i] *= std::conj(phase_[i]) * scale;
}

Lattice build_lattice(std::vector<std::size_t> sizes) { return Lattice(std::move(sizes)); }

std::vector<Complex> dft_forward(const Lattice& lattice, std::span<const Complex> sites) {
  std::vector<Complex> out(lattice.size());
  lattice.forward(sites, out);
  return out;
}

std::vector<Complex> dft_inverse(const Lattice& lattice, std::span<const Complex> freqs) {
  std::vector<Complex> out(lattice.size());
  lattice.inverse(freqs, out);
  return out;
}

}  // namespace msgp
