#include "ofm/core/spectral.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace ofm {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
constexpr std::complex<double> kI{0.0, 1.0};

/* Forward DFT matrix, rows = frequencies 0..n_rows-1. */
MatrixXcd dft_rows(int n, int n_rows) {
  MatrixXcd e(n_rows, n);
  for (int k = 0; k < n_rows; ++k)
    for (int j = 0; j < n; ++j)
      e(k, j) = std::exp(-2.0 * M_PI * kI * (double(j) * double(k) / double(n)));
  return e;
}

MatrixXcd dft_half(int n) { return dft_rows(n, n / 2 + 1); }
MatrixXcd dft_full(int n) { return dft_rows(n, n); }

double pair_weight(int k, int n) { return (k == 0 || 2 * k == n) ? 1.0 : 2.0; }

/* Inverse matrix for the halved axis: folds 1/n and pairing weights. */
MatrixXcd idft_half(int n) {
  int nk = n / 2 + 1;
  MatrixXcd g(n, nk);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < nk; ++k)
      g(j, k) = pair_weight(k, n) / double(n) *
                std::exp(2.0 * M_PI * kI * (double(j) * double(k) / double(n)));
  return g;
}

/* Inverse matrix for a full axis: 1/n, no pairing. */
MatrixXcd idft_full(int n) {
  MatrixXcd g(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      g(j, k) = std::exp(2.0 * M_PI * kI * (double(j) * double(k) / double(n))) / double(n);
  return g;
}

}  // namespace

SpectralCoeffs spectral_forward(const MatrixXd& values, const GridSpec& grid) {
  grid.validate();
  if (values.rows() != grid.points())
    throw std::invalid_argument("spectral_forward: values rows != grid points");
  SpectralCoeffs out;
  out.grid = grid;
  int ch = int(values.cols());
  if (grid.dim == 1) {
    out.c.noalias() = dft_half(grid.shape[0]) * values;
  } else {
    int nx = grid.shape[0], ny = grid.shape[1], ky = ny / 2 + 1;
    MatrixXcd ex = dft_full(nx), eyt = dft_half(ny).transpose();
    out.c.resize(nx * ky, ch);
    for (int c = 0; c < ch; ++c) {
      Eigen::Map<const RowMat> v(values.col(c).data(), nx, ny);
      MatrixXcd cc = ex * v * eyt;  // nx x ky
      for (int ix = 0; ix < nx; ++ix) out.c.block(ix * ky, c, ky, 1) = cc.row(ix).transpose();
    }
  }
  return out;
}

MatrixXd spectral_inverse(const SpectralCoeffs& coeffs) {
  const GridSpec& grid = coeffs.grid;
  grid.validate();
  int ch = int(coeffs.c.cols());
  MatrixXd out(grid.points(), ch);
  if (grid.dim == 1) {
    int n = grid.shape[0];
    if (coeffs.c.rows() != n / 2 + 1)
      throw std::invalid_argument("spectral_inverse: coefficient rows mismatch grid");
    out = (idft_half(n) * coeffs.c).real();
  } else {
    int nx = grid.shape[0], ny = grid.shape[1], ky = ny / 2 + 1;
    if (coeffs.c.rows() != nx * ky)
      throw std::invalid_argument("spectral_inverse: coefficient rows mismatch grid");
    MatrixXcd gx = idft_full(nx), gyt = idft_half(ny).transpose();
    for (int c = 0; c < ch; ++c) {
      MatrixXcd cc(nx, ky);
      for (int ix = 0; ix < nx; ++ix) cc.row(ix) = coeffs.c.block(ix * ky, c, ky, 1).transpose();
      RowMat v = (gx * cc * gyt).real();
      out.col(c) = Eigen::Map<const Eigen::VectorXd>(v.data(), nx * ny);
    }
  }
  return out;
}

int max_modes(const GridSpec& grid, int d) {
  if (grid.dim == 1) return grid.shape[0] / 2 + 1;
  if (d == 0) return grid.shape[0] / 2;          // signed pairs need 2*m0 <= nx
  return grid.shape[1] / 2 + 1;
}

namespace {

std::unique_ptr<SpectralBasis> build_basis(const GridSpec& grid, ModeSpec modes) {
  auto b = std::make_unique<SpectralBasis>();
  b->grid = grid;
  b->modes = modes;
  int m = grid.points();
  b->inv_points = 1.0 / double(m);

  struct Slot {
    double fx, fy;  // frequency in index units per dim
    double w;       // pairing weight
  };
  std::vector<Slot> slots;
  if (grid.dim == 1) {
    int n = grid.shape[0];
    if (modes.m0 < 1 || modes.m0 > max_modes(grid, 0))
      throw std::invalid_argument("spectral_basis: 1d mode count out of range");
    for (int k = 0; k < modes.m0; ++k) slots.push_back({double(k), 0.0, pair_weight(k, n)});
  } else {
    int nx = grid.shape[0], ny = grid.shape[1];
    if (modes.m0 < 1 || modes.m0 > max_modes(grid, 0) || modes.m1 < 1 ||
        modes.m1 > max_modes(grid, 1))
      throw std::invalid_argument("spectral_basis: 2d mode count out of range");
    std::vector<int> kxs;
    for (int k = 0; k < modes.m0; ++k) kxs.push_back(k);
    for (int k = -modes.m0; k < 0; ++k) kxs.push_back(k);
    for (int kx : kxs)
      for (int ky = 0; ky < modes.m1; ++ky)
        slots.push_back({double(kx), double(ky), pair_weight(ky, ny)});
  }
  int s = int(slots.size());
  b->slots = s;
  b->Tre.resize(s, m);
  b->Tim.resize(s, m);
  b->Gre.resize(m, s);
  b->Gim.resize(m, s);
  b->wslot.resize(s);

  for (int i = 0; i < s; ++i) b->wslot[i] = slots[i].w;
  for (int i = 0; i < s; ++i) {
    for (int p = 0; p < m; ++p) {
      double phase;
      if (grid.dim == 1) {
        phase = 2.0 * M_PI * slots[i].fx * double(p) / double(grid.shape[0]);
      } else {
        int ny = grid.shape[1];
        int ix = p / ny, iy = p % ny;
        phase = 2.0 * M_PI * (slots[i].fx * double(ix) / double(grid.shape[0]) +
                              slots[i].fy * double(iy) / double(ny));
      }
      b->Tre(i, p) = std::cos(phase);
      b->Tim(i, p) = -std::sin(phase);
      b->Gre(p, i) = slots[i].w * b->inv_points * std::cos(phase);
      b->Gim(p, i) = slots[i].w * b->inv_points * std::sin(phase);
    }
  }
  return b;
}

}  // namespace

const SpectralBasis& spectral_basis(const GridSpec& grid, ModeSpec modes) {
  using Key = std::tuple<int, int, int, double, double, double, double, int, int>;
  static std::mutex mu;
  static std::map<Key, std::unique_ptr<SpectralBasis>> cache;
  Key key{grid.dim,  grid.shape[0], grid.shape[1], grid.lo[0], grid.hi[0],
          grid.lo[1], grid.hi[1],   modes.m0,      modes.m1};
  std::scoped_lock lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_basis(grid, modes)).first;
  return *it->second;
}

}  // namespace ofm
