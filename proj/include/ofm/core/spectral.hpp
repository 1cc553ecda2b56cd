#pragma once

#include <Eigen/Dense>

#include "ofm/core/grid.hpp"

namespace ofm {

/* Fourier conventions used throughout:
 *   forward   c_k = sum_j x_j exp(-2*pi*i <j,k>/n)          (unnormalized)
 *   inverse   x_j = (1/n) sum_k c_k exp(+2*pi*i <j,k>/n)    (1/n)
 * Signals are real, so the redundant Hermitian half along the last spatial
 * dimension is omitted.  1d storage: k = 0..floor(n/2).  2d storage keeps the
 * full first axis and halves the second; row r = kx*Ky + ky, Ky = ny/2+1.
 *
 * Grids are desk-scale (n <= a few hundred per dimension), so transforms are
 * cached dense DFT matrices applied as gemms rather than an FFT. */
struct SpectralCoeffs {
  GridSpec grid;
  Eigen::MatrixXcd c;  // n_freq x channels
};

enum class TransformDir { Forward, Inverse };

SpectralCoeffs spectral_forward(const Eigen::MatrixXd& values, const GridSpec& grid);
Eigen::MatrixXd spectral_inverse(const SpectralCoeffs& coeffs);

/* Retained-mode counts per spatial dimension for truncated spectral mixing.
 * 1d keeps k in [0, m0).  2d keeps the standard two corner blocks: signed
 * kx in [0, m0) union [-m0, 0) and ky in [0, m1). */
struct ModeSpec {
  int m0 = 0, m1 = 0;
  bool operator==(const ModeSpec& o) const { return m0 == o.m0 && m1 == o.m1; }
};

/* Truncated transform pair, cached per (grid, modes).
 *   forward   c = (Tre + i Tim) * x       (slots x points) * (points x ch)
 *   inverse   y = Gre * cre - Gim * cim   pairing weights and 1/n folded in
 * The composition inverse(mix(forward(x))) with per-slot weight matrices W_s
 * has the convenient adjoint property: the transpose map is the same
 * composition with W_s replaced by W_s^H. */
struct SpectralBasis {
  GridSpec grid;
  ModeSpec modes;
  int slots = 0;
  Eigen::MatrixXd Tre, Tim;  // slots x points
  Eigen::MatrixXd Gre, Gim;  // points x slots
  Eigen::VectorXd wslot;     // Hermitian pairing weight per slot
  double inv_points = 0.0;
};

/* Returns a cached basis; the reference stays valid for the process lifetime. */
const SpectralBasis& spectral_basis(const GridSpec& grid, ModeSpec modes);

int max_modes(const GridSpec& grid, int d);  // largest admissible count for dim d

}  // namespace ofm
