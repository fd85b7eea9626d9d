#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace zs {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;

struct OutOfBand : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TorusGrid {
  int n1 = 0, n2 = 0;

  TorusGrid() = default;
  TorusGrid(int a, int b);

  // truncated band |k_i| <= K_i
  int K1() const { return n1 / 2 - 1; }
  int K2() const { return n2 / 2 - 1; }
  int m1() const { return n1 - 1; }
  int m2() const { return n2 - 1; }
  int modes() const { return m1() * m2(); }
  int points() const { return n1 * n2; }

  // k1-major index of (k1,k2) inside the truncated band
  int index(int k1, int k2) const { return (k1 + K1()) * m2() + (k2 + K2()); }
  int k1_of(int idx) const { return idx / m2() - K1(); }
  int k2_of(int idx) const { return idx % m2() - K2(); }
  bool in_band(int k1, int k2) const {
    return k1 >= -K1() && k1 <= K1() && k2 >= -K2() && k2 <= K2();
  }

  double x1(int i) const;
  double x2(int j) const;

  bool operator==(const TorusGrid& o) const { return n1 == o.n1 && n2 == o.n2; }
};

struct SpectralField {
  TorusGrid grid;
  CVec coeffs;

  SpectralField() = default;
  explicit SpectralField(const TorusGrid& g) : grid(g), coeffs(CVec::Zero(g.modes())) {}
  SpectralField(const TorusGrid& g, CVec c);

  cplx& at(int k1, int k2) { return coeffs[grid.index(k1, k2)]; }
  cplx at(int k1, int k2) const { return coeffs[grid.index(k1, k2)]; }

  static SpectralField mode(const TorusGrid& g, int k1, int k2, cplx amp = 1.0);
};

// grid values are stored row-major: value(i,j) at [i*n2 + j]
std::vector<cplx> synthesize(const SpectralField& f);
SpectralField analyze(const TorusGrid& g, const std::vector<cplx>& values);

// unnormalized 1D DFT; forward uses e^{-2 pi i jm/n}, inverse e^{+2 pi i jm/n}
std::vector<cplx> dft(const std::vector<cplx>& v, bool inverse);

double sobolev_weight(double s, int k1, int k2);
double sobolev_norm(const SpectralField& f, double s);
double l2_norm(const SpectralField& f);
// <u,v> = int u conj(v)
cplx inner(const SpectralField& u, const SpectralField& v);
double grid_l2_squared(const TorusGrid& g, const std::vector<cplx>& values);

// Fourier mass fraction in modes with max(|k1|,|k2|) > cutoff
double high_frequency_fraction(const SpectralField& f, int cutoff);

struct WavePacketAtom {
  double x01 = 0, x02 = 0;
  double theta = 0;
  double h = 0.125;

  double xi1() const;
  double xi2() const;
};

// Analytic coefficients of the periodized Gaussian, normalized to unit L2 norm.
SpectralField atom_field(const TorusGrid& g, const WavePacketAtom& a);
// Grid values by direct summation of 3 lattice translates per axis.
std::vector<cplx> atom_values(const TorusGrid& g, const WavePacketAtom& a);
double atom_l1(const WavePacketAtom& a);
void check_in_band(const TorusGrid& g, const WavePacketAtom& a);

// |<u,phi>| / int|phi|: a matched plane wave of unit amplitude gives 1.
std::vector<double> wavepacket_transform(const SpectralField& u,
                                         const std::vector<WavePacketAtom>& atoms);

// Intensities for every grid point as centre, fixed direction and scale.
// Result is row-major over the grid, same layout as synthesize.
std::vector<double> wavepacket_scan(const SpectralField& u, double theta, double h);

struct SlopeFit {
  double slope = 0, intercept = 0;
  std::vector<double> hs, intensities;
};

// log intensity against log h over h = 2^-m, m in ms
SlopeFit dyadic_slope(const SpectralField& u, double x01, double x02, double theta,
                      const std::vector<int>& ms);

// binary dump; a non-empty note goes into a trailing ZSMD block
std::string field_dump_bytes(const SpectralField& f, const std::string& header_note = "");
void write_field(const std::string& path, const SpectralField& f,
                 const std::string& header_note = "");
SpectralField read_field(const std::string& path);

}  // namespace zs
