#include "zs/fields.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <map>
#include <mutex>
#include <numbers>

#include <fftw3.h>

namespace zs {

namespace {

constexpr double kPi = std::numbers::pi;

struct FftBuffer {
  fftw_complex* p = nullptr;
  explicit FftBuffer(size_t n) : p(fftw_alloc_complex(n)) {}
  ~FftBuffer() { fftw_free(p); }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
};

std::mutex plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan> plan_cache;

fftw_plan get_plan(int n1, int n2, int sign) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_tuple(n1, n2, sign);
  auto it = plan_cache.find(key);
  if (it != plan_cache.end()) return it->second;
  FftBuffer tmp(size_t(n1) * n2);
  fftw_plan p = fftw_plan_dft_2d(n1, n2, tmp.p, tmp.p, sign, FFTW_ESTIMATE);
  plan_cache.emplace(key, p);
  return p;
}

int wrap(int k, int n) { return ((k % n) + n) % n; }

}  // namespace

TorusGrid::TorusGrid(int a, int b) : n1(a), n2(b) {
  if (a < 8 || b < 8 || a % 2 || b % 2)
    throw std::invalid_argument("grid sizes must be even and >= 8");
}

double TorusGrid::x1(int i) const { return 2.0 * kPi * i / n1; }
double TorusGrid::x2(int j) const { return 2.0 * kPi * j / n2; }

SpectralField::SpectralField(const TorusGrid& g, CVec c) : grid(g), coeffs(std::move(c)) {
  if (coeffs.size() != g.modes()) throw std::invalid_argument("coefficient count mismatch");
}

SpectralField SpectralField::mode(const TorusGrid& g, int k1, int k2, cplx amp) {
  SpectralField f(g);
  if (!g.in_band(k1, k2)) throw OutOfBand("mode outside truncated band");
  f.at(k1, k2) = amp;
  return f;
}

std::vector<cplx> synthesize(const SpectralField& f) {
  const auto& g = f.grid;
  FftBuffer buf(size_t(g.points()));
  std::memset(buf.p, 0, sizeof(fftw_complex) * g.points());
  for (int k1 = -g.K1(); k1 <= g.K1(); ++k1)
    for (int k2 = -g.K2(); k2 <= g.K2(); ++k2) {
      cplx c = f.at(k1, k2);
      size_t at = size_t(wrap(k1, g.n1)) * g.n2 + wrap(k2, g.n2);
      buf.p[at][0] = c.real();
      buf.p[at][1] = c.imag();
    }
  fftw_execute_dft(get_plan(g.n1, g.n2, FFTW_BACKWARD), buf.p, buf.p);
  std::vector<cplx> out(g.points());
  for (int i = 0; i < g.points(); ++i) out[i] = cplx(buf.p[i][0], buf.p[i][1]);
  return out;
}

SpectralField analyze(const TorusGrid& g, const std::vector<cplx>& values) {
  if (int(values.size()) != g.points()) throw std::invalid_argument("value count mismatch");
  FftBuffer buf(size_t(g.points()));
  for (int i = 0; i < g.points(); ++i) {
    buf.p[i][0] = values[i].real();
    buf.p[i][1] = values[i].imag();
  }
  fftw_execute_dft(get_plan(g.n1, g.n2, FFTW_FORWARD), buf.p, buf.p);
  SpectralField f(g);
  const double s = 1.0 / g.points();
  for (int k1 = -g.K1(); k1 <= g.K1(); ++k1)
    for (int k2 = -g.K2(); k2 <= g.K2(); ++k2) {
      size_t at = size_t(wrap(k1, g.n1)) * g.n2 + wrap(k2, g.n2);
      f.at(k1, k2) = cplx(buf.p[at][0], buf.p[at][1]) * s;
    }
  return f;
}

std::vector<cplx> dft(const std::vector<cplx>& v, bool inverse) {
  const int n = int(v.size());
  if (n == 0) return {};
  FftBuffer buf{size_t(n)};
  for (int i = 0; i < n; ++i) {
    buf.p[i][0] = v[i].real();
    buf.p[i][1] = v[i].imag();
  }
  fftw_plan p;
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_tuple(n, 0, inverse ? FFTW_BACKWARD : FFTW_FORWARD);
    auto it = plan_cache.find(key);
    if (it == plan_cache.end()) {
      FftBuffer tmp{size_t(n)};
      p = fftw_plan_dft_1d(n, tmp.p, tmp.p, std::get<2>(key), FFTW_ESTIMATE);
      plan_cache.emplace(key, p);
    } else {
      p = it->second;
    }
  }
  fftw_execute_dft(p, buf.p, buf.p);
  std::vector<cplx> out(n);
  for (int i = 0; i < n; ++i) out[i] = cplx(buf.p[i][0], buf.p[i][1]);
  return out;
}

double sobolev_weight(double s, int k1, int k2) {
  return std::pow(1.0 + double(k1) * k1 + double(k2) * k2, 0.5 * s);
}

double sobolev_norm(const SpectralField& f, double s) {
  const auto& g = f.grid;
  double acc = 0;
  for (int idx = 0; idx < g.modes(); ++idx) {
    double w = sobolev_weight(s, g.k1_of(idx), g.k2_of(idx));
    acc += w * w * std::norm(f.coeffs[idx]);
  }
  return 2.0 * kPi * std::sqrt(acc);
}

double l2_norm(const SpectralField& f) { return sobolev_norm(f, 0.0); }

cplx inner(const SpectralField& u, const SpectralField& v) {
  if (!(u.grid == v.grid)) throw std::invalid_argument("grid mismatch");
  cplx acc = 0;
  for (int i = 0; i < u.grid.modes(); ++i) acc += u.coeffs[i] * std::conj(v.coeffs[i]);
  return 4.0 * kPi * kPi * acc;
}

double grid_l2_squared(const TorusGrid& g, const std::vector<cplx>& values) {
  double acc = 0;
  for (const auto& v : values) acc += std::norm(v);
  return acc * 4.0 * kPi * kPi / g.points();
}

double high_frequency_fraction(const SpectralField& f, int cutoff) {
  double hi = 0, tot = 0;
  for (int idx = 0; idx < f.grid.modes(); ++idx) {
    double m = std::norm(f.coeffs[idx]);
    tot += m;
    if (std::max(std::abs(f.grid.k1_of(idx)), std::abs(f.grid.k2_of(idx))) > cutoff) hi += m;
  }
  return tot > 0 ? hi / tot : 0.0;
}

double WavePacketAtom::xi1() const { return std::cos(theta) / h; }
double WavePacketAtom::xi2() const { return std::sin(theta) / h; }

void check_in_band(const TorusGrid& g, const WavePacketAtom& a) {
  double r = 5.0 / std::sqrt(a.h);
  if (std::abs(a.xi1()) + r > g.K1() || std::abs(a.xi2()) + r > g.K2())
    throw OutOfBand("atom frequency ball exceeds the resolved band");
}

// phi(x) = c sum_m exp(-|x-x0+2 pi m|^2/(2h)) e^{i xi0.(x-x0)}
// hat phi(k) = c h/(2 pi) exp(-h|k-xi0|^2/2) e^{-i k.x0}
SpectralField atom_field(const TorusGrid& g, const WavePacketAtom& a) {
  SpectralField f(g);
  const double x1 = a.xi1(), x2 = a.xi2();
  double norm2 = 0;
  for (int idx = 0; idx < g.modes(); ++idx) {
    double d1 = g.k1_of(idx) - x1, d2 = g.k2_of(idx) - x2;
    double m = std::exp(-0.5 * a.h * (d1 * d1 + d2 * d2));
    f.coeffs[idx] = m * std::polar(1.0, -(g.k1_of(idx) * a.x01 + g.k2_of(idx) * a.x02));
    norm2 += m * m;
  }
  f.coeffs /= 2.0 * kPi * std::sqrt(norm2);
  return f;
}

double atom_l1(const WavePacketAtom& a) {
  // int |phi| over one period = c * 2 pi h with c = 1/sqrt(pi h)
  return 2.0 * kPi * a.h / std::sqrt(kPi * a.h);
}

std::vector<cplx> atom_values(const TorusGrid& g, const WavePacketAtom& a) {
  std::vector<cplx> out(g.points());
  const double c = 1.0 / std::sqrt(kPi * a.h);
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      double y1 = g.x1(i) - a.x01, y2 = g.x2(j) - a.x02;
      y1 = std::remainder(y1, 2 * kPi);
      y2 = std::remainder(y2, 2 * kPi);
      cplx acc = 0;
      for (int m1 = -1; m1 <= 1; ++m1)
        for (int m2 = -1; m2 <= 1; ++m2) {
          double z1 = y1 + 2 * kPi * m1, z2 = y2 + 2 * kPi * m2;
          acc += std::exp(-(z1 * z1 + z2 * z2) / (2 * a.h)) *
                 std::polar(1.0, a.xi1() * z1 + a.xi2() * z2);
        }
      out[size_t(i) * g.n2 + j] = c * acc;
    }
  return out;
}

std::vector<double> wavepacket_transform(const SpectralField& u,
                                         const std::vector<WavePacketAtom>& atoms) {
  std::vector<double> out(atoms.size());
  for (size_t i = 0; i < atoms.size(); ++i) {
    check_in_band(u.grid, atoms[i]);
    out[i] = std::abs(inner(u, atom_field(u.grid, atoms[i]))) / atom_l1(atoms[i]);
  }
  return out;
}

std::vector<double> wavepacket_scan(const SpectralField& u, double theta, double h) {
  WavePacketAtom a{0.0, 0.0, theta, h};
  check_in_band(u.grid, a);
  SpectralField phi = atom_field(u.grid, a);
  // <u, phi_{x0}> = (2 pi)^2 sum u(k) conj(phi0(k)) e^{i k.x0}
  SpectralField prod(u.grid);
  for (int i = 0; i < u.grid.modes(); ++i)
    prod.coeffs[i] = u.coeffs[i] * std::conj(phi.coeffs[i]) * (4.0 * kPi * kPi);
  auto vals = synthesize(prod);
  std::vector<double> out(vals.size());
  const double l1 = atom_l1(a);
  for (size_t i = 0; i < vals.size(); ++i) out[i] = std::abs(vals[i]) / l1;
  return out;
}

SlopeFit dyadic_slope(const SpectralField& u, double x01, double x02, double theta,
                      const std::vector<int>& ms) {
  SlopeFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int m : ms) {
    WavePacketAtom a{x01, x02, theta, std::ldexp(1.0, -m)};
    double I = wavepacket_transform(u, {a})[0];
    fit.hs.push_back(a.h);
    fit.intensities.push_back(I);
    double lx = std::log(a.h), ly = std::log(std::max(I, 1e-300));
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  const double n = double(ms.size());
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

namespace {
void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
  os.write(reinterpret_cast<char*>(b), 4);
}
uint32_t get_u32(std::ifstream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}
void put_f64(std::ostream& os, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = uint8_t(bits >> (8 * i));
  os.write(reinterpret_cast<char*>(b), 8);
}
double get_f64(std::ifstream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= uint64_t(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}
}  // namespace

// Coefficients run k1-major from -n/2+1; an optional trailer "ZSMD" + u32 length
// + text follows them and is ignored by readers of the plain format.
std::string field_dump_bytes(const SpectralField& f, const std::string& header_note) {
  std::ostringstream os(std::ios::binary);
  os.write("ZSFD", 4);
  put_u32(os, 1);
  put_u32(os, uint32_t(f.grid.n1));
  put_u32(os, uint32_t(f.grid.n2));
  for (int i = 0; i < f.grid.modes(); ++i) {
    put_f64(os, f.coeffs[i].real());
    put_f64(os, f.coeffs[i].imag());
  }
  if (!header_note.empty()) {
    os.write("ZSMD", 4);
    put_u32(os, uint32_t(header_note.size()));
    os.write(header_note.data(), std::streamsize(header_note.size()));
  }
  return os.str();
}

void write_field(const std::string& path, const SpectralField& f, const std::string& header_note) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  std::string b = field_dump_bytes(f, header_note);
  os.write(b.data(), std::streamsize(b.size()));
  if (!os) throw std::runtime_error("write failed: " + path);
}

SpectralField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "ZSFD", 4) != 0) throw std::runtime_error("bad magic in " + path);
  uint32_t version = get_u32(is);
  if (version != 1) throw std::runtime_error("unsupported field dump version");
  int n1 = int(get_u32(is)), n2 = int(get_u32(is));
  TorusGrid g(n1, n2);
  SpectralField f(g);
  for (int i = 0; i < g.modes(); ++i) {
    double re = get_f64(is), im = get_f64(is);
    f.coeffs[i] = cplx(re, im);
  }
  if (!is) throw std::runtime_error("truncated field dump " + path);
  return f;
}

}  // namespace zs
