#include "zs/symbols.hpp"

#include <cmath>

namespace zs {

std::string family_name(Family f) {
  switch (f) {
    case Family::InternalWave: return "internal-wave";
    case Family::Homogeneous: return "internal-wave-homogeneous";
    case Family::NormalForm: return "normal-form";
    case Family::Tao: return "tao";
  }
  return "?";
}

Family family_from_name(const std::string& s) {
  if (s == "internal-wave") return Family::InternalWave;
  if (s == "internal-wave-homogeneous") return Family::Homogeneous;
  if (s == "normal-form") return Family::NormalForm;
  if (s == "tao") return Family::Tao;
  throw std::invalid_argument("unknown symbol family: " + s);
}

SymbolDescriptor SymbolDescriptor::internal_wave(double beta) {
  SymbolDescriptor s;
  s.family = Family::InternalWave;
  s.beta = beta;
  return s;
}

SymbolDescriptor SymbolDescriptor::homogeneous(double beta) {
  SymbolDescriptor s;
  s.family = Family::Homogeneous;
  s.beta = beta;
  return s;
}

SymbolDescriptor SymbolDescriptor::normal_form(double lambda, double cone) {
  SymbolDescriptor s;
  s.family = Family::NormalForm;
  s.lambda = lambda;
  s.cone = cone;
  return s;
}

SymbolDescriptor SymbolDescriptor::tao(double alpha, int k) {
  SymbolDescriptor s;
  s.family = Family::Tao;
  s.alpha = alpha;
  s.k = k;
  return s;
}

double bump(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

double bump_derivative(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  double q = 1.0 - t * t;
  return bump(t) * (-2.0 * t / (q * q));
}

namespace {
double edge(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }
double edge_d(double t) { return t > 0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }
}  // namespace

double smooth_step(double t) {
  if (t <= 0) return 0.0;
  if (t >= 1) return 1.0;
  double a = edge(t), b = edge(1 - t);
  return a / (a + b);
}

double smooth_step_derivative(double t) {
  if (t <= 0 || t >= 1) return 0.0;
  double a = edge(t), b = edge(1 - t);
  double da = edge_d(t), db = -edge_d(1 - t);
  return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

double ChiProfiles::chi(double s) const {
  double d = std::abs(s - k);
  if (d <= 1.0) return 1.0;
  if (d >= 2.0) return 0.0;
  return smooth_step(2.0 - d);
}

double ChiProfiles::dchi(double s) const {
  double d = std::abs(s - k);
  if (d <= 1.0 || d >= 2.0) return 0.0;
  return -(s > k ? 1.0 : -1.0) * smooth_step_derivative(2.0 - d);
}

double ChiProfiles::psi(double s) const { return bump(s); }
double ChiProfiles::dpsi(double s) const { return bump_derivative(s); }

ChiProfiles chi_profiles(int k) {
  if (k < 2) throw std::invalid_argument("chi profile needs k >= 2");
  return ChiProfiles{k};
}

double SymbolDescriptor::coupling(double xi1, double xi2) const {
  switch (family) {
    case Family::InternalWave:
    case Family::Homogeneous:
      return -beta;
    case Family::Tao: {
      auto cp = chi_profiles(k);
      return -alpha * (1.0 - cp.chi(xi1) * cp.psi(xi2));
    }
    case Family::NormalForm:
      break;
  }
  throw std::invalid_argument("normal-form symbol has no cos x1 coupling");
}

namespace {
void check_domain(const SymbolDescriptor& s, double xi1, double xi2) {
  if (s.family == Family::Homogeneous && xi1 == 0.0 && xi2 == 0.0)
    throw DomainError("homogeneous symbol evaluated at xi = 0");
  if (s.family == Family::NormalForm && !(xi1 > 0.0 && std::abs(xi2) < s.cone * xi1))
    throw DomainError("normal-form symbol evaluated outside its cone");
}
}  // namespace

double evaluate(const SymbolDescriptor& s, double x1, double, double xi1, double xi2) {
  check_domain(s, xi1, xi2);
  switch (s.family) {
    case Family::InternalWave:
      return xi2 / std::sqrt(1.0 + xi1 * xi1 + xi2 * xi2) - s.beta * std::cos(x1);
    case Family::Homogeneous:
      return xi2 / std::hypot(xi1, xi2) - s.beta * std::cos(x1);
    case Family::NormalForm:
      return xi2 / xi1 - s.lambda * x1;
    case Family::Tao:
      return xi2 / std::sqrt(1.0 + xi1 * xi1 + xi2 * xi2) + s.coupling(xi1, xi2) * std::cos(x1);
  }
  return 0;
}

SymbolGradient gradient(const SymbolDescriptor& s, double x1, double, double xi1, double xi2) {
  check_domain(s, xi1, xi2);
  SymbolGradient g;
  switch (s.family) {
    case Family::InternalWave:
    case Family::Tao: {
      double r2 = 1.0 + xi1 * xi1 + xi2 * xi2;
      double r3 = r2 * std::sqrt(r2);
      g.dxi1 = -xi1 * xi2 / r3;
      g.dxi2 = (1.0 + xi1 * xi1) / r3;
      if (s.family == Family::InternalWave) {
        g.dx1 = s.beta * std::sin(x1);
      } else {
        auto cp = chi_profiles(s.k);
        double cpsi = cp.chi(xi1) * cp.psi(xi2);
        g.dx1 = s.alpha * (1.0 - cpsi) * std::sin(x1);
        g.dxi1 += s.alpha * cp.dchi(xi1) * cp.psi(xi2) * std::cos(x1);
        g.dxi2 += s.alpha * cp.chi(xi1) * cp.dpsi(xi2) * std::cos(x1);
      }
      break;
    }
    case Family::Homogeneous: {
      double r = std::hypot(xi1, xi2);
      double r3 = r * r * r;
      g.dxi1 = -xi1 * xi2 / r3;
      g.dxi2 = xi1 * xi1 / r3;
      g.dx1 = s.beta * std::sin(x1);
      break;
    }
    case Family::NormalForm:
      g.dxi1 = -xi2 / (xi1 * xi1);
      g.dxi2 = 1.0 / xi1;
      g.dx1 = -s.lambda;
      break;
  }
  return g;
}

SymbolDescriptor principal(const SymbolDescriptor& s) {
  switch (s.family) {
    case Family::InternalWave: return SymbolDescriptor::homogeneous(s.beta);
    case Family::Tao: return SymbolDescriptor::homogeneous(s.alpha);
    default: return s;
  }
}

nlohmann::json to_json(const SymbolDescriptor& s) {
  nlohmann::json j;
  j["family"] = family_name(s.family);
  switch (s.family) {
    case Family::InternalWave:
    case Family::Homogeneous:
      j["beta"] = s.beta;
      break;
    case Family::NormalForm:
      j["lambda"] = s.lambda;
      j["cone"] = s.cone;
      break;
    case Family::Tao:
      j["alpha"] = s.alpha;
      j["k"] = s.k;
      break;
  }
  return j;
}

SymbolDescriptor symbol_from_json(const nlohmann::json& j) {
  SymbolDescriptor s;
  s.family = family_from_name(j.at("family").get<std::string>());
  if (j.contains("beta")) s.beta = j["beta"].get<double>();
  if (j.contains("lambda")) s.lambda = j["lambda"].get<double>();
  if (j.contains("cone")) s.cone = j["cone"].get<double>();
  if (j.contains("alpha")) s.alpha = j["alpha"].get<double>();
  if (j.contains("k")) s.k = j["k"].get<int>();
  if (s.family == Family::NormalForm && !(s.lambda > 0 && s.cone > 0 && s.cone < 1))
    throw std::invalid_argument("normal-form needs lambda > 0 and cone in (0,1)");
  if (s.family == Family::Tao && s.k < 2) throw std::invalid_argument("tao needs k >= 2");
  return s;
}

}  // namespace zs
