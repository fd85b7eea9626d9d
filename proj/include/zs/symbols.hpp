#pragma once

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace zs {

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

enum class Family { InternalWave, Homogeneous, NormalForm, Tao };

std::string family_name(Family f);
Family family_from_name(const std::string& s);

// (a) xi2/<xi> - beta cos x1
// (b) xi2/|xi| - beta cos x1
// (c) xi2/xi1 - lambda x1 on |xi2| < cone*xi1; lambda < 0 is the mirrored source model
// (d) xi2/<xi> - alpha (1 - chi_k(xi1) psi(xi2)) cos x1
struct SymbolDescriptor {
  Family family = Family::Homogeneous;
  double beta = 2.0;
  double lambda = 1.0;
  double cone = 0.5;
  double alpha = 2.0;
  int k = 5;

  static SymbolDescriptor internal_wave(double beta);
  static SymbolDescriptor homogeneous(double beta);
  static SymbolDescriptor normal_form(double lambda, double cone = 0.5);
  static SymbolDescriptor tao(double alpha, int k);

  bool is_homogeneous() const {
    return family == Family::Homogeneous || family == Family::NormalForm;
  }
  // coefficient of cos x1 in the x-dependent part, as a function of xi
  double coupling(double xi1, double xi2) const;

  bool operator==(const SymbolDescriptor&) const = default;
};

struct SymbolGradient {
  double dx1 = 0, dx2 = 0, dxi1 = 0, dxi2 = 0;
};

double evaluate(const SymbolDescriptor& s, double x1, double x2, double xi1, double xi2);
SymbolGradient gradient(const SymbolDescriptor& s, double x1, double x2, double xi1, double xi2);

// homogeneous principal family used by the flow: (a),(d) -> (b); (b),(c) unchanged
SymbolDescriptor principal(const SymbolDescriptor& s);

// exp(1 - 1/(1-t^2)) on (-1,1), zero outside
double bump(double t);
double bump_derivative(double t);
// C-infinity step: 0 for t <= 0, 1 for t >= 1
double smooth_step(double t);
double smooth_step_derivative(double t);

struct ChiProfiles {
  int k = 5;
  // plateau [k-1,k+1], support (k-2,k+2)
  double chi(double s) const;
  double dchi(double s) const;
  // psi(0)=1, support (-1,1)
  double psi(double s) const;
  double dpsi(double s) const;
};

ChiProfiles chi_profiles(int k);

nlohmann::json to_json(const SymbolDescriptor& s);
SymbolDescriptor symbol_from_json(const nlohmann::json& j);

}  // namespace zs
