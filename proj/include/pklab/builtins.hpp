#pragma once

// The shipped manifold specifications. Each builtin is a .pk document; the
// same text lives under catalog/ so users can copy and modify it.

#include <string>
#include <vector>

#include "pklab/claims.hpp"

namespace pklab {

namespace builtin_text {

inline const char* sl2c = R"(manifold sl2c closed

parameters {
  t : complex
}

frame brackets (psi1 psi2 psi3) {
  [Z1, Z2] = -Z3
  [Z1, Z3] = Z2
  [Z2, Z3] = -Z1
}

deform {
  sigma[3][3] = t
}

forms {
  Omega = (1/4)*(psi1^psi2^psibar1^psibar2 + psi1^psi3^psibar1^psibar3 + psi2^psi3^psibar2^psibar3)
  gamma = (1/8)*(psi1^psi2^psibar3 + psibar1^psibar2^psi3 - psi1^psi3^psibar2 - psibar1^psibar3^psi2 + psi2^psi3^psibar1 + psibar2^psibar3^psi1)
}

claims {
  frame-closure
  structure psi1 : psi2^psi3
  structure psi2 : -(psi1^psi3)
  structure psi3 : psi1^psi2
  equal Omega : d(gamma)
  type Omega 2 2
  real Omega
  structure-t psi1 : (1/(1 - t*tbar))*(psi2^psi3 + t*(psi2^psibar3))
  structure-t psi2 : -(1/(1 - t*tbar))*(psi1^psi3 + t*(psi1^psibar3))
  structure-t psi3 : psi1^psi2 - t*(psibar1^psibar2)
  jinv-t Omega
  nonintegrable at t = 1/2
  taming none forced A3
  pkahler-t Omega 2 at t = 0 | t = 1/2 | t = i/2
}
)";

inline const char* iwasawa = R"(manifold iwasawa closed

coordinates { z1 z2 z3 }

parameters {
  t : real
}

frame coordinate {
  phi1 = dz1
  phi2 = dz2
  phi3 = dz3 - z1*dz2
}

deform {
  sigma[2][1] = t
  sigma[1][2] = -t
}

metric identity

forms {
  omega = (i/2)*(phi1^phibar1 + phi2^phibar2 + phi3^phibar3)
}

claims {
  frame-closure
  structure phi3 : -(phi1^phi2)
  balanced omega
  structure-t phi3 : -(1/(1 + t^2)^2)*(phi1^phi2 + t*(phi1^phibar1 + phi2^phibar2) + t^2*(phibar1^phibar2))
  nonintegrable at t = 1/2
  first-order fail
  cor3-partial : -2*(phi1^phi2^phibar1^phibar2^phibar3)
  dbar-nonexact : -2*(phi1^phi2^phibar1^phibar2^phibar3)
  nop-t phi3 2 at t = 1/2
}
)";

inline const char* torus6 = R"(manifold torus6 closed

coordinates { z1 z2 z3 }

parameters {
  t : real
}

functions {
  u(x2, y2) : real periodic
  v(x2, y2) : real periodic
}

frame coordinate {
  phi1 = dz1
  phi2 = dz2
  phi3 = dz3
}

acs {
  J dx1 = -dy1
  J dx2 = -dy2
  J dx3 = 2*v*dx1 - 2*u*dy1 - dy3
  J dy1 = dx1
  J dy2 = dx2
  J dy3 = -2*u*dx1 + dx3 - 2*v*dy1
}

deform {
  sigma[3][1] = t*(u + i*v)
}

metric identity

claims {
  frame-closure
  acs-involutive
  coframe 3 : dz3 - (u + i*v)*dzbar1
  acs-matches-family at t = 1
  power-closed-t omega 2
  transverse-t omega 1
  transverse-power-t omega 2 2
  mt eq1 : -2*(u_x2 + v_y2)
  pde3-zero
  first-order pass
  nonintegrable at t = 1/2
}
)";

inline const char* heisenberg3 = R"(manifold heisenberg3 closed

frame invariant {
  d phi1 = 0
  d phi2 = 0
  d phi3 = (1/2)*(phi1^phibar1 + phi2^phibar2)
}

forms {
  beta1 = phi3^phi1^phibar1
  beta2 = phi3
}

claims {
  frame-closure
  nop beta1 1
  nop beta2 2
  taming none forced A3
}
)";

inline const char* heisenberg4 = R"(manifold heisenberg4 closed

frame invariant {
  d phi1 = 0
  d phi2 = 0
  d phi3 = 0
  d phi4 = (1/2)*(phi1^phibar1 + phi2^phibar2 + phi3^phibar3)
}

forms {
  beta1 = phi4^phi1^phibar1^phi2^phibar2
  beta2 = phi4^phi1^phibar1
  beta3 = phi4
}

claims {
  frame-closure
  nop beta1 1
  nop beta2 2
  nop beta3 3
}
)";

inline const char* c4_family = R"(manifold c4_family open

coordinates { z1 z2 z3 z4 }

parameters {
  tau : real
}

functions {
  g(x2, x3) : real
}

frame coordinate {
  Phi1 = dz1
  Phi2 = dz2
  Phi3 = dz3 - (i/2)*g*(dz1 + dzbar1)
  Phi4 = dz4
}

acs {
  J dx1 = -dy1
  J dx2 = -dy2
  J dx3 = g*dx1 - dy3
  J dx4 = -dy4
  J dy1 = dx1
  J dy2 = dx2
  J dy3 = dx3 - g*dy1
  J dy4 = dx4
}

forms {
  omega = (i/2)*(Phi1^Phibar1 + Phi2^Phibar2 + Phi3^Phibar3 + Phi4^Phibar4)
  Omega = (1/4)*(Phi1^Phi2^Phibar1^Phibar2 + Phi1^Phi3^Phibar1^Phibar3 + Phi1^Phi4^Phibar1^Phibar4 + Phi2^Phi3^Phibar2^Phibar3 + Phi2^Phi4^Phibar2^Phibar4 + Phi3^Phi4^Phibar3^Phibar4)
  X = Phi2^Phibar3^Phi4^Phibar4
  Omega_tau = Omega - tau*((1/2)*(X + conj(X)))
}

claims {
  frame-closure
  acs-involutive
  acs-coframe
  type Omega_tau 2 2
  real Omega_tau
  closed-iff Omega_tau : -(g_x2 - 2*tau*g_x3)*(dx1^dx2^dx3^dx4^dy4)
  pkahler Omega_tau 2 with g = 2*tau*x2 + x3
  transverse-range Omega_tau 2 : (-1/2, 1/2)
  mt eq2 : g_x2
  mt-zero eq1
  kahler omega with g = x3, tau = 0
  nonintegrable with g = x3
}
)";

} // namespace builtin_text

inline std::vector<std::string> builtin_names() {
    return {"sl2c", "iwasawa", "torus6", "heisenberg3", "heisenberg4", "c4_family"};
}

inline const char* builtin_source(const std::string& name) {
    if (name == "sl2c") return builtin_text::sl2c;
    if (name == "iwasawa") return builtin_text::iwasawa;
    if (name == "torus6") return builtin_text::torus6;
    if (name == "heisenberg3" || name == "heisenberg") return builtin_text::heisenberg3;
    if (name == "heisenberg4") return builtin_text::heisenberg4;
    if (name == "c4_family") return builtin_text::c4_family;
    fail(errc::unknown_name, "no builtin named '" + name + "'");
}

inline ManifoldSpec builtin(const std::string& name) {
    LoadResult r = parse_and_load(builtin_source(name));
    if (!r.ok()) {
        std::string msg = "builtin '" + name + "' failed to load:";
        for (const auto& d : r.diagnostics) msg += " " + d.message;
        fail(errc::invalid_argument, msg);
    }
    return std::move(*r.spec);
}

} // namespace pklab
