#pragma once

#include <functional>

#include "ripple/grid.hpp"

namespace ripple {

struct MultiplierSymbol {
  std::function<cplx(double)> evaluator;
  cplx value_at_zero = 0.0;
  double homogeneity_degree = 0.0;

  cplx operator()(double xi) const { return xi == 0.0 ? value_at_zero : evaluator(xi); }
};

namespace symbols {
// |xi|^s
MultiplierSymbol abs_pow(double s);
// xi |xi|^{s-1}, i.e. D_x |D_x|^{s-1}
MultiplierSymbol signed_pow(double s);
// xi (symbol of D_x = -i d/dx)
MultiplierSymbol dx();
// i xi (symbol of d/dx)
MultiplierSymbol ddx();
// <xi>^s
MultiplierSymbol japanese(double s);
// exp(i t |xi|^{1/2})
MultiplierSymbol half_wave(double t);
}  // namespace symbols

// g^(xi) = m(xi) f^(xi); the Nyquist slot uses the even part of m.
GridFunction apply_multiplier(const GridFunction& f, const MultiplierSymbol& m);

// Derivative d/dx.
GridFunction derivative(const GridFunction& f);

// Littlewood-Paley pieces. rho is 1 on |xi|<=1 and 0 on |xi|>=2,
// phi(xi) = rho(xi) - rho(2 xi) is supported in 1/2 <= |xi| <= 2.
double smooth_step(double t);
double lp_rho(double xi);
double lp_phi(double xi);

// Delta_j = phi(2^{-j} D).
GridFunction lp_block(const GridFunction& f, int j);
// S_m = rho(2^{-m} D) = sum_{j<=m} Delta_j (includes the zero mode).
GridFunction low_pass(const GridFunction& f, int m);
// Largest j with a nonzero block on this grid.
int lp_top_index(const GridFunction& f);

double sobolev_norm(const GridFunction& f, double s);
// sup_{j>=0} 2^{j rho} |Delta_j f|_inf + |S_{-1} f|_inf
double holder_norm(const GridFunction& f, double rho);

// Dyadic blocks B_{-1} = S_{-1}, B_j = Delta_j (j >= 0). Gap N0 = 2.
constexpr int kParaproductGap = 2;
// T_a f = sum_{j>=0} S_{j-N0}(a) Delta_j f (S_m = 0 for m < -1).
GridFunction paraproduct(const GridFunction& a, const GridFunction& f);
// R(a,f) = sum_{|j-j'|<N0} B_j a B_j' f, so that a f = T_a f + T_f a + R(a,f).
GridFunction bony_remainder(const GridFunction& a, const GridFunction& f);

// Pointwise product evaluated on a 3/2-padded grid and truncated back.
GridFunction product(const GridFunction& a, const GridFunction& b);
// Pointwise product on the native grid without padding.
GridFunction product_raw(const GridFunction& a, const GridFunction& b);

// Inner product sum conj(a_j) b_j dx.
cplx inner(const GridFunction& a, const GridFunction& b);
// Real integral sum f_j dx (real part).
double integral(const GridFunction& f);

}  // namespace ripple
