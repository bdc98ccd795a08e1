#ifndef FACESIG_SPECIAL_FUNCTIONS_HPP
#define FACESIG_SPECIAL_FUNCTIONS_HPP

namespace facesig {

/// Regularized incomplete beta function I_x(a, b), evaluated by the
/// continued-fraction expansion (modified Lentz), switching to the
/// symmetric form when x > (a+1)/(a+b+2). Converges to ~1e-14.
double incbeta(double a, double b, double x);

double lgamma_fn(double x);

/// Survival function of the F distribution: P(F_{d1,d2} > f).
double f_sf(double f, double d1, double d2);

/// Two-tailed p-value of a t statistic with df degrees of freedom.
double t_two_tailed_p(double t, double df);

} // namespace facesig

#endif
