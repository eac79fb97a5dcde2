#pragma once

namespace moodifier::analysis {

// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1],
// evaluated with the modified Lentz continued fraction (relative error
// around 1e-15 over the parameter ranges used here).
double regularized_incomplete_beta(double a, double b, double x);

// x such that I_x(a, b) = p, by safeguarded Newton iteration.
double inverse_regularized_incomplete_beta(double a, double b, double p);

double normal_cdf(double z);

// Student t with `dof` > 0 degrees of freedom (dof need not be integral).
double student_t_cdf(double t, double dof);

// P(|T| >= |t|). Exactly 1 at t = 0.
double student_t_two_sided_p(double t, double dof);

}  // namespace moodifier::analysis
