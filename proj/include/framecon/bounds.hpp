#ifndef FRAMECON_BOUNDS_HPP
#define FRAMECON_BOUNDS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "framecon/rng.hpp"
#include "framecon/samplers.hpp"

namespace framecon::bounds {

enum class Norm { Op, Fro };

// Uniform return shape for every closed-form evaluator. raw_value is the
// formula value, never silently clamped (tail bounds can exceed 1 and
// probability lower bounds can go negative for small n; plots want the raw
// curve). clamped is raw restricted to [0, 1]. valid is false whenever a
// stated precondition fails, with one note per violation.
struct TailBoundResult {
    double raw_value = 0;
    double clamped = 0;
    bool valid = true;
    std::vector<std::string> notes;
    std::map<std::string, double> aux;

    static TailBoundResult of(double raw);
    void add_violation(const std::string& note);
};

// P(||S - I||_op >= eps) and P(||S - I||_F >= eps) for n i.i.d. uniform
// draws from the sphere of radius sqrt(d/n).
TailBoundResult sphere_tail(int d, long n, double eps, Norm norm);

// Same for the ball of radius sqrt((d+2)/n). The Frobenius form carries an
// unspecified absolute constant c, supplied by the caller (noted in the
// result); default 1.0.
TailBoundResult ball_tail(int d, long n, double eps, Norm norm, double c = 1.0);

// Generic matrix Bernstein tail 2 dim exp(-(eps^2/2) / (sigma^2 + A eps/3)).
TailBoundResult bernstein_tail(int dim, double eps, double sigma_sq, double bound_a);

// Tail for an L-Lipschitz function of n independent uniform points on the
// radius-R sphere in R^d: 2 exp(-(d-1) t^2 / (2 R^2 L^2)).
TailBoundResult product_sphere_lipschitz_tail(int d, double R, double L, double t);

// P(exists i with | ||x_i|| - sqrt(d/n) | >= eps) for a random Parseval
// frame under the invariant measure on St(n, d):
// exp(-(n-2)(eps - 3 sqrt(ln n / n))^2 / 8).
// valid requires n >= e^d and 3 sqrt(ln n / n) < eps; raw is evaluated
// regardless so sweeps can plot the curve.
TailBoundResult stiefel_tail(int d, long n, double eps);

// Union-bound alternative 2n exp(-(n-2) eps^2 / 32) (squared-norm version);
// weaker by the extra factor n, provided for comparison plots.
TailBoundResult stiefel_union_tail(int d, long n, double eps);

// K = (1 + d/2n) (2n)^{-1/2} int_0^inf [1 - (gamma(d/2,y)/Gamma(d/2))^n] /
// sqrt(y) dy - sqrt(d/n), evaluated by adaptive quadrature after the
// substitution y = t^2 removes the endpoint singularity.
//
// k_alt is the same integral with prefactor 1/(2 sqrt(n)) instead of
// 1/sqrt(2n); the two printed conventions differ by a factor sqrt(2) and the
// Monte Carlo oracle decides which one matches (see stiefel_K_mc_oracle).
struct StiefelK {
    double k_value = 0;    // 1/sqrt(2n) prefactor
    double k_alt = 0;      // 1/(2 sqrt(n)) prefactor
    double quad_error = 0; // quadrature error estimate (absolute)
};
StiefelK stiefel_K(int d, long n, double quad_tol = 1e-10);

// (1 + d/2n) E[max row norm of an n x d Gaussian matrix with N(0, 1/n)
// entries] - sqrt(d/n), estimated over `trials` matrices.
double stiefel_K_mc_oracle(int d, long n, long trials, const rng::SeedPath& seed,
                           double* std_error = nullptr, int workers = 1);

// exp(-(n-2)(eps - K)^2 / 8); valid requires K < eps. aux carries K.
TailBoundResult stiefel_exact_tail(int d, long n, double eps, double quad_tol = 1e-10);

// Tangent vector to St(n, d) at a base point, in the canonical-metric
// parametrization Delta = U A + U_perp B with A skew.
struct TangentVector {
    Eigen::MatrixXd A;  // d x d, skew-symmetric
    Eigen::MatrixXd B;  // (n-d) x d

    TangentVector(Eigen::MatrixXd A_, Eigen::MatrixXd B_);
    double canonical_sq_norm() const;  // 0.5 ||A||_F^2 + ||B||_F^2
};

// Ricci quadratic form (n-2)/4 ||A||^2 + (n - d/2 - 3/2) ||B||^2 on the
// canonically-normalized tangent vector (normalized internally). Requires
// n > d + 1; the value is then >= n/2 - 1, with equality at B = 0.
double ricci_quadratic_form(int n, int d, const TangentVector& xi);

// Smallest n with n >= C_{d,eps} ln(2d/delta) where C is the sphere / ball
// constant; guarantees P(||S - I||_op >= eps) <= delta.
long sample_size(samplers::Model model, int d, double eps, double delta);

// Smallest n with n >= 2 + 32 ln(1/(1-confidence) * ...) / eps^2 for the
// Stiefel concentration at 95% (ln 20) or 99% (ln 100) confidence. Flagged
// invalid if the side-condition eps >= 6 sqrt(ln n / n), or n >= e^d for a
// caller-supplied d, fails at the returned n.
struct StiefelSampleSize {
    long n = 0;
    bool valid = true;
    std::vector<std::string> notes;
};
StiefelSampleSize stiefel_sample_size(double eps, double confidence,
                                      std::optional<int> d = std::nullopt);

// E||v||^2 for v uniform on the shell, exact closed form and its simpler
// upper bound. eps below 1e-8 switches to the analytic limit d/n.
struct ShellMoment {
    double exact = 0;
    double upper = 0;
};
ShellMoment shell_expected_sqnorm(int d, long n, double eps);

// Lower bound on P(n i.i.d. shell vectors form an eps-nearly Parseval
// frame); may be negative for small n (clamped floors at 0).
TailBoundResult shell_parseval_prob(int d, long n, double eps);

// Probability that a uniform draw from the eps-nearly equal-norm-and-
// Parseval class satisfies the (sqrt20 + sqrt2)^2 eps^2 d distance bound.
// raw is the simplified form; aux["proof_form"] keeps the sharper
// un-simplified expression, aux["numerator"]/aux["denominator"] its parts.
// valid requires the simplified denominator to be positive.
TailBoundResult paulsen_prob(int d, long n, double eps);

// The two distance constants: the probabilistic (sqrt20 + sqrt2)^2 eps^2 d
// and the deterministic 20 eps d^2.
struct PaulsenDistanceBound {
    double probabilistic = 0;
    double hamilton_moitra = 0;
};
PaulsenDistanceBound paulsen_distance_bound(int d, double eps);

}  // namespace framecon::bounds

#endif
