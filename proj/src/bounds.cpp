#include "framecon/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace framecon::bounds {

TailBoundResult TailBoundResult::of(double raw) {
    TailBoundResult r;
    r.raw_value = raw;
    r.clamped = std::clamp(raw, 0.0, 1.0);
    r.valid = true;
    return r;
}

void TailBoundResult::add_violation(const std::string& note) {
    valid = false;
    notes.push_back(note);
}

namespace {

void require(bool cond, const char* message) {
    if (!cond) throw std::domain_error(message);
}

}  // namespace

// exponents are evaluated in extended precision so that algebraically equal
// routes (the Bernstein composition, the Frobenius union-bound assembly)
// agree to well below 1e-14 relative
TailBoundResult sphere_tail(int d, long n, double eps, Norm norm) {
    require(d >= 2, "sphere tail requires d >= 2");
    require(n >= 1, "sphere tail requires n >= 1");
    require(eps >= 0, "sphere tail requires eps >= 0");
    const long double dd = d;
    const long double nn = n;
    const long double e = eps;
    if (norm == Norm::Op) {
        const long double denom = 2.0L * dd - 2.0L + 2.0L * e * (dd - 1.0L) / 3.0L;
        return TailBoundResult::of(
            static_cast<double>(2.0L * dd * std::exp(-nn * e * e / denom)));
    }
    const long double expo = (dd - 1.0L) * nn * e * e / (8.0L * dd * dd * dd * dd);
    return TailBoundResult::of(static_cast<double>(2.0L * dd * dd * std::exp(-expo)));
}

TailBoundResult ball_tail(int d, long n, double eps, Norm norm, double c) {
    require(d >= 2, "ball tail requires d >= 2");
    require(n >= 1, "ball tail requires n >= 1");
    require(eps >= 0, "ball tail requires eps >= 0");
    const long double dd = d;
    const long double nn = n;
    const long double e = eps;
    if (norm == Norm::Op) {
        const long double denom = 2.0L * dd + 2.0L + 2.0L * e * (dd + 1.0L) / 3.0L;
        return TailBoundResult::of(
            static_cast<double>(2.0L * dd * std::exp(-nn * e * e / denom)));
    }
    require(c > 0, "ball Frobenius tail requires c > 0");
    auto r = TailBoundResult::of(static_cast<double>(
        dd * dd * std::exp(-static_cast<long double>(c) * nn * e * e / (dd * dd * dd))));
    r.notes.push_back("absolute constant c is user-supplied; the stated bound leaves it "
                      "unspecified");
    r.aux["c"] = c;
    return r;
}

TailBoundResult bernstein_tail(int dim, double eps, double sigma_sq, double bound_a) {
    require(dim >= 1, "bernstein tail requires dim >= 1");
    require(eps >= 0, "bernstein tail requires eps >= 0");
    require(sigma_sq >= 0, "bernstein tail requires sigma^2 >= 0");
    require(bound_a > 0, "bernstein tail requires A > 0");
    const long double e = eps;
    const long double denom =
        static_cast<long double>(sigma_sq) + static_cast<long double>(bound_a) * e / 3.0L;
    const long double expo = denom > 0 ? (e * e / 2.0L) / denom : 0.0L;
    return TailBoundResult::of(static_cast<double>(2.0L * dim * std::exp(-expo)));
}

TailBoundResult product_sphere_lipschitz_tail(int d, double R, double L, double t) {
    require(d >= 2, "product-sphere tail requires d >= 2");
    require(R > 0, "product-sphere tail requires R > 0");
    require(L > 0, "product-sphere tail requires L > 0");
    require(t >= 0, "product-sphere tail requires t >= 0");
    const long double rr = R, ll = L, tt = t;
    return TailBoundResult::of(static_cast<double>(
        2.0L * std::exp(-(d - 1.0L) * tt * tt / (2.0L * rr * rr * ll * ll))));
}

TailBoundResult stiefel_tail(int d, long n, double eps) {
    require(d >= 2, "stiefel tail requires d >= 2");
    require(n >= 2, "stiefel tail requires n >= 2");
    require(eps > 0, "stiefel tail requires eps > 0");
    const double nn = static_cast<double>(n);
    const double drift = 3.0 * std::sqrt(std::log(nn) / nn);
    const double t = eps - drift;
    TailBoundResult r = TailBoundResult::of(std::exp(-(nn - 2.0) * t * t / 8.0));
    if (!(nn >= std::exp(static_cast<double>(d))))
        r.add_violation("n >= e^d violated");
    if (!(drift < eps))
        r.add_violation("3 sqrt(ln n / n) < eps violated");
    return r;
}

TailBoundResult stiefel_union_tail(int d, long n, double eps) {
    require(d >= 2, "stiefel union tail requires d >= 2");
    require(n >= 2, "stiefel union tail requires n >= 2");
    require(eps >= 0, "stiefel union tail requires eps >= 0");
    const double nn = static_cast<double>(n);
    return TailBoundResult::of(2.0 * nn * std::exp(-(nn - 2.0) * eps * eps / 32.0));
}

namespace {

// 1 - P(a, t^2)^n, evaluated through the upper tail Q so the n-th power does
// not lose precision when P is close to 1.
double one_minus_regularized_pow(double a, double t, long n) {
    const double q = boost::math::gamma_q(a, t * t);
    if (q >= 1.0) return 1.0;
    return -std::expm1(static_cast<double>(n) * std::log1p(-q));
}

// integral_0^inf [1 - (gamma(d/2, y)/Gamma(d/2))^n] / sqrt(y) dy, via the
// substitution y = t^2 (which removes the endpoint singularity) and an
// upper truncation where the integrand falls below quad_tol * 1e-3 of the
// accumulated value.
double k_core_integral(int d, long n, double quad_tol, double* err_out) {
    const double a = 0.5 * d;
    auto integrand = [&](double t) { return 2.0 * one_minus_regularized_pow(a, t, n); };

    // the integrand is <= n Q(a, t^2), which decays like a chi-square tail;
    // double the cutoff until the remainder is negligible
    double upper = std::sqrt(static_cast<double>(d)) + 2.0;
    for (int i = 0; i < 120; ++i) {
        const double tail = static_cast<double>(n) * boost::math::gamma_q(a, upper * upper);
        if (tail < quad_tol * 1e-3) break;
        upper *= 1.5;
    }

    double error = 0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, 0.0, upper, 12, quad_tol * 1e-2, &error);
    if (!(error <= std::max(quad_tol, 1e-14) * std::max(1.0, std::abs(value))))
        throw std::runtime_error("stiefel K quadrature failed to converge");
    if (err_out) *err_out = error;
    return value;
}

}  // namespace

StiefelK stiefel_K(int d, long n, double quad_tol) {
    require(d >= 2, "stiefel K requires d >= 2");
    require(n >= d, "stiefel K requires n >= d");
    require(quad_tol > 0, "stiefel K requires quad_tol > 0");
    const double nn = static_cast<double>(n);
    double err = 0;
    const double core = k_core_integral(d, n, quad_tol, &err);
    const double scale = 1.0 + 0.5 * d / nn;
    const double root = std::sqrt(static_cast<double>(d) / nn);
    StiefelK out;
    out.k_value = scale * core / std::sqrt(2.0 * nn) - root;
    out.k_alt = scale * core / (2.0 * std::sqrt(nn)) - root;
    out.quad_error = err;
    return out;
}

double stiefel_K_mc_oracle(int d, long n, long trials, const rng::SeedPath& seed,
                           double* std_error, int workers) {
    require(trials >= 2, "oracle requires trials >= 2");
    std::vector<double> maxima(static_cast<std::size_t>(trials));
    workers = std::max(1, workers);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    auto worker = [&](int w) {
        for (long t = w; t < trials; t += workers) {
            rng::RandomStream stream(
                rng::SeedPath{seed.master_seed, static_cast<std::uint64_t>(t),
                              seed.stream_index});
            double best = 0;
            for (long i = 0; i < n; ++i) {
                double sq = 0;
                for (int j = 0; j < d; ++j) {
                    const double g = stream.gaussian() * inv_sqrt_n;
                    sq += g * g;
                }
                best = std::max(best, sq);
            }
            maxima[static_cast<std::size_t>(t)] = std::sqrt(best);
        }
    };
    if (workers == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker, w);
        for (auto& th : pool) th.join();
    }
    double mean = 0;
    for (double v : maxima) mean += v;
    mean /= static_cast<double>(trials);
    if (std_error) {
        double ss = 0;
        for (double v : maxima) ss += (v - mean) * (v - mean);
        *std_error = std::sqrt(ss / (static_cast<double>(trials) - 1.0) /
                               static_cast<double>(trials));
    }
    const double scale = 1.0 + 0.5 * d / static_cast<double>(n);
    if (std_error) *std_error *= scale;
    return scale * mean - std::sqrt(static_cast<double>(d) / static_cast<double>(n));
}

TailBoundResult stiefel_exact_tail(int d, long n, double eps, double quad_tol) {
    require(eps > 0, "stiefel exact tail requires eps > 0");
    const StiefelK k = stiefel_K(d, n, quad_tol);
    const double nn = static_cast<double>(n);
    const double t = eps - k.k_value;
    TailBoundResult r = TailBoundResult::of(std::exp(-(nn - 2.0) * t * t / 8.0));
    r.aux["K"] = k.k_value;
    if (!(k.k_value < eps)) r.add_violation("K < eps violated");
    return r;
}

TangentVector::TangentVector(Eigen::MatrixXd A_, Eigen::MatrixXd B_)
    : A(std::move(A_)), B(std::move(B_)) {
    if (A.rows() != A.cols()) throw std::invalid_argument("tangent A must be square");
    if (B.cols() != A.rows())
        throw std::invalid_argument("tangent B must have d columns");
    if (((A + A.transpose()).array() != 0.0).any())
        throw std::invalid_argument("tangent A must be exactly skew-symmetric");
}

double TangentVector::canonical_sq_norm() const {
    return 0.5 * A.squaredNorm() + B.squaredNorm();
}

double ricci_quadratic_form(int n, int d, const TangentVector& xi) {
    require(d >= 2, "ricci form requires d >= 2");
    if (n <= d + 1) throw std::domain_error("ricci form requires n > d + 1");
    if (xi.A.rows() != d) throw std::invalid_argument("tangent A must be d x d");
    if (xi.B.rows() != n - d) throw std::invalid_argument("tangent B must be (n-d) x d");
    const double sq = xi.canonical_sq_norm();
    if (!(sq > 0)) throw std::invalid_argument("tangent vector must be nonzero");
    const double a2 = xi.A.squaredNorm() / sq;
    const double b2 = xi.B.squaredNorm() / sq;
    return (n - 2.0) / 4.0 * a2 + (n - 0.5 * d - 1.5) * b2;
}

long sample_size(samplers::Model model, int d, double eps, double delta) {
    require(d >= 2, "sample size requires d >= 2");
    require(eps > 0, "sample size requires eps > 0");
    require(delta > 0 && delta < 1, "sample size requires 0 < delta < 1");
    double c;
    switch (model) {
        case samplers::Model::Sphere:
            c = (2.0 * d - 2.0 + 2.0 * eps * (d - 1.0) / 3.0) / (eps * eps);
            break;
        case samplers::Model::Ball:
            c = (2.0 * d + 2.0 + 2.0 * eps * (d + 1.0) / 3.0) / (eps * eps);
            break;
        default:
            throw std::domain_error("sample size is stated for the sphere and ball models");
    }
    return static_cast<long>(std::ceil(c * std::log(2.0 * d / delta)));
}

StiefelSampleSize stiefel_sample_size(double eps, double confidence, std::optional<int> d) {
    require(eps > 0, "stiefel sample size requires eps > 0");
    double log_term;
    if (confidence == 0.95) {
        log_term = std::log(20.0);
    } else if (confidence == 0.99) {
        log_term = std::log(100.0);
    } else {
        throw std::domain_error("stiefel sample size is stated for confidence 0.95 or 0.99");
    }
    StiefelSampleSize out;
    out.n = static_cast<long>(std::ceil(2.0 + 32.0 * log_term / (eps * eps)));
    const double nn = static_cast<double>(out.n);
    if (!(eps >= 6.0 * std::sqrt(std::log(nn) / nn))) {
        out.valid = false;
        out.notes.push_back("eps >= 6 sqrt(ln n / n) violated at the returned n");
    }
    if (d && !(nn >= std::exp(static_cast<double>(*d)))) {
        out.valid = false;
        out.notes.push_back("n >= e^d violated at the returned n");
    }
    return out;
}

ShellMoment shell_expected_sqnorm(int d, long n, double eps) {
    require(d >= 2, "shell moment requires d >= 2");
    require(n >= 1, "shell moment requires n >= 1");
    require(eps >= 0 && eps < 1, "shell moment requires 0 <= eps < 1");
    const double dd = d;
    const double ratio = dd / static_cast<double>(n);
    ShellMoment out;
    out.upper = ratio * dd / (dd + 2.0) * (1.0 + eps + 2.0 * (1.0 - eps) / dd);
    if (eps < 1e-8) {
        // the shell degenerates to the sphere of radius sqrt(d/n); the exact
        // ratio is 0/0 there
        out.exact = ratio;
        return out;
    }
    const double num =
        std::pow(1.0 + eps, 0.5 * (dd + 2.0)) - std::pow(1.0 - eps, 0.5 * (dd + 2.0));
    const double den = std::pow(1.0 + eps, 0.5 * dd) - std::pow(1.0 - eps, 0.5 * dd);
    out.exact = ratio * dd / (dd + 2.0) * num / den;
    return out;
}

TailBoundResult shell_parseval_prob(int d, long n, double eps) {
    require(d >= 2, "shell Parseval probability requires d >= 2");
    require(n >= 1, "shell Parseval probability requires n >= 1");
    require(eps > 0 && eps < 1, "shell Parseval probability requires 0 < eps < 1");
    const double dd = d;
    const double nn = static_cast<double>(n);
    const double denom =
        (dd + 2.0) * (1.0 + eps) * (3.0 * (dd + 2.0) * (1.0 + eps) + 4.0 * dd * eps);
    const double fail = 2.0 * dd * std::exp(-24.0 * eps * eps * nn / denom);
    auto r = TailBoundResult::of(1.0 - fail);
    r.aux["failure_term"] = fail;
    return r;
}

TailBoundResult paulsen_prob(int d, long n, double eps) {
    require(d >= 2, "paulsen probability requires d >= 2");
    require(n >= 1, "paulsen probability requires n >= 1");
    require(eps > 0 && eps < 1, "paulsen probability requires 0 < eps < 1");
    const double dd = d;
    const double nn = static_cast<double>(n);
    const double e2 = eps * eps;
    const double e4 = e2 * e2;

    const double numer = 2.0 * dd * std::exp(-nn * e4 / (2.0 * dd * dd * dd));
    const double denom = 1.0 - 2.0 * dd * std::exp(-6.0 * e2 * nn / (5.0 * (dd + 2.0) * (dd + 2.0)));

    // sharper pre-simplification form from the derivation
    const double proof_numer =
        2.0 * dd * std::exp(-nn * e4 / (2.0 * dd * (dd * dd - dd + 2.0 * e2 * (dd - 1.0) / 3.0)));
    const double proof_denom = shell_parseval_prob(d, n, eps).raw_value;

    TailBoundResult r = TailBoundResult::of(1.0 - numer / denom);
    r.aux["numerator"] = numer;
    r.aux["denominator"] = denom;
    if (proof_denom > 0) r.aux["proof_form"] = 1.0 - proof_numer / proof_denom;
    if (!(denom > 0)) {
        r.add_violation("1 - 2d exp(-6 eps^2 n / (5 (d+2)^2)) > 0 violated (n too small)");
        r.clamped = 0.0;
    }
    return r;
}

PaulsenDistanceBound paulsen_distance_bound(int d, double eps) {
    require(d >= 2, "paulsen distance bound requires d >= 2");
    require(eps >= 0, "paulsen distance bound requires eps >= 0");
    const double c = std::sqrt(20.0) + std::sqrt(2.0);
    PaulsenDistanceBound out;
    out.probabilistic = c * c * eps * eps * d;
    out.hamilton_moitra = 20.0 * eps * d * d;
    return out;
}

}  // namespace framecon::bounds
