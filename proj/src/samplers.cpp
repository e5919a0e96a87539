#include "framecon/samplers.hpp"

#include <cmath>

#include <Eigen/QR>

namespace framecon::samplers {

std::string to_string(Model model) {
    switch (model) {
        case Model::Sphere: return "sphere";
        case Model::Ball: return "ball";
        case Model::Shell: return "shell";
        case Model::Stiefel: return "stiefel";
        case Model::ConditionalShell: return "conditional_shell";
    }
    return "?";
}

Model model_from_string(const std::string& name) {
    if (name == "sphere") return Model::Sphere;
    if (name == "ball") return Model::Ball;
    if (name == "shell") return Model::Shell;
    if (name == "stiefel") return Model::Stiefel;
    if (name == "conditional_shell" || name == "conditional-shell")
        return Model::ConditionalShell;
    throw std::invalid_argument("unknown model: " + name);
}

double EnsembleSpec::radius() const {
    if (radius_override) return *radius_override;
    if (model == Model::Ball) return std::sqrt(static_cast<double>(d + 2) / n);
    return std::sqrt(static_cast<double>(d) / n);
}

void EnsembleSpec::validate() const {
    if (d < 2) throw std::invalid_argument("ensemble requires d >= 2");
    if (n < 1) throw std::invalid_argument("ensemble requires n >= 1");
    if (radius_override && *radius_override <= 0)
        throw std::invalid_argument("radius override must be positive");
    switch (model) {
        case Model::Shell:
        case Model::ConditionalShell:
            if (!(eps > 0 && eps < 1))
                throw std::invalid_argument("shell models require 0 < eps < 1");
            break;
        case Model::Stiefel:
            if (n < d) throw std::invalid_argument("stiefel requires n >= d");
            break;
        default:
            break;
    }
    if (model == Model::ConditionalShell && max_tries < 1)
        throw std::invalid_argument("conditional_shell requires max_tries >= 1");
}

AcceptanceExhausted::AcceptanceExhausted(int attempts_, int accepted_)
    : std::runtime_error("conditional shell sampling exhausted after " +
                         std::to_string(attempts_) + " tries (" + std::to_string(accepted_) +
                         " accepted); n is likely too small for this (d, eps)"),
      attempts(attempts_),
      accepted(accepted_) {}

namespace {

// Gaussian direction, re-drawn on the (measure-zero) zero vector. A hundred
// re-draws in a row means the stream is broken.
Eigen::VectorXd gaussian_direction(int d, rng::RandomStream& stream) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        Eigen::VectorXd g = stream.gaussian_vector(d);
        const double norm = g.norm();
        if (norm > 0) return g / norm;
    }
    throw std::runtime_error("gaussian sampler produced 100 zero vectors; RNG is broken");
}

}  // namespace

Eigen::VectorXd sample_sphere_vector(int d, double radius, rng::RandomStream& stream) {
    if (d < 2) throw std::invalid_argument("sphere sampler requires d >= 2");
    if (radius <= 0) throw std::invalid_argument("sphere sampler requires radius > 0");
    return radius * gaussian_direction(d, stream);
}

Eigen::VectorXd sample_ball_vector(int d, double radius, rng::RandomStream& stream) {
    if (d < 2) throw std::invalid_argument("ball sampler requires d >= 2");
    if (radius <= 0) throw std::invalid_argument("ball sampler requires radius > 0");
    Eigen::VectorXd dir = gaussian_direction(d, stream);
    const double u = stream.uniform01();
    return radius * std::exp(std::log(u) / d) * dir;
}

Eigen::VectorXd sample_shell_vector(int d, int n, double eps, rng::RandomStream& stream) {
    if (!(eps > 0 && eps < 1)) throw std::invalid_argument("shell sampler requires 0 < eps < 1");
    if (d < 2) throw std::invalid_argument("shell sampler requires d >= 2");
    const double ratio = static_cast<double>(d) / n;
    const double a = std::sqrt((1.0 - eps) * ratio);
    const double b = std::sqrt((1.0 + eps) * ratio);
    // radial density proportional to r^{d-1} on [a, b]: inverse CDF
    const double ad = std::pow(a, d);
    const double bd = std::pow(b, d);
    const double u = stream.uniform01();
    const double r = std::pow(ad + u * (bd - ad), 1.0 / d);
    return r * gaussian_direction(d, stream);
}

Frame sample_stiefel(int n, int d, rng::RandomStream& stream) {
    if (d < 2 || n < d) throw std::invalid_argument("stiefel sampler requires n >= d >= 2");
    for (int attempt = 0; attempt < 100; ++attempt) {
        Eigen::MatrixXd g = stream.gaussian_matrix(n, d);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
        const auto r_diag = qr.matrixQR().diagonal().head(d);
        bool full_rank = true;
        for (int j = 0; j < d; ++j) {
            if (r_diag[j] == 0.0) {
                full_rank = false;
                break;
            }
            if (r_diag[j] < 0) q.col(j) = -q.col(j);
        }
        if (full_rank) return Frame(std::move(q));
    }
    throw std::runtime_error("stiefel sampler drew 100 rank-deficient matrices; RNG is broken");
}

Frame sample_frame(const EnsembleSpec& spec, rng::RandomStream& stream) {
    spec.validate();
    switch (spec.model) {
        case Model::Stiefel:
            return sample_stiefel(spec.n, spec.d, stream);
        case Model::ConditionalShell:
            return sample_conditional_shell_frame(spec.d, spec.n, spec.eps, stream,
                                                  spec.max_tries);
        default:
            break;
    }
    Eigen::MatrixXd rows(spec.n, spec.d);
    const double radius = spec.radius();
    for (int i = 0; i < spec.n; ++i) {
        Eigen::VectorXd v;
        switch (spec.model) {
            case Model::Sphere: v = sample_sphere_vector(spec.d, radius, stream); break;
            case Model::Ball: v = sample_ball_vector(spec.d, radius, stream); break;
            case Model::Shell: v = sample_shell_vector(spec.d, spec.n, spec.eps, stream); break;
            default: throw std::logic_error("unreachable");
        }
        rows.row(i) = v.transpose();
    }
    return Frame(std::move(rows));
}

Frame sample_frame(const EnsembleSpec& spec, const rng::SeedPath& seed) {
    rng::RandomStream stream(seed);
    return sample_frame(spec, stream);
}

Frame sample_conditional_shell_frame(int d, int n, double eps, rng::RandomStream& stream,
                                     int max_tries) {
    if (max_tries < 1) throw std::invalid_argument("max_tries must be >= 1");
    EnsembleSpec shell;
    shell.model = Model::Shell;
    shell.d = d;
    shell.n = n;
    shell.eps = eps;
    for (int attempt = 0; attempt < max_tries; ++attempt) {
        Frame candidate = sample_frame(shell, stream);
        if (is_eps_parseval(candidate, eps)) return candidate;
    }
    throw AcceptanceExhausted(max_tries, 0);
}

Frame sample_conditional_shell_frame(int d, int n, double eps, const rng::SeedPath& seed,
                                     int max_tries) {
    rng::RandomStream stream(seed);
    return sample_conditional_shell_frame(d, n, eps, stream, max_tries);
}

}  // namespace framecon::samplers
