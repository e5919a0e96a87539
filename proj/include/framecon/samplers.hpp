#ifndef FRAMECON_SAMPLERS_HPP
#define FRAMECON_SAMPLERS_HPP

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "framecon/frame.hpp"
#include "framecon/rng.hpp"

namespace framecon::samplers {

enum class Model { Sphere, Ball, Shell, Stiefel, ConditionalShell };

std::string to_string(Model model);
Model model_from_string(const std::string& name);

// Which random ensemble to draw from, plus its parameters.
struct EnsembleSpec {
    Model model = Model::Sphere;
    int d = 2;
    int n = 2;
    double eps = 0;  // shell / conditional_shell width
    std::optional<double> radius_override;
    int max_tries = 1000;  // conditional_shell rejection budget

    // sphere default sqrt(d/n); ball default sqrt((d+2)/n), which makes
    // E[vv^T] = I/n in both models.
    double radius() const;

    void validate() const;  // throws std::invalid_argument
};

// Rejection sampling gave up: n is too small for this (d, eps) to reach the
// Parseval acceptance region in the allotted tries.
class AcceptanceExhausted : public std::runtime_error {
public:
    AcceptanceExhausted(int attempts_, int accepted_);
    int attempts;
    int accepted;
};

// Uniform on the sphere of the given radius (Gaussian direction,
// renormalized). Output norm equals `radius` up to rounding.
Eigen::VectorXd sample_sphere_vector(int d, double radius, rng::RandomStream& stream);

// Uniform on the closed ball of the given radius (direction times
// radius * u^{1/d}).
Eigen::VectorXd sample_ball_vector(int d, double radius, rng::RandomStream& stream);

// Uniform on the shell { (1-eps) d/n <= ||v||^2 <= (1+eps) d/n }; radius has
// density proportional to r^{d-1}, drawn by inverse CDF.
Eigen::VectorXd sample_shell_vector(int d, int n, double eps, rng::RandomStream& stream);

// Draw from the orthogonally invariant probability measure on St(n, d) via
// thin QR of an n x d standard Gaussian matrix with the R diagonal forced
// positive; the rows of the resulting matrix are the frame vectors, so the
// output is an exactly Parseval frame.
Frame sample_stiefel(int n, int d, rng::RandomStream& stream);

Frame sample_frame(const EnsembleSpec& spec, rng::RandomStream& stream);
Frame sample_frame(const EnsembleSpec& spec, const rng::SeedPath& seed);

// Exact draw from the conditional measure: n i.i.d. shell vectors, accepted
// iff the frame is eps-nearly Parseval. Throws AcceptanceExhausted after
// max_tries rejections.
Frame sample_conditional_shell_frame(int d, int n, double eps, rng::RandomStream& stream,
                                     int max_tries);
Frame sample_conditional_shell_frame(int d, int n, double eps, const rng::SeedPath& seed,
                                     int max_tries);

}  // namespace framecon::samplers

#endif
