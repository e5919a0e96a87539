#ifndef FRAMECON_PAULSEN_HPP
#define FRAMECON_PAULSEN_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "framecon/frame.hpp"
#include "framecon/rng.hpp"

namespace framecon::paulsen {

// Rescale every vector to norm sqrt(d/n), preserving direction. The
// per-vector displacement is | ||x_i|| - sqrt(d/n) | exactly. Throws
// std::invalid_argument on zero vectors.
Frame radial_project(const Frame& frame);

class NonSpanning : public std::runtime_error {
public:
    NonSpanning();
};

// Polar factor of the analysis matrix: the Frobenius-nearest frame with
// orthonormal columns (exactly Parseval). Throws NonSpanning on rank
// deficiency.
Frame nearest_parseval(const Frame& frame);

struct NearestEnpfOptions {
    long max_iters = 10000;
    double tol = 1e-9;
    int restarts = 8;
    std::uint64_t seed = 0x656e7066;  // restart perturbation stream
    double restart_angle = 0.1;       // max per-vector rotation angle
};

struct NearestEnpfResult {
    Frame frame;          // best ENPF found (within tol when converged)
    double dist_sq = 0;   // squared Frobenius distance input -> output
    bool converged = false;
    int best_restart = -1;
    long iterations = 0;  // alternating-projection + polish steps of the best run
};

// Upper bound on the distance to the equal-norm Parseval variety: multistart
// alternating projections (polar factor / row rescale) followed by a
// projected-gradient polish of ||input - X||_F^2 over the variety. Restarts
// perturb each vector by a small random rotation; the unperturbed start can
// stall on symmetric inputs whose nearest ENPF breaks the symmetry.
// Never claimed globally optimal. Throws NonSpanning when the frame
// operator is singular; when no restart meets tol, the best iterate is
// returned with converged = false.
NearestEnpfResult nearest_enpf(const Frame& frame, const NearestEnpfOptions& opts = {});

struct PaulsenReport {
    double input_eps;
    bool projected_is_eps2d_parseval;
    double dist_to_projection_sq;  // sum_i ||x_i - P(x_i)||^2 <= 2 eps^2 d
    Frame enpf_candidate;
    double dist_to_enpf_sq;  // projected frame -> candidate
    double total_sq;         // (sqrt(proj) + sqrt(enpf))^2, triangle bound
    double theorem_bound;    // (sqrt20 + sqrt2)^2 eps^2 d
    double hm_bound_on_projection;  // 20 (eps^2/d) d^2
    bool search_converged;
};

// Draw a conditional-shell frame, radially project it, test the projected
// frame for eps^2/d-near-Parsevalness, search for a nearby ENPF, and
// assemble the distance accounting. Propagates AcceptanceExhausted.
PaulsenReport paulsen_pipeline(int d, long n, double eps, const rng::SeedPath& seed,
                               const NearestEnpfOptions& search = {}, int max_tries = 1000);

// The 2x4 block pair and its k-fold block-diagonal extension: U_k is
// eps-nearly equal-norm and Parseval with eps = 4 sin^2(theta); V_k is
// exactly ENPF and is the closest one to U_k, at squared distance
// k ||U - V||_F^2 >= d eps / 8.
struct ExampleFamily {
    double theta;
    int k;
    double eps;                   // 4 sin^2(theta)
    Eigen::MatrixXd u_synthesis;  // d x n, d = 2k, n = 4k
    Eigen::MatrixXd v_synthesis;
    Frame u_frame;  // rows = columns of the synthesis matrices
    Frame v_frame;
    double block_dist_sq;   // ||U - V||_F^2 for the 2x4 blocks
    double family_dist_sq;  // k * block_dist_sq
};

// Requires 0 < theta < pi/8 and k >= 1.
ExampleFamily example_family(double theta, int k);

struct FamilyVerificationRow {
    double theta = 0;
    int k = 0;
    int d = 0;
    long n = 0;
    double eps = 0;             // 4 sin^2(theta)
    double family_dist_sq = 0;  // exact k ||U - V||_F^2
    double lower_bound = 0;     // d eps / 8
    double search_dist_sq = 0;  // nearest_enpf from U_k
    bool search_converged = false;
    double ratio_dist_over_eps_d = 0;  // family_dist_sq / (eps d)
};

// One row per (theta, k) grid point; demonstrates the Theta(eps d) scaling
// of the family against the probabilistic eps^2 d bound.
std::vector<FamilyVerificationRow> verify_lower_bound_family(
    const std::vector<double>& theta_grid, const std::vector<int>& k_grid,
    const NearestEnpfOptions& search = {});

}  // namespace framecon::paulsen

#endif
