#include "framecon/paulsen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "framecon/bounds.hpp"
#include "framecon/samplers.hpp"

namespace framecon::paulsen {

Frame radial_project(const Frame& frame) {
    const double target = enpf_norm(frame.dim(), frame.count());
    Eigen::MatrixXd out = frame.vectors();
    for (int i = 0; i < frame.count(); ++i) {
        const double norm = out.row(i).norm();
        if (norm == 0.0)
            throw std::invalid_argument("radial projection is undefined on zero vectors");
        out.row(i) *= target / norm;
    }
    return Frame(std::move(out));
}

NonSpanning::NonSpanning()
    : std::runtime_error("frame operator is singular; the vectors do not span R^d") {}

namespace {

struct Feasibility {
    double op_dev;
    double row_dev;
    double worst() const { return std::max(op_dev, row_dev); }
};

Feasibility feasibility(const Eigen::MatrixXd& x, double target) {
    Eigen::MatrixXd gram = x.transpose() * x;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    Feasibility f;
    f.op_dev = (eig.eigenvalues().array() - 1.0).abs().maxCoeff();
    f.row_dev = (x.rowwise().norm().array() - target).abs().maxCoeff();
    return f;
}

// One alternating-projection round: polar factor (nearest matrix with
// orthonormal columns) followed by row rescaling to the common norm.
// Returns false when the iterate lost rank.
bool ap_round(Eigen::MatrixXd& x, double target) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.singularValues().minCoeff() <= 0.0) return false;
    x = svd.matrixU() * svd.matrixV().transpose();
    for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) *= target / x.row(i).norm();
    return true;
}

// Minimal-norm multiplier solve for the ENPF constraint system at X and the
// induced combination sum lam_G grad G + sum lam_H grad H, where
// G_(jk) = (X^T X - I)_(jk) and H_i = (||x_i||^2 - d/n)/2. The Gram matrix
// has a diagonal row block, so the multipliers come from a d(d+1)/2 Schur
// system; it is rank-deficient by one (the trace of the Gram constraints
// equals twice the sum of the row constraints), handled by a minimum-norm
// least-squares solve.
Eigen::MatrixXd constraint_combination(const Eigen::MatrixXd& x, const Eigen::VectorXd& c_gram,
                                       const Eigen::VectorXd& c_rows) {
    const int n = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    const int m = d * (d + 1) / 2;

    Eigen::VectorXd h(n);  // squared row norms
    for (int i = 0; i < n; ++i) h[i] = x.row(i).squaredNorm();
    const Eigen::MatrixXd s = x.transpose() * x;

    // <grad G_a, grad G_b> for index pairs a = (j,k), b = (l,m); exact in S,
    // not the S = I idealization, so the solve also works off the variety
    Eigen::MatrixXd gram_gg(m, m);
    Eigen::MatrixXd cross(m, n);  // <grad G_(jk), grad H_i> = 2 x_ij x_ik
    std::vector<std::pair<int, int>> pairs(m);
    int a = 0;
    for (int j = 0; j < d; ++j) {
        for (int k = j; k < d; ++k, ++a) {
            pairs[a] = {j, k};
            cross.row(a) = 2.0 * x.col(j).cwiseProduct(x.col(k)).transpose();
        }
    }
    for (a = 0; a < m; ++a) {
        const auto [j, k] = pairs[a];
        for (int b = a; b < m; ++b) {
            const auto [l, mm] = pairs[b];
            const double v = s(k, l) * (j == mm) + s(k, mm) * (j == l) +
                             s(j, l) * (k == mm) + s(j, mm) * (k == l);
            gram_gg(a, b) = v;
            gram_gg(b, a) = v;
        }
    }

    const Eigen::VectorXd inv_h = h.cwiseInverse();
    Eigen::MatrixXd schur = gram_gg - cross * inv_h.asDiagonal() * cross.transpose();
    Eigen::VectorXd rhs = c_gram - cross * inv_h.cwiseProduct(c_rows);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(schur);
    Eigen::VectorXd lam_g = cod.solve(rhs);
    Eigen::VectorXd lam_h = inv_h.cwiseProduct(c_rows - cross.transpose() * lam_g);

    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
    a = 0;
    for (int j = 0; j < d; ++j) {
        for (int k = j; k < d; ++k, ++a) {
            l(j, k) += lam_g[a];
            l(k, j) += lam_g[a];
        }
    }
    return x * l + lam_h.asDiagonal() * x;
}

// Exact orthogonal projection of R onto the tangent space of the ENPF
// variety at a (near-)feasible X.
Eigen::MatrixXd project_tangent(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r) {
    const int n = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    Eigen::MatrixXd sym = x.transpose() * r;
    sym += sym.transpose().eval();
    Eigen::VectorXd c_gram(d * (d + 1) / 2);
    int a = 0;
    for (int j = 0; j < d; ++j)
        for (int k = j; k < d; ++k, ++a) c_gram[a] = sym(j, k);
    Eigen::VectorXd c_rows(n);
    for (int i = 0; i < n; ++i) c_rows[i] = x.row(i).dot(r.row(i));
    return r - constraint_combination(x, c_gram, c_rows);
}

// Gauss-Newton retraction onto the ENPF variety: quadratic convergence and,
// unlike plain alternating projections, no crawl near configurations where
// the Parseval and equal-norm sets meet tangentially.
bool newton_retract(Eigen::MatrixXd& x, double target, double goal = 1e-13) {
    const int n = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    const double h = target * target;
    double prev = 1e300;
    for (int it = 0; it < 40; ++it) {
        Eigen::MatrixXd gram = x.transpose() * x;
        Eigen::VectorXd c_gram(d * (d + 1) / 2);
        int a = 0;
        double worst = 0;
        for (int j = 0; j < d; ++j) {
            for (int k = j; k < d; ++k, ++a) {
                c_gram[a] = gram(j, k) - (j == k ? 1.0 : 0.0);
                worst = std::max(worst, std::abs(c_gram[a]));
            }
        }
        Eigen::VectorXd c_rows(n);
        for (int i = 0; i < n; ++i) {
            c_rows[i] = 0.5 * (x.row(i).squaredNorm() - h);
            worst = std::max(worst, std::abs(c_rows[i]));
        }
        if (worst <= goal) return true;
        if (worst > 0.5 || worst > 4.0 * prev) return false;  // outside the basin
        prev = worst;
        x -= constraint_combination(x, c_gram, c_rows);
    }
    return feasibility(x, target).worst() <= 1e-11;
}

bool retract(Eigen::MatrixXd& x, double target) {
    if (newton_retract(x, target)) return true;
    // fall back to a few alternating rounds to re-enter the Newton basin
    for (int i = 0; i < 60; ++i) {
        if (!ap_round(x, target)) return false;
        if (feasibility(x, target).worst() <= 1e-2 && newton_retract(x, target)) return true;
    }
    return false;
}

// Rotate `row` by a random angle in [0, max_angle] within a random plane
// containing it.
void perturb_row(Eigen::RowVectorXd& row, double max_angle, rng::RandomStream& stream) {
    const double norm = row.norm();
    if (norm == 0.0) return;
    Eigen::RowVectorXd v = stream.gaussian_vector(row.size()).transpose();
    v -= (v.dot(row) / (norm * norm)) * row;
    const double vn = v.norm();
    if (vn < 1e-14) return;
    const double angle = stream.uniform01() * max_angle;
    row = std::cos(angle) * row + (std::sin(angle) * norm / vn) * v;
}

struct RestartOutcome {
    Eigen::MatrixXd x;
    double dist_sq = std::numeric_limits<double>::infinity();
    bool converged = false;
    long iterations = 0;
};

RestartOutcome run_restart(const Eigen::MatrixXd& input, const Eigen::MatrixXd& start,
                           const NearestEnpfOptions& opts, double target) {
    RestartOutcome out;
    Eigen::MatrixXd x = start;

    // phase 1: land on the variety (short alternating pull + Newton)
    long it = 0;
    for (; it < 30; ++it) {
        if (feasibility(x, target).worst() <= 1e-3) break;
        if (!ap_round(x, target)) {
            out.x = x;
            return out;
        }
    }
    out.iterations = it;
    if (!retract(x, target)) {
        out.x = x;
        out.dist_sq = (input - x).squaredNorm();
        return out;
    }

    // phase 2: projected-gradient descent of ||input - X||^2 over the
    // variety with Armijo backtracking, retracting every step
    double f = (input - x).squaredNorm();
    const double grad_goal = 1e-11 * std::max(1.0, std::sqrt(f));
    const long budget = std::max<long>(300, opts.max_iters / 10);
    for (long pg = 0; pg < budget; ++pg) {
        Eigen::MatrixXd g = project_tangent(x, x - input);
        const double gn = g.norm();
        ++out.iterations;
        if (gn <= grad_goal) break;
        double step = 1.0;
        bool improved = false;
        double decrease = 0;
        while (step > 1e-8) {
            Eigen::MatrixXd cand = x - step * g;
            if (retract(cand, target)) {
                const double fc = (input - cand).squaredNorm();
                if (fc < f - 1e-4 * step * gn * gn) {
                    decrease = f - fc;
                    x = cand;
                    f = fc;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!improved) break;
        // double-precision floor: along a numerically flat valley the
        // remaining decrease is below measurement noise
        if (decrease < 1e-15 * (1.0 + f)) break;
    }
    out.x = x;
    out.dist_sq = f;
    out.converged = feasibility(x, target).worst() <= opts.tol;
    return out;
}

}  // namespace

Frame nearest_parseval(const Frame& frame) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(frame.vectors(),
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues().minCoeff();
    if (!(smin > 1e-12 * svd.singularValues().maxCoeff()) || smin <= 0.0)
        throw NonSpanning();
    return Frame(svd.matrixU() * svd.matrixV().transpose());
}

NearestEnpfResult nearest_enpf(const Frame& frame, const NearestEnpfOptions& opts) {
    if (frame.count() < frame.dim() || !is_frame(frame)) throw NonSpanning();
    if (opts.tol <= 0) throw std::invalid_argument("tol must be positive");
    if (opts.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (opts.restarts < 0) throw std::invalid_argument("restarts must be >= 0");

    const Eigen::MatrixXd& input = frame.vectors();
    const double target = enpf_norm(frame.dim(), frame.count());

    RestartOutcome best_converged, best_any;
    int best_restart = -1;
    for (int r = 0; r <= opts.restarts; ++r) {
        // even restarts perturb the input, odd ones hop from the incumbent
        // with a shrinking angle; hops let a degenerate input improve a few
        // vectors at a time without losing the progress of the others
        Eigen::MatrixXd start = input;
        double angle = opts.restart_angle;
        if (r > 0) {
            if (r % 2 == 0 && best_restart >= 0) {
                start = best_converged.x;
                angle = opts.restart_angle / static_cast<double>(r);
            }
            rng::RandomStream stream(
                rng::SeedPath{opts.seed, static_cast<std::uint64_t>(r), 0});
            for (int i = 0; i < start.rows(); ++i) {
                Eigen::RowVectorXd row = start.row(i);
                perturb_row(row, angle, stream);
                start.row(i) = row;
            }
        }
        RestartOutcome outcome = run_restart(input, start, opts, target);
        if (outcome.dist_sq < best_any.dist_sq) best_any = outcome;
        if (outcome.converged && outcome.dist_sq < best_converged.dist_sq) {
            best_converged = outcome;
            best_restart = r;
        }
    }

    const bool ok = best_restart >= 0;
    const RestartOutcome& pick = ok ? best_converged : best_any;
    if (!std::isfinite(pick.dist_sq)) throw NonSpanning();
    return NearestEnpfResult{Frame(pick.x), pick.dist_sq, ok, best_restart, pick.iterations};
}

PaulsenReport paulsen_pipeline(int d, long n, double eps, const rng::SeedPath& seed,
                               const NearestEnpfOptions& search, int max_tries) {
    Frame input = samplers::sample_conditional_shell_frame(d, static_cast<int>(n), eps, seed,
                                                           max_tries);
    Frame projected = radial_project(input);

    const double target = enpf_norm(d, static_cast<int>(n));
    const double dist_proj =
        (input.vectors().rowwise().norm().array() - target).square().sum();

    NearestEnpfOptions opts = search;
    opts.seed = rng::detail::derive_seed(seed) ^ 0x454e5046ULL;
    NearestEnpfResult found = nearest_enpf(projected, opts);

    const double total_root = std::sqrt(dist_proj) + std::sqrt(found.dist_sq);
    return PaulsenReport{
        /*input_eps=*/eps,
        /*projected_is_eps2d_parseval=*/is_eps_parseval(projected, eps * eps / d),
        /*dist_to_projection_sq=*/dist_proj,
        /*enpf_candidate=*/std::move(found.frame),
        /*dist_to_enpf_sq=*/found.dist_sq,
        /*total_sq=*/total_root * total_root,
        /*theorem_bound=*/bounds::paulsen_distance_bound(d, eps).probabilistic,
        /*hm_bound_on_projection=*/20.0 * (eps * eps / d) * d * d,
        /*search_converged=*/found.converged};
}

ExampleFamily example_family(double theta, int k) {
    if (!(theta > 0 && theta < 3.14159265358979323846 / 8))
        throw std::invalid_argument("example family requires 0 < theta < pi/8");
    if (k < 1) throw std::invalid_argument("example family requires k >= 1");

    const double s2 = std::sqrt(2.0) / 2.0;
    Eigen::MatrixXd u(2, 4), v(2, 4);
    u << std::cos(2 * theta), std::cos(2 * theta), 0, 0,
         std::sin(2 * theta), -std::sin(2 * theta), 1, 1;
    u *= s2;
    v << std::cos(theta), std::cos(-theta), std::sin(-theta), std::sin(theta),
         std::sin(theta), std::sin(-theta), std::cos(-theta), std::cos(theta);
    v *= s2;

    const int d = 2 * k;
    const int n = 4 * k;
    Eigen::MatrixXd uk = Eigen::MatrixXd::Zero(d, n);
    Eigen::MatrixXd vk = Eigen::MatrixXd::Zero(d, n);
    for (int b = 0; b < k; ++b) {
        uk.block(2 * b, 4 * b, 2, 4) = u;
        vk.block(2 * b, 4 * b, 2, 4) = v;
    }

    const double block_dist_sq = (u - v).squaredNorm();
    return ExampleFamily{theta,
                         k,
                         4.0 * std::sin(theta) * std::sin(theta),
                         uk,
                         vk,
                         Frame(uk.transpose()),
                         Frame(vk.transpose()),
                         block_dist_sq,
                         k * block_dist_sq};
}

std::vector<FamilyVerificationRow> verify_lower_bound_family(
    const std::vector<double>& theta_grid, const std::vector<int>& k_grid,
    const NearestEnpfOptions& search) {
    if (theta_grid.empty() || k_grid.empty())
        throw std::invalid_argument("verification grids must be nonempty");
    std::vector<FamilyVerificationRow> rows;
    for (double theta : theta_grid) {
        for (int k : k_grid) {
            const ExampleFamily fam = example_family(theta, k);
            FamilyVerificationRow row;
            row.theta = theta;
            row.k = k;
            row.d = 2 * k;
            row.n = 4 * k;
            row.eps = fam.eps;
            row.family_dist_sq = fam.family_dist_sq;
            row.lower_bound = row.d * fam.eps / 8.0;
            NearestEnpfResult found = nearest_enpf(fam.u_frame, search);
            row.search_dist_sq = found.dist_sq;
            row.search_converged = found.converged;
            row.ratio_dist_over_eps_d = fam.family_dist_sq / (fam.eps * row.d);
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace framecon::paulsen
