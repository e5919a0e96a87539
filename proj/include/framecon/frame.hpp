#ifndef FRAMECON_FRAME_HPP
#define FRAMECON_FRAME_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Core>

namespace framecon {

// Ordered sequence of n vectors in R^d, stored as the rows of an n x d
// matrix (the analysis matrix). The d x n synthesis view is derived on
// demand, never stored. Immutable after construction.
//
// Spanning is not required; degenerate inputs (zero vectors, n < d) are
// representable and only operations that need an invertible frame operator
// reject them.
class Frame {
public:
    // rows of `vectors` are the frame vectors; requires d >= 2, n >= 1,
    // finite entries.
    explicit Frame(Eigen::MatrixXd vectors);

    int dim() const { return static_cast<int>(mat_.cols()); }
    int count() const { return static_cast<int>(mat_.rows()); }

    const Eigen::MatrixXd& vectors() const { return mat_; }
    Eigen::RowVectorXd vector(int i) const { return mat_.row(i); }

    Eigen::MatrixXd synthesis() const { return mat_.transpose(); }

private:
    Eigen::MatrixXd mat_;
};

// d x d real symmetric matrix; symmetrized exactly on construction.
class SymmetricMatrix {
public:
    static SymmetricMatrix from_raw(const Eigen::MatrixXd& a);
    static SymmetricMatrix identity(int dim);

    int dim() const { return static_cast<int>(mat_.rows()); }
    const Eigen::MatrixXd& entries() const { return mat_; }
    double operator()(int i, int j) const { return mat_(i, j); }

private:
    explicit SymmetricMatrix(Eigen::MatrixXd m) : mat_(std::move(m)) {}
    Eigen::MatrixXd mat_;
};

struct DeviationStats {
    double op_dev = 0;   // ||S - I||_op
    double fro_dev = 0;  // ||S - I||_F
    double min_eig = 0;
    double max_eig = 0;
    Eigen::VectorXd row_norms;
    double max_row_dev_additive = 0;  // max_i | ||x_i|| - sqrt(d/n) |
    double max_row_dev_relative = 0;  // max_i | ||x_i||^2 n/d - 1 |
};

enum class EqualNormMode { Relative, Additive };

// S = sum_i x_i x_i^T; exactly symmetric, PSD by construction.
SymmetricMatrix frame_operator(const Frame& frame);

DeviationStats deviation_stats(const Frame& frame);

// ||S - I||_op <= eps
bool is_eps_parseval(const Frame& frame, double eps);

// Relative: (1-eps) d/n <= ||x_i||^2 <= (1+eps) d/n for all i.
// Additive: | ||x_i|| - sqrt(d/n) | <= eps for all i.
bool is_eps_equal_norm(const Frame& frame, double eps, EqualNormMode mode);

// Common norm sqrt(d/n) of an equal-norm Parseval frame.
double enpf_norm(int d, int n);

// True iff the vectors span R^d (frame operator invertible).
bool is_frame(const Frame& frame, double tol = 1e-12);

// Plain-text format: header `# frame d=<d> n=<n>`, then one row per vector,
// whitespace-separated decimals at 17 significant digits (round-trip exact).
void write_frame(std::ostream& os, const Frame& frame);
Frame read_frame(std::istream& is);
void save_frame(const std::filesystem::path& path, const Frame& frame);
Frame load_frame(const std::filesystem::path& path);

}  // namespace framecon

#endif
