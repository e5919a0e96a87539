#include "framecon/frame.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace framecon {

Frame::Frame(Eigen::MatrixXd vectors) : mat_(std::move(vectors)) {
    if (mat_.cols() < 2) throw std::invalid_argument("frame requires ambient dimension d >= 2");
    if (mat_.rows() < 1) throw std::invalid_argument("frame requires at least one vector");
    if (!mat_.allFinite()) throw std::invalid_argument("frame vectors must have finite entries");
}

SymmetricMatrix SymmetricMatrix::from_raw(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("symmetric matrix must be square");
    Eigen::MatrixXd m(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        m(i, i) = a(i, i);
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return SymmetricMatrix(std::move(m));
}

SymmetricMatrix SymmetricMatrix::identity(int dim) {
    return SymmetricMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

SymmetricMatrix frame_operator(const Frame& frame) {
    const Eigen::MatrixXd& t = frame.vectors();
    const int d = frame.dim();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    // accumulate the upper triangle and mirror, so S is symmetric exactly
    for (int i = 0; i < frame.count(); ++i) {
        const auto row = t.row(i);
        for (int j = 0; j < d; ++j)
            for (int k = j; k < d; ++k) s(j, k) += row[j] * row[k];
    }
    for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k) s(k, j) = s(j, k);
    return SymmetricMatrix::from_raw(s);
}

DeviationStats deviation_stats(const Frame& frame) {
    const int d = frame.dim();
    const int n = frame.count();
    const SymmetricMatrix s = frame_operator(frame);

    DeviationStats out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.entries(), Eigen::EigenvaluesOnly);
    out.min_eig = eig.eigenvalues().minCoeff();
    out.max_eig = eig.eigenvalues().maxCoeff();
    out.op_dev = std::max(std::abs(out.min_eig - 1.0), std::abs(out.max_eig - 1.0));
    out.fro_dev = (s.entries() - Eigen::MatrixXd::Identity(d, d)).norm();

    out.row_norms = frame.vectors().rowwise().norm();
    const double target = enpf_norm(d, n);
    out.max_row_dev_additive = (out.row_norms.array() - target).abs().maxCoeff();
    out.max_row_dev_relative =
        (out.row_norms.array().square() * (static_cast<double>(n) / d) - 1.0).abs().maxCoeff();
    return out;
}

bool is_eps_parseval(const Frame& frame, double eps) {
    if (eps < 0) throw std::invalid_argument("eps must be nonnegative");
    return deviation_stats(frame).op_dev <= eps;
}

bool is_eps_equal_norm(const Frame& frame, double eps, EqualNormMode mode) {
    if (eps < 0) throw std::invalid_argument("eps must be nonnegative");
    const double ratio = static_cast<double>(frame.dim()) / frame.count();
    if (mode == EqualNormMode::Relative) {
        const auto sq = frame.vectors().rowwise().squaredNorm().array();
        return (sq >= (1.0 - eps) * ratio).all() && (sq <= (1.0 + eps) * ratio).all();
    }
    const double target = std::sqrt(ratio);
    return (frame.vectors().rowwise().norm().array() - target).abs().maxCoeff() <= eps;
}

double enpf_norm(int d, int n) {
    if (d < 2) throw std::invalid_argument("enpf_norm requires d >= 2");
    if (n < d) throw std::invalid_argument("enpf_norm requires n >= d");
    return std::sqrt(static_cast<double>(d) / n);
}

bool is_frame(const Frame& frame, double tol) {
    if (frame.count() < frame.dim()) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(frame_operator(frame).entries(),
                                                       Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff() > tol;
}

void write_frame(std::ostream& os, const Frame& frame) {
    os << "# frame d=" << frame.dim() << " n=" << frame.count() << "\n";
    char buf[40];
    for (int i = 0; i < frame.count(); ++i) {
        for (int j = 0; j < frame.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", frame.vectors()(i, j));
            os << (j ? " " : "") << buf;
        }
        os << "\n";
    }
}

Frame read_frame(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("frame stream is empty");
    int d = 0, n = 0;
    if (std::sscanf(header.c_str(), "# frame d=%d n=%d", &d, &n) != 2)
        throw std::runtime_error("malformed frame header: " + header);
    Eigen::MatrixXd m(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            if (!(is >> m(i, j)))
                throw std::runtime_error("frame body ended early at row " + std::to_string(i));
    return Frame(std::move(m));
}

void save_frame(const std::filesystem::path& path, const Frame& frame) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_frame(os, frame);
    if (!os) throw std::runtime_error("write to " + path.string() + " failed");
}

Frame load_frame(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    return read_frame(is);
}

}  // namespace framecon
