#include <doctest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "framecon/frame.hpp"
#include "framecon/paulsen.hpp"
#include "framecon/rng.hpp"
#include "framecon/samplers.hpp"
#include "test_support.hpp"

using namespace framecon;

TEST_CASE("frame operator of the standard basis is the identity") {
    for (int d : {2, 3, 5}) {
        Frame frame(Eigen::MatrixXd::Identity(d, d));
        CHECK((frame_operator(frame).entries() - Eigen::MatrixXd::Identity(d, d)).norm() ==
              0.0);
    }
}

TEST_CASE("frame operator of the Mercedes-Benz frame is the identity") {
    // oracle: direct accumulation of the three outer products
    const double r = std::sqrt(2.0 / 3.0);
    Eigen::MatrixXd rows(3, 2);
    Eigen::Matrix2d expected = Eigen::Matrix2d::Zero();
    for (int k = 0; k < 3; ++k) {
        const double ang = 2.0 * M_PI * k / 3.0;
        rows(k, 0) = r * std::cos(ang);
        rows(k, 1) = r * std::sin(ang);
        Eigen::Vector2d x(rows(k, 0), rows(k, 1));
        expected += x * x.transpose();
    }
    CHECK((expected - Eigen::Matrix2d::Identity()).norm() < 1e-15);

    const SymmetricMatrix s = frame_operator(Frame(rows));
    CHECK((s.entries() - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-15);
}

TEST_CASE("parseval predicate at zero tolerance") {
    CHECK(is_eps_parseval(Frame(Eigen::MatrixXd::Identity(3, 3)), 0.0));
    CHECK_FALSE(is_eps_parseval(Frame(Eigen::MatrixXd::Zero(4, 3)), 0.5));
    CHECK_THROWS_AS(is_eps_parseval(Frame(Eigen::MatrixXd::Identity(3, 3)), -0.1),
                    std::invalid_argument);
}

TEST_CASE("block example frame operator has eigenvalues within 4 sin^2(theta) of 1") {
    const double theta = 0.1;
    const auto fam = paulsen::example_family(theta, 1);
    const auto stats = deviation_stats(fam.u_frame);
    const double eps = 4.0 * std::sin(theta) * std::sin(theta);
    CHECK(stats.min_eig >= 1.0 - eps - 1e-15);
    CHECK(stats.max_eig <= 1.0 + eps + 1e-15);
    CHECK(is_eps_parseval(fam.u_frame, eps));
}

TEST_CASE("deviation stats on degenerate frames") {
    SUBCASE("standard basis") {
        const auto stats = deviation_stats(Frame(Eigen::MatrixXd::Identity(4, 4)));
        CHECK(stats.op_dev == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(stats.fro_dev == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("all-zero frame: S - I = -I") {
        const Frame zero(Eigen::MatrixXd::Zero(5, 3));
        const auto stats = deviation_stats(zero);
        CHECK(stats.op_dev == doctest::Approx(1.0));
        CHECK(stats.min_eig == doctest::Approx(0.0));
        CHECK_FALSE(is_eps_parseval(zero, 0.5));
    }
}

TEST_CASE("op_dev from eigenvalues matches the singular-value route") {
    // independent oracle: largest |sigma^2 - 1| over singular values of the
    // n x d analysis matrix
    samplers::EnsembleSpec spec{samplers::Model::Sphere, 3, 1000};
    Frame frame = samplers::sample_frame(spec, rng::SeedPath{20250809, 0, 0});
    const auto stats = deviation_stats(frame);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(frame.vectors());
    double from_svd = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        const double sq = svd.singularValues()[i] * svd.singularValues()[i];
        from_svd = std::max(from_svd, std::abs(sq - 1.0));
    }
    CHECK(stats.op_dev == doctest::Approx(from_svd).epsilon(1e-8));
}

TEST_CASE("equal-norm predicates") {
    SUBCASE("exactly equal-norm frame passes both modes at eps = 0") {
        // d/n = 1/4 and sqrt(1/4) = 1/2 are exact in binary, so signed unit
        // vectors scaled by 1/2 have representable norm and squared norm
        const int d = 2, n = 8;
        CHECK(enpf_norm(d, n) == 0.5);
        Eigen::MatrixXd rows(n, d);
        for (int i = 0; i < n; ++i) {
            rows.row(i).setZero();
            rows(i, i % d) = (i < 4 ? 0.5 : -0.5);
        }
        const Frame equal(rows);
        CHECK(is_eps_equal_norm(equal, 0.0, EqualNormMode::Relative));
        CHECK(is_eps_equal_norm(equal, 0.0, EqualNormMode::Additive));
    }
    SUBCASE("one long row violates the additive check at eps") {
        const int d = 3, n = 9;
        const double target = enpf_norm(d, n);
        const double eps = 0.05;
        Eigen::MatrixXd rows(n, d);
        rng::RandomStream stream(rng::SeedPath{7, 0, 0});
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd g = stream.gaussian_vector(d);
            rows.row(i) = (target / g.norm()) * g.transpose();
        }
        CHECK(is_eps_equal_norm(Frame(rows), eps, EqualNormMode::Additive));
        Eigen::MatrixXd bad = rows;
        bad.row(0) *= (target + 2 * eps) / target;
        CHECK_FALSE(is_eps_equal_norm(Frame(bad), eps, EqualNormMode::Additive));
    }
    SUBCASE("shell samples satisfy the relative check by construction") {
        const int d = 3, n = 9;
        const double eps = 0.4;
        rng::RandomStream stream(rng::SeedPath{8, 0, 0});
        Eigen::MatrixXd shell_rows(n, d);
        for (int i = 0; i < n; ++i)
            shell_rows.row(i) = samplers::sample_shell_vector(d, n, eps, stream).transpose();
        CHECK(is_eps_equal_norm(Frame(shell_rows), eps, EqualNormMode::Relative));
    }
}

TEST_CASE("enpf_norm values and domain") {
    CHECK(enpf_norm(2, 4) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-16));
    CHECK(enpf_norm(6, 6) == 1.0);
    CHECK(enpf_norm(3, 12) == 0.5);
    CHECK_THROWS_AS(enpf_norm(1, 4), std::invalid_argument);
    CHECK_THROWS_AS(enpf_norm(4, 3), std::invalid_argument);
}

TEST_CASE("norm inequality chain: op <= fro <= sqrt(d) op") {
    rng::RandomStream stream(rng::SeedPath{99, 0, 0});
    for (int rep = 0; rep < 20; ++rep) {
        const int d = 2 + static_cast<int>(stream.next_u64() % 5);
        const int n = d + static_cast<int>(stream.next_u64() % 40);
        Frame frame(stream.gaussian_matrix(n, d) * std::sqrt(1.0 / n));
        const auto stats = deviation_stats(frame);
        CHECK(stats.op_dev <= stats.fro_dev * (1 + 1e-12));
        CHECK(stats.fro_dev <= std::sqrt(double(d)) * stats.op_dev * (1 + 1e-12));
    }
}

TEST_CASE("frame operator is permutation invariant and rotation equivariant") {
    rng::RandomStream stream(rng::SeedPath{123, 0, 0});
    const int d = 4, n = 11;
    Eigen::MatrixXd rows = stream.gaussian_matrix(n, d);
    const Eigen::MatrixXd s = frame_operator(Frame(rows)).entries();

    SUBCASE("permutation") {
        Eigen::MatrixXd shuffled(n, d);
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = (i * 7 + 3) % n;
        for (int i = 0; i < n; ++i) shuffled.row(i) = rows.row(perm[i]);
        CHECK((frame_operator(Frame(shuffled)).entries() - s).norm() < 1e-12);
    }
    SUBCASE("rotation: S(Q x_i) = Q S Q^T") {
        for (int rep = 0; rep < 5; ++rep) {
            const Eigen::MatrixXd q = testsup::random_orthogonal(d, stream);
            const Eigen::MatrixXd rotated = frame_operator(Frame(rows * q.transpose())).entries();
            CHECK((rotated - q * s * q.transpose()).norm() < 1e-10);
        }
    }
}

TEST_CASE("sphere rank-one deviations have spectrum {(d-1)/n, -1/n}") {
    const int d = 4, n = 25;
    rng::RandomStream stream(rng::SeedPath{5, 0, 0});
    const double radius = std::sqrt(double(d) / n);
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::VectorXd x = samplers::sample_sphere_vector(d, radius, stream);
        const Eigen::MatrixXd y =
            x * x.transpose() - Eigen::MatrixXd::Identity(d, d) / double(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(y, Eigen::EigenvaluesOnly);
        CHECK(eig.eigenvalues().maxCoeff() == doctest::Approx((d - 1.0) / n).epsilon(1e-10));
        for (int i = 0; i < d - 1; ++i)
            CHECK(eig.eigenvalues()[i] == doctest::Approx(-1.0 / n).epsilon(1e-10));
    }
}

TEST_CASE("text serialization round-trips exactly") {
    rng::RandomStream stream(rng::SeedPath{31337, 0, 0});
    for (int rep = 0; rep < 10; ++rep) {
        const int d = 2 + static_cast<int>(stream.next_u64() % 4);
        const int n = d + static_cast<int>(stream.next_u64() % 12);
        const Frame frame(stream.gaussian_matrix(n, d));
        std::stringstream ss;
        write_frame(ss, frame);
        const Frame back = read_frame(ss);
        REQUIRE(back.dim() == frame.dim());
        REQUIRE(back.count() == frame.count());
        CHECK(back.vectors() == frame.vectors());  // bitwise
    }
}

TEST_CASE("serialization rejects malformed input") {
    std::stringstream empty;
    CHECK_THROWS(read_frame(empty));
    std::stringstream bad_header("# nonsense\n1 2\n");
    CHECK_THROWS(read_frame(bad_header));
    std::stringstream short_body("# frame d=2 n=3\n1 0\n0 1\n");
    CHECK_THROWS(read_frame(short_body));
}

TEST_CASE("is_frame distinguishes spanning from degenerate frames") {
    CHECK(is_frame(Frame(Eigen::MatrixXd::Identity(3, 3))));
    CHECK_FALSE(is_frame(Frame(Eigen::MatrixXd::Zero(4, 3))));
    Eigen::MatrixXd rank1(4, 3);
    for (int i = 0; i < 4; ++i) rank1.row(i) = Eigen::RowVector3d(1.0, 2.0, 3.0) * (i + 1);
    CHECK_FALSE(is_frame(Frame(rank1)));
}

TEST_CASE("frame construction validates inputs") {
    CHECK_THROWS_AS(Frame(Eigen::MatrixXd::Zero(3, 1)), std::invalid_argument);
    Eigen::MatrixXd nan_mat = Eigen::MatrixXd::Zero(3, 2);
    nan_mat(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Frame{nan_mat}, std::invalid_argument);
}
