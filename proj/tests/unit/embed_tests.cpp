#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "conmap/contagion.hpp"
#include "conmap/embed.hpp"
#include "conmap/graph.hpp"

using namespace conmap;

namespace {

Matrix fixture_6x3() {
    Matrix x(6, 3);
    const double rows[6][3] = {{2.0, -1.0, 0.5},  {1.5, 3.0, -0.5}, {-2.0, 0.5, 1.0},
                               {0.0, 2.5, -1.5},  {3.0, -0.5, 2.0}, {-1.0, 1.0, 0.0}};
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t c = 0; c < 3; ++c) x.at(i, c) = rows[i][c];
    return x;
}

}  // namespace

TEST_CASE("pca validates input") {
    Matrix one(1, 3);
    REQUIRE_THROWS_AS(pca_project(one, 1), std::invalid_argument);
    Matrix x(4, 2);
    REQUIRE_THROWS_AS(pca_project(x, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(pca_project(x, 3), std::invalid_argument);
    x.at(2, 1) = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(pca_project(x, 1), std::invalid_argument);
}

TEST_CASE("pca matches an eigendecomposition reference") {
    // reference values from an independent dense eigensolver on the centered
    // covariance (n-1 divisor), components sorted by descending eigenvalue,
    // sign fixed so each component's largest-magnitude entry is positive
    const Projection proj = pca_project(fixture_6x3(), 3);
    const double want_ev[3] = {4.7103298349268456, 2.5566297194683529, 0.39137377893813485};
    const double want_pts[6][3] = {
        {2.1988268850415067, -0.23449667500759303, -0.92370297963392967},
        {-0.84450301399527794, 2.1721451246484431, 0.55826138356010502},
        {-1.2858530831282744, -2.3598996159486809, 0.43264058232786756},
        {-2.0415836181423757, 1.2152082486762699, -0.51471104972018888},
        {3.248806978373258, 0.17347659388056141, 0.56998360579146001},
        {-1.2756941481488375, -0.96643367624900056, -0.12247154232531376},
    };
    REQUIRE(proj.explained.size() == 3);
    REQUIRE(proj.points.rows == 6);
    REQUIRE(proj.points.cols == 3);
    for (std::size_t c = 0; c < 3; ++c)
        REQUIRE(proj.explained[c] == Catch::Approx(want_ev[c]).margin(1e-9));
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t c = 0; c < 3; ++c)
            REQUIRE(proj.points.at(i, c) == Catch::Approx(want_pts[i][c]).margin(1e-8));
}

TEST_CASE("pca satisfies its spectral identities") {
    const Projection proj = pca_project(fixture_6x3(), 3);
    // columns are centered, mutually orthogonal, with variance = eigenvalue
    for (std::size_t c = 0; c < 3; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 6; ++i) mean += proj.points.at(i, c);
        REQUIRE(std::abs(mean / 6.0) < 1e-10);
        double var = 0.0;
        for (std::size_t i = 0; i < 6; ++i) var += proj.points.at(i, c) * proj.points.at(i, c);
        REQUIRE(var / 5.0 == Catch::Approx(proj.explained[c]).margin(1e-9));
    }
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = a + 1; b < 3; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < 6; ++i)
                dot += proj.points.at(i, a) * proj.points.at(i, b);
            REQUIRE(std::abs(dot) < 1e-8);
        }
    REQUIRE(proj.explained[0] >= proj.explained[1]);
    REQUIRE(proj.explained[1] >= proj.explained[2]);
}

TEST_CASE("pca on rank-deficient and constant data") {
    Matrix line(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
        line.at(i, 0) = static_cast<double>(i);
        line.at(i, 1) = 2.0 * static_cast<double>(i);
    }
    const Projection proj = pca_project(line, 2);
    REQUIRE(proj.explained[0] > 0.0);
    REQUIRE(proj.explained[1] == Catch::Approx(0.0).margin(1e-12));
    for (std::size_t i = 0; i < 5; ++i)
        REQUIRE(std::abs(proj.points.at(i, 1)) < 1e-6);

    Matrix constant(4, 3, 2.5);
    const Projection zero = pca_project(constant, 2);
    for (const auto ev : zero.explained) REQUIRE(ev == 0.0);
    for (const auto v : zero.points.data) REQUIRE(v == 0.0);
}

TEST_CASE("pca is deterministic") {
    const Projection a = pca_project(fixture_6x3(), 2);
    const Projection b = pca_project(fixture_6x3(), 2);
    REQUIRE(a.points.data == b.points.data);
    REQUIRE(a.explained == b.explained);
}

TEST_CASE("map rows convert to a double matrix") {
    const Network net = noisy_ring_lattice(30, 4, 2, 14);
    const ContagionMap cm = contagion_map(net, 0.3, MapMode::truncated(5));
    const Matrix m = to_matrix(cm);
    REQUIRE(m.rows == 30);
    REQUIRE(m.cols == 30);
    for (std::int32_t i = 0; i < 30; ++i)
        for (std::int32_t j = 0; j < 30; ++j)
            REQUIRE(m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) ==
                    static_cast<double>(cm.sym(i, j)));
}

TEST_CASE("cell group separation compares median distances") {
    Matrix rows(4, 1);
    rows.at(0, 0) = 0.0;
    rows.at(1, 0) = 1.0;
    rows.at(2, 0) = 10.0;
    rows.at(3, 0) = 11.0;
    const std::vector<std::string> labels = {"a", "a", "b", "b"};
    // intra pool {1, 1} -> median 1; inter pool {10, 11, 9, 10} -> median 10
    REQUIRE(cell_group_separation(rows, labels) == Catch::Approx(10.0).margin(1e-12));

    Matrix rows5(5, 1);
    rows5.at(0, 0) = 0.0;
    rows5.at(1, 0) = 1.0;
    rows5.at(2, 0) = 2.0;
    rows5.at(3, 0) = 10.0;
    rows5.at(4, 0) = 11.0;
    const std::vector<std::string> labels5 = {"a", "a", "a", "b", "b"};
    // intra {1, 2, 1, 1} -> median 1; inter {10,11,9,10,8,9} -> median 9.5
    REQUIRE(cell_group_separation(rows5, labels5) == Catch::Approx(9.5).margin(1e-12));
}

TEST_CASE("cell group separation validates and distinguishes degenerate pools") {
    Matrix rows(4, 1);
    rows.at(1, 0) = 1.0;
    rows.at(2, 0) = 2.0;
    rows.at(3, 0) = 3.0;
    REQUIRE_THROWS_AS(cell_group_separation(rows, {"a", "a", "b"}), std::invalid_argument);
    REQUIRE_THROWS_AS(cell_group_separation(rows, {"a", "a", "a", "a"}), std::invalid_argument);
    REQUIRE_THROWS_AS(cell_group_separation(rows, {"a", "b", "b", "b"}), std::invalid_argument);

    Matrix dup(4, 1);
    dup.at(2, 0) = 5.0;
    dup.at(3, 0) = 5.0;
    // identical points within each class: intra median 0 is a degenerate
    // geometry, not a usage error
    REQUIRE_THROWS_AS(cell_group_separation(dup, {"a", "a", "b", "b"}), std::domain_error);
}

TEST_CASE("heuristic truncation rounds n/10 with a floor of one") {
    REQUIRE(heuristic_truncation(100) == 10);
    REQUIRE(heuristic_truncation(149) == 15);
    REQUIRE(heuristic_truncation(150) == 15);
    REQUIRE(heuristic_truncation(4) == 1);
    REQUIRE(heuristic_truncation(1000) == 100);
    REQUIRE(heuristic_truncation(225) == 23);
    REQUIRE_THROWS_AS(heuristic_truncation(0), std::invalid_argument);
}
