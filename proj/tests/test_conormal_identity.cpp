#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "maslov/liouville.hpp"

using namespace maslov;

TEST_CASE("graph charts annihilate the canonical one-form", "[conormal-identity]") {
    // N* of the parabola {(q, q^2)} in T*R^2: P = -dQ0^T p is the unique
    // fibre component on which the restricted one-form vanishes.
    ConormalChart parab = conormal_graph_chart(
        2, 1, [](const Vec& q) { return Vec::Constant(1, q(0) * q(0)); },
        [](const Vec& q) { return Mat::Constant(1, 1, 2.0 * q(0)); });
    const auto rep = verify_conormal_identity(parab, 200);
    CHECK(rep.max_residual <= 1e-9);
    CHECK(rep.samples == 200);

    // surface {(q1, q2, q1 q2)} in R^3
    ConormalChart surf = conormal_graph_chart(
        3, 2, [](const Vec& q) { return Vec::Constant(1, q(0) * q(1)); },
        [](const Vec& q) {
            Mat d(1, 2);
            d << q(1), q(0);
            return d;
        });
    CHECK(verify_conormal_identity(surf, 200).max_residual <= 1e-9);
}

TEST_CASE("trigonometric graph chart", "[conormal-identity]") {
    ConormalChart chart = conormal_graph_chart(
        2, 1, [](const Vec& q) { return Vec::Constant(1, std::sin(q(0))); },
        [](const Vec& q) { return Mat::Constant(1, 1, std::cos(q(0))); });
    CHECK(verify_conormal_identity(chart, 100).max_residual <= 1e-9);
}

TEST_CASE("charts violating the conormal condition are detected", "[conormal-identity]") {
    // the sign of P flipped: the one-form restricts to 2 p dQ
    ConormalChart chart;
    chart.n = 2;
    chart.k = 1;
    chart.Q = [](const Vec& q, const Vec&) { return Vec::Constant(1, std::sin(q(0))); };
    chart.P = [](const Vec& q, const Vec& p) {
        return Vec::Constant(1, std::cos(q(0)) * p(0));
    };
    chart.dQ_dq = [](const Vec& q, const Vec&) {
        return Mat::Constant(1, 1, std::cos(q(0)));
    };
    CHECK(verify_conormal_identity(chart, 100).max_residual >= 0.1);

    // a chart that forgot the fibre term entirely
    ConormalChart flat = conormal_graph_chart(
        2, 1, [](const Vec& q) { return Vec::Constant(1, q(0)); },
        [](const Vec&) { return Mat::Constant(1, 1, 1.0); });
    flat.P = [](const Vec&, const Vec&) { return Vec::Zero(1); };
    CHECK(verify_conormal_identity(flat, 100).max_residual >= 0.1);
}

TEST_CASE("finite differences replace missing derivatives", "[conormal-identity]") {
    ConormalChart chart = conormal_graph_chart(
        2, 1, [](const Vec& q) { return Vec::Constant(1, std::sin(q(0))); },
        [](const Vec& q) { return Mat::Constant(1, 1, std::cos(q(0))); });
    chart.dQ_dq = nullptr;
    CHECK(verify_conormal_identity(chart, 100).max_residual <= 1e-7);
}
