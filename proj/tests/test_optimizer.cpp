#include "doctest.h"

#include "qgpr/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace qgpr;

namespace {

ParamVector box(std::size_t dims, double lo = -2.0, double hi = 2.0, Scale s = Scale::Linear) {
    ParamVector p;
    for (std::size_t i = 0; i < dims; ++i) p.push_back({"x" + std::to_string(i), 0.0, lo, hi, s});
    return p;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_CASE("initial design size") {
    CHECK(initial_design_size(50, 2) == 8);
    CHECK(initial_design_size(50, 6) == 12);
    CHECK(initial_design_size(5, 6) == 5);
    CHECK(initial_design_size(1, 1) == 1);
}

TEST_CASE("Halton points stay in the unit cube and are distinct") {
    std::vector<double> shift{0.1, 0.7, 0.3};
    std::vector<std::vector<double>> pts;
    for (std::size_t i = 1; i <= 50; ++i) {
        auto p = halton_point(i, shift);
        REQUIRE(p.size() == 3);
        for (double v : p) CHECK((v >= 0.0 && v < 1.0));
        pts.push_back(p);
    }
    std::sort(pts.begin(), pts.end());
    CHECK(std::adjacent_find(pts.begin(), pts.end()) == pts.end());
}

TEST_CASE("unit mapping round trips on both scales") {
    const Param lin{"a", 0, -3.0, 5.0, Scale::Linear};
    const Param lg{"b", 1, 1e-3, 1e2, Scale::Log};
    for (double u : {0.0, 0.25, 0.5, 1.0}) {
        CHECK(to_unit(lin, from_unit(lin, u)) == doctest::Approx(u));
        CHECK(to_unit(lg, from_unit(lg, u)) == doctest::Approx(u));
    }
    CHECK(from_unit(lg, 0.5) == doctest::Approx(std::sqrt(1e-3 * 1e2)));
}

TEST_CASE("1D concave quadratic is located") {
    auto f = [](std::span<const double> x) { return -(x[0] - 0.37) * (x[0] - 0.37); };
    const OptResult r = maximize(f, box(1), 30, 7);
    CHECK(std::abs(r.best_point[0] - 0.37) < 1e-2);
}

TEST_CASE("bookkeeping invariants") {
    auto f = [](std::span<const double> x) { return -std::pow(x[0] - 1, 2) - std::pow(x[1] + 0.5, 2); };
    const OptResult r = maximize(f, box(2), 25, 3);
    CHECK(r.log.size() == 25);
    double mx = kFailedObjective;
    for (const auto& e : r.log) mx = std::max(mx, e.value);
    CHECK(r.best_value == mx);
    CHECK(r.seed == 3);

    SUBCASE("deterministic for a fixed seed") {
        const OptResult s = maximize(f, box(2), 25, 3);
        REQUIRE(s.log.size() == r.log.size());
        for (std::size_t i = 0; i < s.log.size(); ++i) CHECK(s.log[i].point == r.log[i].point);
    }
    SUBCASE("evaluation log exports as CSV") {
        std::ostringstream os;
        write_evaluation_log(os, r);
        const std::string s = os.str();
        CHECK(s.rfind("index,value,seconds,p0,p1\n", 0) == 0);
        CHECK(std::count(s.begin(), s.end(), '\n') == 26);
    }
}

TEST_CASE("warm start is never lost") {
    auto f = [](std::span<const double> x) { return -std::pow(x[0] - 0.5, 2) - std::pow(x[1] - 0.25, 2); };
    MaximizeOptions o;
    o.warm_start = std::vector<double>{0.5, 0.25};
    for (std::size_t budget : {1u, 2u, 10u}) {
        const OptResult r = maximize(f, box(2), budget, 9, o);
        CHECK(r.best_value >= 0.0);
        CHECK(r.log.size() == budget);
    }
}

TEST_CASE("budget 1 without warm start returns the single design point") {
    auto f = [](std::span<const double> x) { return x[0]; };
    const OptResult r = maximize(f, box(1), 1, 4);
    REQUIRE(r.log.size() == 1);
    CHECK(r.best_point == r.log[0].point);
}

TEST_CASE("failures map to the sentinel") {
    int calls = 0;
    auto f = [&](std::span<const double> x) -> double {
        ++calls;
        if (x[0] < 0) throw std::runtime_error("boom");
        if (x[0] < 0.5) return std::nan("");
        return x[0];
    };
    const OptResult r = maximize(f, box(1, -1, 1), 20, 5);
    CHECK(calls == 20);
    for (const auto& e : r.log)
        if (e.point[0] < 0.5) CHECK(e.value == kFailedObjective);
    CHECK(r.best_value >= 0.5);
}

TEST_CASE("log-scale dimensions are searched in log space") {
    auto f = [](std::span<const double> x) { return -std::pow(std::log10(x[0]) + 2.0, 2); };
    const OptResult r = maximize(f, box(1, 1e-5, 1e3, Scale::Log), 30, 1);
    CHECK(std::abs(std::log10(r.best_point[0]) + 2.0) < 0.05);
}

TEST_CASE("empty search space evaluates once") {
    int calls = 0;
    auto f = [&](std::span<const double>) { return static_cast<double>(++calls); };
    const OptResult r = maximize(f, {}, 10, 1);
    CHECK(calls == 1);
    CHECK(r.best_value == 1.0);
}

TEST_CASE("bad inputs") {
    auto f = [](std::span<const double>) { return 0.0; };
    CHECK_THROWS(maximize(f, box(1), 0, 1));
    CHECK_THROWS(maximize(f, box(1, 0.0, 1.0, Scale::Log), 5, 1));
    MaximizeOptions o;
    o.warm_start = std::vector<double>{1, 2};
    CHECK_THROWS(maximize(f, box(1), 5, 1, o));
}

TEST_CASE("larger budgets do better in median") {
    // Shifted 3D Rosenbrock-like valley.
    auto f = [](std::span<const double> x) {
        double s = 0;
        for (int i = 0; i < 2; ++i) s += 10 * std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(1 - x[i], 2);
        return -s;
    };
    std::vector<double> small, large;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        small.push_back(maximize(f, box(3), 15, seed).best_value);
        large.push_back(maximize(f, box(3), 60, seed).best_value);
    }
    CHECK(median(large) >= median(small));
}
