#include "doctest.h"

#include "qgpr/circuit_search.hpp"
#include "qgpr/data.hpp"

#include <set>
#include <sstream>

using namespace qgpr;

namespace {

struct Fixture {
    Dataset d = synth_pes(3, 48, 17);
    Vector y = Standardizer::fit(d.y).apply(d.y);
    GPOptions gp{0.03, 1e-10, 1e-4};
};

BeamCandidate make(std::vector<Matching> layers, ParamVector theta) {
    BeamCandidate c;
    c.layers = std::move(layers);
    c.theta = std::move(theta);
    return c;
}

}  // namespace

TEST_CASE("layer pool sizes follow the involution recurrence") {
    CHECK(involution_count(0) == 1);
    CHECK(involution_count(1) == 1);
    const std::uint64_t expected[] = {1, 3, 9, 25, 75, 231};
    for (int m = 2; m <= 7; ++m) {
        const auto pool = layer_pool(m);
        CHECK(pool.size() == involution_count(m) - 1);
        CHECK(pool.size() == expected[m - 2]);
        std::set<Matching> uniq(pool.begin(), pool.end());
        CHECK(uniq.size() == pool.size());
        for (const auto& match : pool) {
            std::set<int> used;
            for (auto [i, j] : match) {
                CHECK(i < j);
                CHECK(used.insert(i).second);
                CHECK(used.insert(j).second);
            }
        }
    }
    CHECK(layer_pool(3) == std::vector<Matching>{{{0, 1}}, {{0, 2}}, {{1, 2}}});
    CHECK_THROWS(layer_pool(1));
}

TEST_CASE("extension counts") {
    const auto pool = layer_pool(3);
    const auto th = quantum::default_theta(3);
    BeamState one;
    one.candidates.push_back(make({{{0, 1}}}, th));
    const auto kids = extend(one, pool);
    CHECK(kids.size() == 3);
    CHECK(kids[0].key() == "[(0,1)][(0,1)]");  // repeats are legal
    for (const auto& k : kids) CHECK(k.theta.values() == th.values());

    BeamState two;
    two.candidates.push_back(make({{{0, 1}}}, th));
    two.candidates.push_back(make({{{0, 1}}}, th));
    CHECK(extend(two, pool).size() == 3);  // duplicates removed
    two.candidates[1].layers = {{{1, 2}}};
    CHECK(extend(two, pool).size() == 6);
}

TEST_CASE("screening") {
    Fixture f;
    CircuitSearchConfig cfg;
    cfg.gp = f.gp;
    const auto th = quantum::default_theta(3);

    SUBCASE("identical candidates collapse to one") {
        std::vector<BeamCandidate> c(4, make({{{0, 1}}}, th));
        CHECK(screen(c, f.d.X, f.y, cfg).candidates.size() == 1);
    }
    SUBCASE("width larger than the pool keeps everything, sorted") {
        cfg.beam_width = 10;
        std::vector<BeamCandidate> c;
        for (const auto& l : layer_pool(3)) c.push_back(make({l}, th));
        const auto s = screen(c, f.d.X, f.y, cfg);
        REQUIRE(s.candidates.size() == 3);
        for (std::size_t i = 1; i < 3; ++i) {
            CHECK(s.candidates[i - 1].score.beta >= s.candidates[i].score.beta);
            // equal M and N: beta order is logO order
            CHECK(s.candidates[i - 1].score.logO >= s.candidates[i].score.logO);
        }
    }
    SUBCASE("width clamps") {
        cfg.beam_width = 2;
        std::vector<BeamCandidate> c;
        for (const auto& l : layer_pool(3)) c.push_back(make({l}, th));
        CHECK(screen(c, f.d.X, f.y, cfg).candidates.size() == 2);
    }
}

TEST_CASE("refinement") {
    Fixture f;
    const auto th = quantum::default_theta(3);
    const std::vector<Matching> layers{{{0, 2}}};

    SUBCASE("zero budget leaves the score unchanged") {
        const auto s = score_circuit(layers, th, f.d.X, f.y, f.gp);
        const auto r = refine_candidate(layers, th, f.d.X, f.y, 0, 1, f.gp);
        CHECK(r.score.beta == s.beta);
        CHECK(r.theta.values() == th.values());
    }
    SUBCASE("refined score never falls below the screened score") {
        CircuitSearchConfig cfg;
        cfg.gp = f.gp;
        cfg.refine_budget = 8;
        cfg.beam_width = 3;
        std::vector<BeamCandidate> c;
        for (const auto& l : layer_pool(3)) c.push_back(make({l}, th));
        const auto screened = screen(c, f.d.X, f.y, cfg);
        const auto refined = refine(screened, f.d.X, f.y, cfg);
        for (const auto& s : screened.candidates)
            for (const auto& r : refined.candidates)
                if (r.key() == s.key()) {
                    CHECK(r.score.logO >= s.score.logO);
                    CHECK(r.score.logL >= s.score.logL);
                    CHECK(r.refined);
                }
        for (std::size_t i = 1; i < refined.candidates.size(); ++i)
            CHECK(!beam_less(refined.candidates[i], refined.candidates[i - 1]));
    }
    SUBCASE("a mis-scaled start improves") {
        const ParamVector bad = th.with_values(std::vector<double>{100.0, 100.0, 100.0, 1e-3});
        const auto before = score_circuit(layers, bad, f.d.X, f.y, f.gp);
        // default refine budget; far fewer evaluations leave logL below the point where logO saturates
        const auto after = refine_candidate(layers, bad, f.d.X, f.y, 40, 2, f.gp);
        CHECK(after.score.logL > before.logL);
        CHECK(after.score.logO > before.logO);
        CHECK(after.score.beta > before.beta);
    }
}

TEST_CASE("beam search end to end") {
    Fixture f;
    CircuitSearchConfig cfg;
    cfg.gp = f.gp;
    cfg.refine_budget = 8;
    cfg.final_budget = 10;
    cfg.max_depth = 3;
    cfg.eps_beta = -1.0;  // run to the cap
    cfg.seed = 5;
    int calls = 0;
    cfg.holdout_rmse = [&](const quantum::QuantumKernelSpec&) { return static_cast<double>(++calls); };
    const auto r = search_circuit(f.d.X, f.y, cfg);
    REQUIRE(r.trace.size() == 4);
    CHECK(r.trace.front().layers.empty());
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].best_beta >= r.trace[i - 1].best_beta);
    CHECK(r.score.beta >= r.trace.front().best_beta);
    CHECK(r.score.M == 4);
    CHECK(calls == 4);
    CHECK_NOTHROW(r.winner.circuit.validate());
    CHECK(r.winner.entangling.size() <= 3);

    cfg.holdout_rmse = nullptr;
    cfg.threads = 3;
    const auto again = search_circuit(f.d.X, f.y, cfg);
    CHECK(again.score.beta == r.score.beta);
    CHECK(quantum::canonical_layers(again.winner.entangling) == quantum::canonical_layers(r.winner.entangling));
    CHECK(again.winner.theta.values() == r.winner.theta.values());

    std::ostringstream os;
    write_circuit_trace_csv(os, r.trace);
    CHECK(os.str().rfind("iteration,best_beta,best_logO,layers,rmse_holdout\n", 0) == 0);

    cfg.beam_width = 0;
    CHECK_THROWS(search_circuit(f.d.X, f.y, cfg));
}

TEST_CASE("failed factorization scores minus infinity") {
    Fixture f;
    GPOptions strict{0.0, 0.0, 0.0};
    // 48 duplicated rows give an exactly singular Gram matrix
    PointMatrix X(48, 3);
    for (int i = 0; i < 48; ++i) X.row(i) = f.d.X.row(0);
    const auto s = score_circuit({}, quantum::default_theta(3), X, f.y, strict);
    CHECK(std::isinf(s.beta));
    CHECK(s.beta < 0);
}
