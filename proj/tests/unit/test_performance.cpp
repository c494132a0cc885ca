#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "optexec/performance.hpp"
#include "support.hpp"

using namespace optexec;
using testing_support::Gen;
using testing_support::reference;
using testing_support::tiny;

TEST_CASE("liquidation rate examples") {
    CHECK(liquidation_rate(7500.0, 50.0, 150.0) == 1.0);
    CHECK(liquidation_rate(4950.0, 50.0, 150.0) == doctest::Approx(0.66).epsilon(1e-15));
    CHECK(liquidation_rate(0.0, 0.0, 150.0) == 1.0);
    CHECK_THROWS_AS(liquidation_rate(10.0, 5.0, 0.0), std::invalid_argument);
}

TEST_CASE("aggregate statistics") {
    const std::vector<double> same(10, 0.9);
    CHECK(aggregate(same).sd_R == 0.0);
    CHECK(aggregate(same).mean_R == doctest::Approx(0.9));

    const std::vector<double> two{0.6, 0.8};
    const auto s = aggregate(two, 3.0, true);
    CHECK(s.mean_R == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(s.sd_R == doctest::Approx(0.141421356).epsilon(1e-8));
    CHECK(s.std_error == doctest::Approx(s.sd_R / std::sqrt(2.0)));
    CHECK(s.T == 3.0);
    CHECK(s.n_paths == 2);
    CHECK(s.rates == two);

    CHECK_THROWS_AS(aggregate(std::vector<double>{0.5}), std::invalid_argument);
    CHECK_THROWS_AS(aggregate(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("property: aggregate ignores path order") {
    Gen gen(41);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> r(static_cast<std::size_t>(gen.integer(2, 200)));
        for (auto& v : r) v = gen.real(0.5, 1.0);
        const auto a = aggregate(r);
        std::reverse(r.begin(), r.end());
        std::rotate(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(r.size() / 3), r.end());
        const auto b = aggregate(r);
        CHECK(a.mean_R == doctest::Approx(b.mean_R).epsilon(1e-13));
        CHECK(a.sd_R == doctest::Approx(b.sd_R).epsilon(1e-10));
        CHECK(a.sd_R >= 0.0);
    }
}

TEST_CASE("rate equals the replayed trade log") {
    auto p = tiny(RecoveryKind::Weak, 20.0, 2.0);
    p.T = 1.0;
    const Model m(p);
    auto policy = std::make_shared<const PolicyGrid>(QviSolver(m).solve().policy);
    PathSimulator sim(m, policy);
    for (const auto& path : sim.simulate_batch(8, 25)) {
        double cash = 0.0;
        for (const auto& t : path.trades) cash += t.volume * t.price;
        CHECK(liquidation_rate(path) == liquidation_rate(cash, p.x0, p.p0));
    }
}

TEST_CASE("volatility adds spread to the liquidation rate") {
    auto p = tiny(RecoveryKind::Weak);
    p.x0 = 5.0;
    p.T = 1.0;
    FrontierOptions o;
    o.n_paths = 400;
    o.seed = 5;
    const std::vector<double> T{1.0};
    auto calm = p;
    calm.sigma = 0.0;
    const auto noisy = frontier(p, T, o);
    const auto quiet = frontier(calm, T, o);
    CHECK(quiet[0].sd_R < noisy[0].sd_R);
    CHECK(quiet[0].sd_R > 0.0);
}

TEST_CASE("single-entry frontier equals a direct batch") {
    auto p = tiny(RecoveryKind::Strong);
    FrontierOptions o;
    o.n_paths = 50;
    o.seed = 77;
    const std::vector<double> T{0.3};
    const auto rows = frontier(p, T, o);
    REQUIRE(rows.size() == 1);

    p.T = 0.3;
    const Model m(p);
    PathSimulator sim(m, std::make_shared<const PolicyGrid>(QviSolver(m).solve().policy));
    const auto direct = aggregate(sim.simulate_batch(77, 50), 0.3);
    CHECK(rows[0].mean_R == direct.mean_R);
    CHECK(rows[0].sd_R == direct.sd_R);
    CHECK(rows[0].T == 0.3);
}

TEST_CASE("frontier rows keep the requested order") {
    auto p = tiny(RecoveryKind::Weak);
    FrontierOptions o;
    o.n_paths = 10;
    const std::vector<double> T{0.2, 0.1};
    const auto rows = frontier(p, T, o);
    CHECK(rows[0].T == 0.2);
    CHECK(rows[1].T == 0.1);
}

TEST_CASE("stats file layout") {
    std::vector<PerformanceStats> rows(1);
    rows[0].T = 1.0;
    rows[0].n_paths = 2;
    rows[0].mean_R = 0.5;
    rows[0].sd_R = 0.25;
    rows[0].std_error = 0.125;
    std::ostringstream out;
    write_stats_csv(out, rows);
    CHECK(out.str() == "T,n_paths,mean_R,sd_R,std_error\n1,2,0.5,0.25,0.125\n");
}
