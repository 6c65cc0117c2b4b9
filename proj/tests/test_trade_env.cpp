#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qtrade/errors.hpp"
#include "qtrade/trade_env.hpp"

using namespace qtrade;

namespace {
StatePanel make_panel(const std::vector<double>& targets) {
    StatePanel panel;
    panel.state_dim = 3;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        panel.dates.push_back("d" + std::to_string(i));
        panel.source_index.push_back(i);
        panel.target_returns.push_back(targets[i]);
        panel.states.push_back(double(i));
        panel.states.push_back(double(i) + 0.5);
        panel.states.push_back(double(i) + 0.25);
    }
    return panel;
}
} // namespace

TEST_CASE("rewards are position times next-day return minus switching costs") {
    const StatePanel panel = make_panel({0.02, -0.01, 0.03, 0.005});
    TradingEnv env(panel, CostModel{0.001, 0.0005});
    env.reset(0);

    // flat -> long: turnover 1, fixed charged
    const StepResult s1 = env.step(1);
    CHECK(s1.info.gross == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(s1.info.cost == doctest::Approx(0.001 + 0.0005).epsilon(1e-15));
    CHECK(s1.reward == doctest::Approx(0.02 - 0.0015).epsilon(1e-15));
    CHECK(s1.info.position == 1);
    CHECK_FALSE(s1.done);

    // long -> long: no turnover, no cost
    const StepResult s2 = env.step(1);
    CHECK(s2.info.gross == doctest::Approx(-0.01).epsilon(1e-15));
    CHECK(s2.info.cost == 0.0);
    CHECK(s2.reward == doctest::Approx(-0.01).epsilon(1e-15));

    // long -> short: turnover 2, fixed charged once
    const StepResult s3 = env.step(-1);
    CHECK(s3.info.gross == doctest::Approx(-0.03).epsilon(1e-15));
    CHECK(s3.info.cost == doctest::Approx(0.002 + 0.0005).epsilon(1e-15));
    CHECK(s3.reward == doctest::Approx(-0.0325).epsilon(1e-15));
    CHECK(s3.done); // four rows give exactly three steps
}

TEST_CASE("a flat policy never pays costs or earns returns") {
    const StatePanel panel = make_panel({0.05, -0.04, 0.01});
    TradingEnv env(panel, CostModel{0.01, 0.01});
    env.reset(0);
    while (true) {
        const StepResult s = env.step(0);
        CHECK(s.reward == 0.0);
        CHECK(s.info.cost == 0.0);
        if (s.done) break;
    }
}

TEST_CASE("fixed cost applies only when the position changes") {
    const StatePanel panel = make_panel({0.0, 0.0, 0.0, 0.0});
    TradingEnv env(panel, CostModel{0.0, 0.002});
    env.reset(0);
    CHECK(env.step(1).info.cost == 0.002);  // 0 -> 1
    CHECK(env.step(1).info.cost == 0.0);    // hold
    CHECK(env.step(0).info.cost == 0.002);  // 1 -> 0
}

TEST_CASE("short positions earn the negated return") {
    const StatePanel panel = make_panel({-0.03, 0.02, 0.0});
    TradingEnv env(panel, CostModel{0.0, 0.0});
    env.reset(0);
    CHECK(env.step(-1).reward == doctest::Approx(0.03).epsilon(1e-15));
    CHECK(env.step(-1).reward == doctest::Approx(-0.02).epsilon(1e-15));
}

TEST_CASE("next_state walks the panel rows in order") {
    const StatePanel panel = make_panel({0.01, 0.02, 0.03, 0.04});
    TradingEnv env(panel, CostModel{0.0, 0.0});
    const auto s0 = env.reset(0);
    CHECK(s0.data() == panel.state(0).data());
    CHECK(env.row() == 0);
    const StepResult r1 = env.step(0);
    CHECK(r1.next_state.data() == panel.state(1).data());
    CHECK(env.row() == 1);
    const StepResult r2 = env.step(0);
    CHECK(r2.next_state.data() == panel.state(2).data());
    const StepResult r3 = env.step(0);
    // terminal step still reports the final row's state
    CHECK(r3.next_state.data() == panel.state(3).data());
    CHECK(r3.done);
    CHECK(env.done());
}

TEST_CASE("episodes can start mid-panel") {
    const StatePanel panel = make_panel({0.01, 0.02, 0.03, 0.04});
    TradingEnv env(panel, CostModel{0.0, 0.0});
    env.reset(2); // one step left
    const StepResult s = env.step(1);
    CHECK(s.reward == doctest::Approx(0.03).epsilon(1e-15));
    CHECK(s.done);
}

TEST_CASE("reset restores a flat position and clears the trace") {
    const StatePanel panel = make_panel({0.01, 0.02, 0.03});
    TradingEnv env(panel, CostModel{0.001, 0.0});
    env.set_tracing(true);
    env.reset(0);
    env.step(-1);
    CHECK(env.position() == -1);
    CHECK(env.trace().size() == 1);
    env.reset(0);
    CHECK(env.position() == 0);
    CHECK(env.trace().empty());
    // first trade after reset pays the full flat->long turnover again
    CHECK(env.step(1).info.cost == doctest::Approx(0.001).epsilon(1e-15));
}

TEST_CASE("invalid transitions are rejected") {
    const StatePanel panel = make_panel({0.01, 0.02});
    TradingEnv env(panel, CostModel{0.0, 0.0});
    CHECK_THROWS_AS(env.step(0), ContractError); // before reset
    env.reset(0);
    CHECK_THROWS_AS(env.step(2), std::domain_error);
    CHECK_THROWS_AS(env.step(-2), std::domain_error);
    env.step(0);
    CHECK(env.done());
    CHECK_THROWS_AS(env.step(0), ContractError); // after done

    CHECK_THROWS_AS(env.reset(1), std::out_of_range); // last row has no successor
    CHECK_THROWS_AS(env.reset(5), std::out_of_range);
    const StatePanel tiny = make_panel({0.01});
    TradingEnv env1(tiny, CostModel{0.0, 0.0});
    CHECK_THROWS_AS(env1.reset(0), std::out_of_range);
}

TEST_CASE("cost model validation rejects negative costs") {
    const StatePanel panel = make_panel({0.01, 0.02});
    CHECK_THROWS_AS(TradingEnv(panel, CostModel{-0.001, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(TradingEnv(panel, CostModel{0.0, -1.0}), std::invalid_argument);
}

TEST_CASE("tracing records date, action and reward components") {
    const StatePanel panel = make_panel({0.02, -0.01, 0.0});
    TradingEnv env(panel, CostModel{0.001, 0.0});
    env.set_tracing(true);
    env.reset(0);
    env.step(1);
    env.step(-1);
    const auto& tr = env.trace();
    REQUIRE(tr.size() == 2);
    CHECK(tr[0].date == "d0");
    CHECK(tr[0].action == 1);
    CHECK(tr[0].gross == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(tr[0].cost == doctest::Approx(0.001).epsilon(1e-15));
    CHECK(tr[0].net == doctest::Approx(0.019).epsilon(1e-15));
    CHECK(tr[1].date == "d1");
    CHECK(tr[1].action == -1);
    CHECK(tr[1].cost == doctest::Approx(0.002).epsilon(1e-15));
    CHECK(tr[1].net == doctest::Approx(0.01 - 0.002).epsilon(1e-15));
}

TEST_CASE("episode return compounds step rewards") {
    const std::vector<double> rewards{0.10, -0.05};
    CHECK(episode_return(rewards) == doctest::Approx(1.10 * 0.95 - 1.0).epsilon(1e-15));
    CHECK(episode_return(std::vector<double>{}) == 0.0);
    const std::vector<double> one{0.07};
    CHECK(episode_return(one) == doctest::Approx(0.07).epsilon(1e-15));
}

TEST_CASE("a full episode from row zero takes rows-minus-one steps") {
    for (std::size_t rows : {2u, 3u, 7u, 25u}) {
        std::vector<double> targets(rows, 0.001);
        const StatePanel panel = make_panel(targets);
        TradingEnv env(panel, CostModel{0.0, 0.0});
        env.reset(0);
        std::size_t steps = 0;
        while (!env.done()) {
            env.step(0);
            ++steps;
        }
        CHECK(steps == rows - 1);
    }
}
