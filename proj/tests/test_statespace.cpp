#include <catch2/catch_amalgamated.hpp>

#include "cmex/model.hpp"
#include "cmex/statespace.hpp"

using namespace cmex;

TEST_CASE("index map reproduces the small isomer and schlogl layouts") {
  const StateSpace isomer({2, 2});
  CHECK(isomer.size() == 9);
  CHECK(isomer.index_of(State{0, 0}) == 1);
  CHECK(isomer.index_of(State{0, 1}) == 4);
  CHECK(isomer.state_of(2) == State{1, 0});
  CHECK(isomer.state_of(1) == State{0, 0});
  CHECK(isomer.state_of(9) == State{2, 2});

  const StateSpace schlogl({5});
  CHECK(schlogl.size() == 6);
  CHECK(schlogl.index_of(State{3}) == 4);
}

TEST_CASE("bounds checks") {
  const StateSpace space({80, 80});
  CHECK(space.in_bounds(State{80, 80}));
  CHECK_FALSE(space.in_bounds(State{81, 0}));
  CHECK_FALSE(StateSpace({900}).in_bounds(State{-1}));
  CHECK_FALSE(space.in_bounds(State{1}));  // dimension mismatch
  CHECK_THROWS_AS(space.index_of(State{81, 0}), std::out_of_range);
  CHECK_THROWS_AS(space.state_of(0), std::out_of_range);
  CHECK_THROWS_AS(space.state_of(space.size() + 1), std::out_of_range);
}

TEST_CASE("index/state bijection, exhaustive on mixed-radix boxes") {
  for (const auto& caps : {std::vector<int>{2, 2}, {5}, {3, 0, 7}, {9, 9, 9, 9}}) {
    const StateSpace space(caps);
    REQUIRE(space.size() <= 10000);
    for (std::int64_t idx = 1; idx <= space.size(); ++idx) {
      const State x = space.state_of(idx);
      REQUIRE(space.in_bounds(x));
      REQUIRE(space.index_of(x) == idx);
    }
  }
}

TEST_CASE("strides multiply out to the size") {
  const StateSpace space({4, 7, 2});
  CHECK(space.strides() == std::vector<std::int64_t>{1, 5, 40});
  CHECK(space.size() == 5 * 8 * 3);
}

TEST_CASE("reaction offsets") {
  const BuiltinSystem small = builtin_isomer();
  CHECK(reaction_offsets(StateSpace({2, 2}),
                         ReactionModel(small.model.species_names(), {2, 2}, small.model.stoich(),
                                       small.model.propensity_specs()))
            .d == std::vector<std::int64_t>{2, -2});
  const BuiltinSystem schlogl = builtin_schlogl();
  CHECK(reaction_offsets(StateSpace({900}), schlogl.model).d ==
        std::vector<std::int64_t>{1, -1, 1, -1});
  CHECK_THROWS_AS(reaction_offsets(StateSpace({2, 2, 2}), schlogl.model), std::invalid_argument);
}

TEST_CASE("offset identity holds for every in-box pair, exhaustive") {
  const ReactionModel model({"A", "B"}, {4, 3},
                            {{-1, 1}, {1, -1}, {2, -3}},
                            {PropensitySpec{1.0, {{0, 1}}}, PropensitySpec{1.0, {{1, 1}}},
                             PropensitySpec{1.0, {{1, 3}}}});
  const StateSpace space({4, 3});
  const ReactionOffset offs = reaction_offsets(space, model);
  for (std::int64_t idx = 1; idx <= space.size(); ++idx) {
    const State x = space.state_of(idx);
    for (int r = 0; r < model.num_reactions(); ++r) {
      State prev = x;
      for (int i = 0; i < space.dims(); ++i) prev[static_cast<std::size_t>(i)] -= model.stoich_column(r)[static_cast<std::size_t>(i)];
      if (!space.in_bounds(prev)) continue;
      REQUIRE(space.index_of(x) - space.index_of(prev) == offs.d[static_cast<std::size_t>(r)]);
    }
  }
}

TEST_CASE("zero state-change vectors cannot reach the offset computation") {
  // the model constructor rejects them, so d_r = 0 never materializes
  CHECK_THROWS_AS(ReactionModel({"A", "B"}, {4, 4}, {{0, 0}},
                                {PropensitySpec{1.0, {}}}),
                  std::invalid_argument);
}
