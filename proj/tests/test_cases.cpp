#include <catch2/catch_amalgamated.hpp>

#include "sgrid/cases.hpp"
#include "fixtures.hpp"

using namespace sgrid;

namespace {

template <typename Fn>
void expect_error(Fn&& fn, const std::string& needle) {
  try {
    fn();
    FAIL("expected an error mentioning '" << needle << "'");
  } catch (const Error& e) {
    if (std::string(e.what()).find(needle) == std::string::npos)
      FAIL("error '" << e.what() << "' does not mention '" << needle << "'");
  }
}

CaseSpec dc_spec(int case_id, std::vector<std::string> buses, double size) {
  CaseSpec spec;
  spec.case_id = case_id;
  spec.dc_buses = std::move(buses);
  spec.dc_size = size;
  return spec;
}

}  // namespace

TEST_CASE("case 1 leaves the network untouched") {
  Network net = fixtures::threebus();
  CaseSpec spec;
  CaseSetup setup = apply_case(net, spec);
  CHECK(emit_network(setup.net).dump() == emit_network(net).dump());
  CHECK(setup.base_farm_count == 1);
  CHECK(setup.added_ids.empty());
  CHECK_FALSE(setup.placement.has_value());
}

TEST_CASE("case spec validation") {
  Network net = fixtures::threebus();
  auto check = [&](CaseSpec spec, const std::string& needle) {
    expect_error([&] { validate_case_spec(spec, net); }, needle);
  };
  CaseSpec bad;
  bad.case_id = 0;
  check(bad, "case must be");
  bad.case_id = 5;
  check(bad, "case must be");

  CaseSpec neg = dc_spec(2, {"b3"}, 10.0);
  neg.dc_count = -1;
  check(neg, "dc_count");
  neg = dc_spec(2, {"b3"}, -5.0);
  check(neg, "dc_size");
  neg = dc_spec(2, {"b3"}, 10.0);
  neg.dc_shed_cost = -1.0;
  check(neg, "dc_shed_cost");
  neg = dc_spec(3, {"b3"}, 10.0);
  neg.capacity_factor = 0.0;
  check(neg, "capacity_factor");
  neg.capacity_factor = 1.5;
  check(neg, "capacity_factor");

  check(dc_spec(2, {}, 10.0), "dc_buses");
  CaseSpec mismatch = dc_spec(2, {"b3"}, 10.0);
  mismatch.dc_count = 2;
  check(mismatch, "disagrees");
  check(dc_spec(3, {"zz"}, 10.0), "not in the network");

  CaseSpec c4 = dc_spec(4, {"zz"}, 10.0);
  c4.dc_count = 1;
  check(c4, "not in the network");

  CaseSpec ok = dc_spec(2, {"b3", "b1"}, 10.0);
  ok.dc_count = 2;
  REQUIRE_NOTHROW(validate_case_spec(ok, net));
}

TEST_CASE("case 2 adds fixed loads at the chosen buses") {
  Network net = fixtures::threebus();
  CaseSpec spec = dc_spec(2, {"b3", "b1"}, 25.0);
  spec.dc_shed_cost = 777.0;
  CaseSetup setup = apply_case(net, spec);

  REQUIRE(setup.net.loads.size() == net.loads.size() + 2);
  const FixedLoad& dc1 = setup.net.loads[net.loads.size()];
  const FixedLoad& dc2 = setup.net.loads[net.loads.size() + 1];
  CHECK(dc1.id == "dc1");
  CHECK(dc1.bus == "b3");
  CHECK(dc1.demand == std::vector<double>{25.0, 25.0});
  CHECK(dc1.shed_cost == 777.0);
  CHECK(dc2.id == "dc2");
  CHECK(dc2.bus == "b1");
  CHECK(setup.net.loads[0].id == net.loads[0].id);
  CHECK(setup.added_ids.empty());
  CHECK_FALSE(setup.placement.has_value());
}

TEST_CASE("case 3 clones the nearest farm scaled to cover the load") {
  Network net = fixtures::threebus();
  ScenarioSet set = fixtures::threebus_set();
  // mean of w1 over the set: .5*12.5 + .3*50 + .2*90 = 39.25 MW
  CaseSpec spec = dc_spec(3, {"b3"}, 78.5);
  CaseSetup setup = apply_case(net, spec, &set);

  REQUIRE(setup.net.loads.size() == 2);
  CHECK(setup.net.loads[1].id == "dc1");
  REQUIRE(setup.net.wind_farms.size() == 2);
  const WindFarm& coll = setup.net.wind_farms[1];
  CHECK(coll.id == "wdc1");
  CHECK(coll.bus == "b3");
  CHECK(coll.spill_cost == net.wind_farms[0].spill_cost);
  CHECK(setup.base_farm_count == 1);

  REQUIRE(setup.added_ids == std::vector<std::string>{"wdc1"});
  REQUIRE(setup.added_output.size() == 1);
  REQUIRE(setup.added_output[0].size() == 3);
  CHECK(setup.added_output[0][0] == std::vector<double>{20.0, 30.0});
  CHECK(setup.added_output[0][1] == std::vector<double>{80.0, 120.0});
  CHECK(setup.added_output[0][2] == std::vector<double>{160.0, 200.0});
}

TEST_CASE("collocated farms keep their size when the base set is rescaled") {
  Network net = fixtures::threebus();
  ScenarioSet set = fixtures::threebus_set();
  CaseSpec spec = dc_spec(3, {"b3"}, 78.5);
  CaseSetup setup = apply_case(net, spec, &set);

  ScenarioSet zeroed = scale_to_penetration(set, net, 0.0);
  ScenarioSet joined = apply_added_farms(zeroed, setup);
  REQUIRE(joined.farm_ids == std::vector<std::string>{"w1", "wdc1"});
  for (const auto& sc : joined.scenarios) {
    CHECK(sc.output[0] == std::vector<double>{0.0, 0.0});
    CHECK(sc.output[1][0] > 0.0);
  }
  REQUIRE_NOTHROW(require_normalized(joined));

  ScenarioSet boosted = scale_to_penetration(set, net, 0.4);
  ScenarioSet joined2 = apply_added_farms(boosted, setup);
  CHECK(joined2.scenarios[0].output[1] == joined.scenarios[0].output[1]);
}

TEST_CASE("case 3 error paths") {
  Network net = fixtures::threebus();
  ScenarioSet set = fixtures::threebus_set();
  CaseSpec spec = dc_spec(3, {"b3"}, 78.5);

  expect_error([&] { apply_case(net, spec); }, "scenario set");

  Network bare = net;
  bare.wind_farms.clear();
  ScenarioSet empty_set = set;
  empty_set.farm_ids.clear();
  for (auto& sc : empty_set.scenarios) sc.output.clear();
  expect_error([&] { apply_case(bare, spec, &empty_set); }, "existing wind farm");

  ScenarioSet mismatched = set;
  mismatched.farm_ids.push_back("ghost");
  expect_error([&] { apply_case(net, spec, &mismatched); }, "does not match");

  ScenarioSet flat = set;
  for (auto& sc : flat.scenarios)
    for (auto& tr : sc.output) std::fill(tr.begin(), tr.end(), 0.0);
  expect_error([&] { apply_case(net, spec, &flat); }, "zero mean");
}

TEST_CASE("case 4 turns the spec into a placement config") {
  Network net = fixtures::threebus();
  CaseSpec spec;
  spec.case_id = 4;
  spec.dc_count = 3;
  spec.dc_size = 40.0;
  spec.tolerance = 1e-7;
  spec.multi_cut = true;
  spec.max_iterations = 77;
  spec.node_budget = 1234;
  CaseSetup setup = apply_case(net, spec);

  CHECK(emit_network(setup.net).dump() == emit_network(net).dump());
  REQUIRE(setup.placement.has_value());
  const PlacementConfig& cfg = *setup.placement;
  CHECK(cfg.max_units == 3);
  CHECK(cfg.unit_capacity_mw == 40.0);
  CHECK(cfg.candidate_buses.empty());
  CHECK(cfg.tolerance == 1e-7);
  CHECK(cfg.multi_cut);
  CHECK(cfg.max_iterations == 77);
  CHECK(cfg.node_budget == 1234);

  spec.dc_buses = {"b2"};
  CaseSetup restricted = apply_case(net, spec);
  CHECK(restricted.placement->candidate_buses == std::vector<int>{1});
}

TEST_CASE("nearest farm search walks line hops") {
  Network net = fixtures::threebus();
  CHECK(nearest_wind_farm(net, net.bus_index("b1")) == 0);
  CHECK(nearest_wind_farm(net, net.bus_index("b3")) == 0);

  WindFarm local;
  local.id = "w2";
  local.bus = "b3";
  local.spill_cost = 50.0;
  Network two = net;
  two.wind_farms.push_back(local);
  CHECK(nearest_wind_farm(two, two.bus_index("b3")) == 1);
  CHECK(nearest_wind_farm(two, two.bus_index("b2")) == 0);

  Network bare = net;
  bare.wind_farms.clear();
  CHECK(nearest_wind_farm(bare, 0) == -1);
  REQUIRE_THROWS_AS(nearest_wind_farm(net, 7), Error);
}

TEST_CASE("joining collocated trajectories checks shapes") {
  Network net = fixtures::threebus();
  ScenarioSet set = fixtures::threebus_set();
  CaseSpec spec = dc_spec(3, {"b3"}, 78.5);
  CaseSetup setup = apply_case(net, spec, &set);

  ScenarioSet fewer = set;
  fewer.scenarios.pop_back();
  expect_error([&] { apply_added_farms(fewer, setup); }, "do not match");

  CaseSetup broken = setup;
  broken.added_output[0][1].pop_back();
  expect_error([&] { apply_added_farms(set, broken); }, "horizon");
}
