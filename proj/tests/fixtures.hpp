#pragma once

#include "sgrid/network.hpp"
#include "sgrid/scenario.hpp"

namespace fixtures {

inline sgrid::Network onebus(double pmax = 100.0) {
  sgrid::Network net;
  net.horizon = 1;
  net.buses = {{"b1"}};
  net.generators = {{"g1", "b1", 10.0, pmax, 100.0, 100.0, 0.0}};
  net.loads = {{"d1", "b1", {50.0}, 1000.0}};
  return net;
}

// Remote wind behind a tight export line; generation and demand sit across it.
inline sgrid::Network twobus(double line_cap = 40.0) {
  sgrid::Network net;
  net.horizon = 1;
  net.buses = {{"b1"}, {"b2"}};
  net.lines = {{"ln", "b1", "b2", 8.0, line_cap}};
  net.generators = {{"g2", "b2", 10.0, 100.0, 100.0, 100.0, 0.0}};
  net.loads = {{"d2", "b2", {50.0}, 1000.0}};
  net.wind_farms = {{"w1", "b1", 100.0, std::vector<double>{100.0}}};
  return net;
}

// Wind at the end of a weak feeder, thermal generation and load behind it.
// High-wind scenarios strand energy at b1, so siting capacity there pays off.
inline sgrid::Network threebus() {
  sgrid::Network net;
  net.horizon = 2;
  net.buses = {{"b1"}, {"b2"}, {"b3"}};
  net.lines = {{"l12", "b1", "b2", 8.0, 30.0}, {"l23", "b2", "b3", 8.0, 80.0}};
  net.generators = {{"g2", "b2", 10.0, 200.0, 200.0, 200.0, 0.0}};
  net.loads = {{"d3", "b3", {60.0, 60.0}, 1000.0}};
  net.wind_farms = {{"w1", "b1", 100.0, {}}};
  return net;
}

inline sgrid::ScenarioSet threebus_set() {
  sgrid::ScenarioSet set;
  set.horizon = 2;
  set.farm_ids = {"w1"};
  set.scenarios = {{"s1", 0.5, {{10.0, 15.0}}},
                   {"s2", 0.3, {{40.0, 60.0}}},
                   {"s3", 0.2, {{80.0, 100.0}}}};
  return set;
}

}  // namespace fixtures
