#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sgrid/dispatch.hpp"

namespace sgrid {

// Energy accounting for one solved dispatch. All energies in MWh, cost in $,
// ratios in percent.
struct MetricReport {
  double cost = 0.0;
  double thermal = 0.0;  // MWh from the thermal fleet alone
  double dispatched_total = 0.0;
  double absorbed_pos_lmp = 0.0;
  double absorbed_nonpos_lmp = 0.0;
  double wind_spill = 0.0;
  double import_spill = 0.0;
  double renewable_spill = 0.0;
  double stranded = 0.0;
  double rps = 0.0;
  double wind_penetration = 0.0;
  double load_shed = 0.0;
  double dc_energy = 0.0;
};

namespace detail {

inline void require_solved(const DispatchSolution& sol) {
  if (!sol.ok()) throw Error("metrics need an optimal dispatch");
}

inline double demand_energy(const Network& net) {
  double d = 0.0;
  for (const auto& load : net.loads)
    for (double v : load.demand) d += v;
  return d * net.period_hours;
}

}  // namespace detail

// Power delivered to the grid: generation plus the non-spilled share of every
// import, wind and renewable offer.
inline double total_dispatched(const DispatchSolution& sol,
                               const DispatchInputs& in) {
  detail::require_solved(sol);
  const Network& net = *in.net;
  const int T = sol.T;
  double mwh = 0.0;
  for (std::size_t g = 0; g < net.generators.size(); ++g)
    for (int t = 0; t < T; ++t) mwh += sol.generation[g * T + t];
  for (std::size_t i = 0; i < net.imports.size(); ++i)
    for (int t = 0; t < T; ++t)
      mwh += net.imports[i].supply[t] - sol.import_spill[i * T + t];
  for (std::size_t w = 0; w < net.wind_farms.size(); ++w)
    for (int t = 0; t < T; ++t) mwh += in.wind[w][t] - sol.wind_spill[w * T + t];
  for (std::size_t r = 0; r < net.renewables.size(); ++r)
    for (int t = 0; t < T; ++t)
      mwh += net.renewables[r].supply[t] - sol.renewable_spill[r * T + t];
  return mwh * net.period_hours;
}

// Splits the dispatched energy by the strict sign of the price at the bus
// where each unit injects. first = at positive prices, second = at prices
// less than or equal to zero.
inline std::pair<double, double> split_by_lmp(const DispatchSolution& sol,
                                              const DispatchInputs& in) {
  detail::require_solved(sol);
  const Network& net = *in.net;
  const int T = sol.T;
  if (sol.lmp.size() != net.buses.size() * static_cast<std::size_t>(T))
    throw Error("dispatch solution lacks prices");
  double pos = 0.0, nonpos = 0.0;
  auto add = [&](const std::string& bus, int t, double mw) {
    int n = net.bus_index(bus);
    (sol.lmp[n * T + t] > 0.0 ? pos : nonpos) += mw;
  };
  for (std::size_t g = 0; g < net.generators.size(); ++g)
    for (int t = 0; t < T; ++t)
      add(net.generators[g].bus, t, sol.generation[g * T + t]);
  for (std::size_t i = 0; i < net.imports.size(); ++i)
    for (int t = 0; t < T; ++t)
      add(net.imports[i].bus, t,
          net.imports[i].supply[t] - sol.import_spill[i * T + t]);
  for (std::size_t w = 0; w < net.wind_farms.size(); ++w)
    for (int t = 0; t < T; ++t)
      add(net.wind_farms[w].bus, t, in.wind[w][t] - sol.wind_spill[w * T + t]);
  for (std::size_t r = 0; r < net.renewables.size(); ++r)
    for (int t = 0; t < T; ++t)
      add(net.renewables[r].bus, t,
          net.renewables[r].supply[t] - sol.renewable_spill[r * T + t]);
  const double h = net.period_hours;
  return {pos * h, nonpos * h};
}

// Energy without economic value: everything absorbed at nonpositive prices
// plus everything spilled.
inline double stranded_power(const DispatchSolution& sol, const DispatchInputs& in) {
  auto [pos, nonpos] = split_by_lmp(sol, in);
  (void)pos;
  const Network& net = *in.net;
  const int T = sol.T;
  double spill = 0.0;
  for (double v : sol.import_spill) spill += v;
  for (double v : sol.wind_spill) spill += v;
  for (double v : sol.renewable_spill) spill += v;
  (void)T;
  return nonpos + spill * net.period_hours;
}

// Renewable share of the original demand, in percent. Shedding does not
// change the denominator.
inline double rps(const DispatchSolution& sol, const DispatchInputs& in) {
  detail::require_solved(sol);
  const Network& net = *in.net;
  const int T = sol.T;
  double demand = detail::demand_energy(net);
  if (!(demand > 0.0)) throw Error("network has no demand energy");
  double absorbed = 0.0;
  for (std::size_t w = 0; w < net.wind_farms.size(); ++w)
    for (int t = 0; t < T; ++t)
      absorbed += in.wind[w][t] - sol.wind_spill[w * T + t];
  for (std::size_t r = 0; r < net.renewables.size(); ++r)
    for (int t = 0; t < T; ++t)
      absorbed += net.renewables[r].supply[t] - sol.renewable_spill[r * T + t];
  return 100.0 * absorbed * net.period_hours / demand;
}

// Offered wind relative to demand, in percent. farm_limit restricts the sum
// to the first farms, for runs that append synthetic collocated farms.
inline double wind_penetration(const DispatchInputs& in, int farm_limit = -1) {
  const Network& net = *in.net;
  double demand = detail::demand_energy(net);
  if (!(demand > 0.0)) throw Error("network has no demand energy");
  int F = farm_limit < 0 ? static_cast<int>(in.wind.size())
                         : std::min<int>(farm_limit, in.wind.size());
  double offered = 0.0;
  for (int f = 0; f < F; ++f)
    for (double v : in.wind[f]) offered += v;
  return 100.0 * offered * net.period_hours / demand;
}

inline MetricReport compute_metrics(const DispatchSolution& sol,
                                    const DispatchInputs& in, int farm_limit = -1) {
  detail::require_solved(sol);
  const Network& net = *in.net;
  const double h = net.period_hours;
  MetricReport m;
  m.cost = sol.objective;
  for (double v : sol.generation) m.thermal += v * h;
  m.dispatched_total = total_dispatched(sol, in);
  std::tie(m.absorbed_pos_lmp, m.absorbed_nonpos_lmp) = split_by_lmp(sol, in);
  for (double v : sol.wind_spill) m.wind_spill += v * h;
  for (double v : sol.import_spill) m.import_spill += v * h;
  for (double v : sol.renewable_spill) m.renewable_spill += v * h;
  m.stranded = m.absorbed_nonpos_lmp + m.wind_spill + m.import_spill +
               m.renewable_spill;
  m.rps = rps(sol, in);
  m.wind_penetration = wind_penetration(in, farm_limit);
  for (double v : sol.shed) m.load_shed += v * h;
  for (double v : sol.dc_served) m.dc_energy += v * h;
  return m;
}

// How much of the sited data-center fleet gets powered, per period and
// scenario. The count form follows strict positivity of the served power; the
// energy form compares served energy against the fleet's full draw.
struct AchievedCapacity {
  std::vector<std::vector<double>> count_fraction;  // [scenario][period]
  std::vector<double> mean_profile;                 // [period], weighted
  double count_mean = 0.0;
  double energy_mean = 0.0;
};

inline AchievedCapacity achieved_capacity(
    const std::vector<DispatchSolution>& sols, const std::vector<double>& probs,
    int total_units, double unit_capacity_mw) {
  if (total_units <= 0) throw Error("achieved capacity needs a positive unit count");
  if (sols.empty()) throw Error("achieved capacity needs at least one solution");
  if (probs.size() != sols.size())
    throw Error("probability count does not match the solutions");
  const int T = sols[0].T;
  const double served_eps = 1e-6;
  AchievedCapacity ac;
  ac.count_fraction.resize(sols.size());
  ac.mean_profile.assign(T, 0.0);
  double wsum = 0.0;
  for (std::size_t s = 0; s < sols.size(); ++s) {
    detail::require_solved(sols[s]);
    if (sols[s].T != T) throw Error("solutions span different horizons");
    const int nb = static_cast<int>(sols[s].dc_served.size()) / T;
    ac.count_fraction[s].assign(T, 0.0);
    double energy = 0.0;
    for (int t = 0; t < T; ++t) {
      int served = 0;
      for (int n = 0; n < nb; ++n) {
        double u = sols[s].dc_served[n * T + t];
        if (u > served_eps) ++served;
        energy += u;
      }
      double frac = static_cast<double>(served) / total_units;
      ac.count_fraction[s][t] = frac;
      ac.mean_profile[t] += probs[s] * frac;
      ac.count_mean += probs[s] * frac / T;
    }
    ac.energy_mean += probs[s] * energy / (total_units * unit_capacity_mw * T);
    wsum += probs[s];
  }
  if (!(wsum > 0.0)) throw Error("probabilities sum to zero");
  for (double& v : ac.mean_profile) v /= wsum;
  ac.count_mean /= wsum;
  ac.energy_mean /= wsum;
  return ac;
}

struct EnsembleStats {
  MetricReport mean;  // probability-weighted field means
  double cost_stddev = 0.0;
};

inline EnsembleStats ensemble_stats(const std::vector<MetricReport>& reports,
                                    const std::vector<double>& probs) {
  if (reports.empty()) throw Error("ensemble needs at least one report");
  if (probs.size() != reports.size())
    throw Error("probability count does not match the reports");
  double wsum = 0.0;
  for (double p : probs) wsum += p;
  if (!(wsum > 0.0)) throw Error("probabilities sum to zero");

  EnsembleStats st;
  auto fields = [](MetricReport& m) {
    return std::vector<double*>{
        &m.cost,        &m.thermal,      &m.dispatched_total,
        &m.absorbed_pos_lmp, &m.absorbed_nonpos_lmp, &m.wind_spill,
        &m.import_spill, &m.renewable_spill, &m.stranded,
        &m.rps,         &m.wind_penetration, &m.load_shed,
        &m.dc_energy};
  };
  auto dst = fields(st.mean);
  for (std::size_t s = 0; s < reports.size(); ++s) {
    MetricReport r = reports[s];
    auto src = fields(r);
    for (std::size_t k = 0; k < dst.size(); ++k)
      *dst[k] += probs[s] / wsum * *src[k];
  }
  double var = 0.0;
  for (std::size_t s = 0; s < reports.size(); ++s) {
    double d = reports[s].cost - st.mean.cost;
    var += probs[s] / wsum * d * d;
  }
  st.cost_stddev = std::sqrt(std::max(var, 0.0));
  return st;
}

inline std::vector<std::string> metric_csv_fields() {
  return {"cost",        "thermal",      "dispatched_total",
          "absorbed_pos_lmp", "absorbed_nonpos_lmp", "wind_spill",
          "import_spill", "renewable_spill", "stranded",
          "rps",         "wind_penetration", "load_shed",
          "dc_energy"};
}

inline std::vector<std::string> metric_csv_values(const MetricReport& m) {
  return {format_double(m.cost),
          format_double(m.thermal),
          format_double(m.dispatched_total),
          format_double(m.absorbed_pos_lmp),
          format_double(m.absorbed_nonpos_lmp),
          format_double(m.wind_spill),
          format_double(m.import_spill),
          format_double(m.renewable_spill),
          format_double(m.stranded),
          format_double(m.rps),
          format_double(m.wind_penetration),
          format_double(m.load_shed),
          format_double(m.dc_energy)};
}

}  // namespace sgrid
