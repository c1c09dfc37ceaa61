#pragma once

#include <map>
#include <string>

#include "sgrid/lp.hpp"

namespace sgrid {

// Free-format MPS export, mainly for cross-checking a model against other
// solvers. Ranged rows become L rows plus a RANGES entry; integer variables
// sit inside INTORG/INTEND markers with explicit bounds.
inline std::string to_mps(const LinearProgram& lp, const std::string& name = "LP") {
  auto clean = [](std::string s, const char* prefix, int idx) {
    if (s.empty()) s = prefix + std::to_string(idx);
    for (char& c : s)
      if (c == ' ' || c == '\t' || c == ',') c = '_';
    return s;
  };
  std::vector<std::string> vname(lp.num_vars()), rname(lp.num_rows());
  std::map<std::string, int> seen;
  for (int j = 0; j < lp.num_vars(); ++j) {
    std::string s = clean(lp.vars[j].name, "x", j);
    if (++seen[s] > 1) s += "_" + std::to_string(j);
    vname[j] = s;
  }
  for (int i = 0; i < lp.num_rows(); ++i) {
    std::string s = clean(lp.rows[i].name, "r", i);
    if (++seen[s] > 1) s += "_" + std::to_string(i);
    rname[i] = s;
  }

  std::string out;
  out += "NAME " + name + "\n";
  out += "ROWS\n";
  out += " N OBJ\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    const Row& r = lp.rows[i];
    char kind;
    if (r.lower == r.upper)
      kind = 'E';
    else if (std::isfinite(r.upper))
      kind = 'L';
    else if (std::isfinite(r.lower))
      kind = 'G';
    else
      kind = 'N';
    out += std::string(" ") + kind + " " + rname[i] + "\n";
  }

  // Column-major entry lists (duplicates merged).
  std::vector<std::map<int, double>> cols(lp.num_vars());
  for (std::size_t k = 0; k < lp.entry_row.size(); ++k)
    cols[lp.entry_var[k]][lp.entry_row[k]] += lp.entry_val[k];

  out += "COLUMNS\n";
  bool in_int = false;
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (lp.vars[j].integral != in_int) {
      in_int = lp.vars[j].integral;
      out += in_int ? "    MARKER M1 'MARKER' 'INTORG'\n"
                    : "    MARKER M2 'MARKER' 'INTEND'\n";
    }
    if (lp.vars[j].cost != 0.0)
      out += "    " + vname[j] + " OBJ " + format_double(lp.vars[j].cost) + "\n";
    for (const auto& [row, val] : cols[j])
      out += "    " + vname[j] + " " + rname[row] + " " + format_double(val) + "\n";
  }
  if (in_int) out += "    MARKER M3 'MARKER' 'INTEND'\n";

  out += "RHS\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    const Row& r = lp.rows[i];
    double rhs;
    if (r.lower == r.upper)
      rhs = r.lower;
    else if (std::isfinite(r.upper))
      rhs = r.upper;
    else if (std::isfinite(r.lower))
      rhs = r.lower;
    else
      continue;
    if (rhs != 0.0) out += "    RHS1 " + rname[i] + " " + format_double(rhs) + "\n";
  }

  out += "RANGES\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    const Row& r = lp.rows[i];
    if (r.lower == r.upper || !std::isfinite(r.lower) || !std::isfinite(r.upper))
      continue;
    out += "    RNG1 " + rname[i] + " " + format_double(r.upper - r.lower) + "\n";
  }

  out += "BOUNDS\n";
  for (int j = 0; j < lp.num_vars(); ++j) {
    const Variable& v = lp.vars[j];
    if (v.lower == v.upper) {
      out += " FX BND1 " + vname[j] + " " + format_double(v.lower) + "\n";
      continue;
    }
    if (!std::isfinite(v.lower))
      out += " MI BND1 " + vname[j] + "\n";
    else if (v.lower != 0.0 || v.integral)
      out += " LO BND1 " + vname[j] + " " + format_double(v.lower) + "\n";
    if (std::isfinite(v.upper))
      out += " UP BND1 " + vname[j] + " " + format_double(v.upper) + "\n";
  }
  out += "ENDATA\n";
  return out;
}

}  // namespace sgrid
