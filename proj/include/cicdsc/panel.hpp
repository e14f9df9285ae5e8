#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cicdsc/quantile.hpp"

// Panel ingestion and the aggregation step: within-group quantile curves per
// (group, period) cell, and cross-group quantile curves over groups.

namespace cicdsc {

enum class Arm { Treated, Control };

using CellKey = std::pair<std::string, std::int64_t>;  // (group, period)

struct PanelDataset {
  // Outcomes per cell, in input row order.
  std::map<CellKey, std::vector<double>> cells;
  std::map<std::string, Arm> roles;
  std::vector<std::string> groups;        // sorted distinct group ids
  std::vector<std::int64_t> periods;      // sorted distinct periods

  std::vector<std::string> arm_groups(Arm arm) const;
  const std::vector<double>& cell(const std::string& group,
                                  std::int64_t period) const;
};

struct PanelSchema {
  std::string unit = "unit";
  std::string group = "group";
  std::string period = "period";
  std::string outcome = "outcome";
  std::string treated = "treated";  // optional 0/1 column
};

struct LoadOptions {
  PanelSchema schema;
  int min_cell_size = 30;
  // Sidecar role map (group -> treated flag); used when the treated column
  // is absent from the main file.
  std::optional<std::map<std::string, Arm>> roles;
};

// Parses delimited text (comma default, tab accepted) with a header row and
// validates the result. Duplicate (unit, group, period) rows, missing
// columns, non-numeric outcomes and undersized cells are ValidationErrors.
PanelDataset load_panel(std::istream& in, const LoadOptions& opts);
PanelDataset load_panel_file(const std::string& path, const LoadOptions& opts);

// Parses a two-column sidecar file: group, treated (0/1).
std::map<std::string, Arm> load_roles_file(const std::string& path);

// Within-group quantile curves on a shared tau_U grid.
struct CellQuantiles {
  QuantileGrid grid_u;
  std::map<CellKey, QuantileCurve> by_cell;
  std::map<std::string, Arm> roles;
  std::vector<std::int64_t> periods;

  std::vector<std::string> arm_groups(Arm arm, std::int64_t period) const;
  const QuantileCurve& cell(const std::string& group, std::int64_t period) const;
  // Copy restricted to the given groups (roles kept for those groups).
  CellQuantiles filter_groups(const std::vector<std::string>& keep) const;
};

CellQuantiles within_group_quantiles(const PanelDataset& p,
                                     const QuantileGrid& grid);

// Per-group within-group quantiles at tau_u for one arm and period, sorted.
std::vector<double> cross_group_values(const CellQuantiles& cq, Arm arm,
                                       std::int64_t period, double tau_u);

// The tau_V |-> Q_{Y_{k,period}(tau_u)}(tau_V) curve over groups in the arm.
QuantileCurve cross_group_curve(const CellQuantiles& cq, Arm arm,
                                std::int64_t period, double tau_u,
                                const QuantileGrid& grid_v);

// Long-format dump of the aggregation: group, period, tau_u, value.
void dump_cell_quantiles(const CellQuantiles& cq, std::ostream& out);

}  // namespace cicdsc
