#include "cicdsc/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cicdsc/errors.hpp"

namespace cicdsc {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(field);
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

double parse_double(const std::string& s, std::size_t row, const char* what) {
  const char* b = s.data();
  const char* e = b + s.size();
  double v = 0.0;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw ValidationError("row " + std::to_string(row) + ": non-numeric " +
                          what + " value '" + s + "'");
  return v;
}

std::int64_t parse_period(const std::string& s, std::size_t row) {
  const char* b = s.data();
  const char* e = b + s.size();
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw ValidationError("row " + std::to_string(row) +
                          ": period must be an integer, got '" + s + "'");
  return v;
}

}  // namespace

std::vector<std::string> PanelDataset::arm_groups(Arm arm) const {
  std::vector<std::string> out;
  for (const auto& g : groups)
    if (roles.at(g) == arm) out.push_back(g);
  return out;
}

const std::vector<double>& PanelDataset::cell(const std::string& group,
                                              std::int64_t period) const {
  const auto it = cells.find({group, period});
  if (it == cells.end())
    throw ValidationError("no observations for group " + group + " in period " +
                          std::to_string(period));
  return it->second;
}

PanelDataset load_panel(std::istream& in, const LoadOptions& opts) {
  std::string header;
  if (!std::getline(in, header)) throw ValidationError("empty input");
  strip_cr(header);
  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
  const auto cols = split_line(header, delim);

  auto col_index = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return i;
    return std::nullopt;
  };
  auto required = [&](const std::string& name) -> std::size_t {
    const auto i = col_index(name);
    if (!i) throw ValidationError("missing required column '" + name + "'");
    return *i;
  };

  const std::size_t ci_unit = required(opts.schema.unit);
  const std::size_t ci_group = required(opts.schema.group);
  const std::size_t ci_period = required(opts.schema.period);
  const std::size_t ci_outcome = required(opts.schema.outcome);
  const auto ci_treated = col_index(opts.schema.treated);
  if (!ci_treated && !opts.roles)
    throw ValidationError("no treated column '" + opts.schema.treated +
                          "' and no sidecar role map supplied");

  PanelDataset p;
  std::unordered_map<std::string, std::size_t> seen;  // (unit|group|period) -> row
  std::set<std::string> group_set;
  std::set<std::int64_t> period_set;

  std::string line;
  std::size_t row = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_line(line, delim);
    if (fields.size() != cols.size())
      throw ValidationError("row " + std::to_string(row) + ": expected " +
                            std::to_string(cols.size()) + " fields, got " +
                            std::to_string(fields.size()));
    const std::string& unit = fields[ci_unit];
    const std::string& group = fields[ci_group];
    const std::int64_t period = parse_period(fields[ci_period], row);
    const double outcome = parse_double(fields[ci_outcome], row, "outcome");

    std::string key = unit;
    key += '\x1f';
    key += group;
    key += '\x1f';
    key += std::to_string(period);
    const auto [it, inserted] = seen.emplace(std::move(key), row);
    if (!inserted)
      throw ValidationError("duplicate (unit,group,period) rows " +
                            std::to_string(it->second) + " and " +
                            std::to_string(row) + " for unit '" + unit +
                            "', group '" + group + "', period " +
                            std::to_string(period));

    if (ci_treated) {
      const double d = parse_double(fields[*ci_treated], row, "treated");
      const Arm arm = d != 0.0 ? Arm::Treated : Arm::Control;
      const auto [rit, rinserted] = p.roles.emplace(group, arm);
      if (!rinserted && rit->second != arm)
        throw ValidationError("row " + std::to_string(row) + ": group '" +
                              group + "' has inconsistent treated flags");
    }
    p.cells[{group, period}].push_back(outcome);
    group_set.insert(group);
    period_set.insert(period);
  }

  if (p.cells.empty()) throw ValidationError("input has no data rows");
  p.groups.assign(group_set.begin(), group_set.end());
  p.periods.assign(period_set.begin(), period_set.end());

  if (!ci_treated) p.roles = *opts.roles;
  for (const auto& g : p.groups)
    if (!p.roles.count(g))
      throw ValidationError("group '" + g + "' has no treatment role");

  bool any_treated = false, any_control = false;
  for (const auto& g : p.groups)
    (p.roles.at(g) == Arm::Treated ? any_treated : any_control) = true;
  if (!any_treated) throw ValidationError("no treated group in panel");
  if (!any_control) throw ValidationError("no control group in panel");

  for (const auto& [key, values] : p.cells) {
    for (double v : values)
      if (!std::isfinite(v))
        throw ValidationError("invalid data: non-finite outcome in group '" +
                              key.first + "', period " +
                              std::to_string(key.second));
    if (static_cast<int>(values.size()) < opts.min_cell_size)
      throw ValidationError(
          "cell (group '" + key.first + "', period " +
          std::to_string(key.second) + ") has " +
          std::to_string(values.size()) + " observations, fewer than " +
          "min_cell_size " + std::to_string(opts.min_cell_size));
  }

  // A treated group with no pre-treatment observations cannot be matched.
  const std::int64_t first_period = p.periods.front();
  for (const auto& g : p.groups) {
    if (p.roles.at(g) != Arm::Treated) continue;
    if (!p.cells.count({g, first_period}))
      throw ValidationError("treated group '" + g +
                            "' observed only post-treatment");
  }
  return p;
}

PanelDataset load_panel_file(const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file '" + path + "'");
  return load_panel(in, opts);
}

std::map<std::string, Arm> load_roles_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open roles file '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw ValidationError("empty roles file");
  strip_cr(header);
  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
  std::map<std::string, Arm> roles;
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_line(line, delim);
    if (fields.size() < 2)
      throw ValidationError("roles file row " + std::to_string(row) +
                            ": expected group,treated");
    const double d = parse_double(fields[1], row, "treated");
    roles[fields[0]] = d != 0.0 ? Arm::Treated : Arm::Control;
  }
  return roles;
}

std::vector<std::string> CellQuantiles::arm_groups(Arm arm,
                                                   std::int64_t period) const {
  std::vector<std::string> out;
  for (const auto& [key, curve] : by_cell) {
    (void)curve;
    if (key.second == period && roles.at(key.first) == arm)
      out.push_back(key.first);
  }
  return out;
}

const QuantileCurve& CellQuantiles::cell(const std::string& group,
                                         std::int64_t period) const {
  const auto it = by_cell.find({group, period});
  if (it == by_cell.end())
    throw ValidationError("no quantile curve for group " + group +
                          " in period " + std::to_string(period));
  return it->second;
}

CellQuantiles CellQuantiles::filter_groups(
    const std::vector<std::string>& keep) const {
  const std::unordered_set<std::string> keep_set(keep.begin(), keep.end());
  CellQuantiles out;
  out.grid_u = grid_u;
  out.periods = periods;
  for (const auto& [key, curve] : by_cell)
    if (keep_set.count(key.first)) out.by_cell.emplace(key, curve);
  for (const auto& [g, arm] : roles)
    if (keep_set.count(g)) out.roles.emplace(g, arm);
  return out;
}

CellQuantiles within_group_quantiles(const PanelDataset& p,
                                     const QuantileGrid& grid) {
  CellQuantiles cq;
  cq.grid_u = grid;
  cq.roles = p.roles;
  cq.periods = p.periods;
  for (const auto& [key, values] : p.cells)
    cq.by_cell.emplace(key, curve_from_sample(Sample(values), grid));
  return cq;
}

std::vector<double> cross_group_values(const CellQuantiles& cq, Arm arm,
                                       std::int64_t period, double tau_u) {
  std::vector<double> values;
  for (const auto& [key, curve] : cq.by_cell)
    if (key.second == period && cq.roles.at(key.first) == arm)
      values.push_back(curve.eval(tau_u));
  if (values.empty())
    throw EstimationError(std::string(arm == Arm::Treated ? "treated" : "control") +
                          " arm has no groups in period " +
                          std::to_string(period));
  std::sort(values.begin(), values.end());
  return values;
}

QuantileCurve cross_group_curve(const CellQuantiles& cq, Arm arm,
                                std::int64_t period, double tau_u,
                                const QuantileGrid& grid_v) {
  return curve_from_sample(Sample(cross_group_values(cq, arm, period, tau_u)),
                           grid_v);
}

void dump_cell_quantiles(const CellQuantiles& cq, std::ostream& out) {
  out << "group,period,tau_u,value\n";
  char buf[64];
  for (const auto& [key, curve] : cq.by_cell) {
    for (std::size_t k = 0; k < curve.grid().size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g", curve.grid()[k],
                    curve.values()[k]);
      out << key.first << ',' << key.second << ',' << buf << '\n';
    }
  }
}

}  // namespace cicdsc
