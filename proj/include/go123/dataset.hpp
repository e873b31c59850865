#pragma once

// Learning data harvested from solved base instances: one row per
// (reachable non-goal state, optimal action label). Deadlocks contribute
// nothing.

#include <cstdint>
#include <string>
#include <vector>

#include "go123/mdp.hpp"
#include "go123/solve.hpp"

namespace go123 {

struct Column {
  std::string name;
  bool is_bool = false;
  std::int64_t init = 0;  // imputed for rows of instances lacking the column
};

struct Row {
  std::vector<std::int64_t> values;
  std::string label;
  bool operator==(const Row&) const = default;
};

struct Dataset {
  std::vector<Column> columns;
  std::vector<Row> rows;
  std::vector<ParamValuation> provenance;

  std::vector<std::string> column_names() const;
  bool empty() const { return rows.empty(); }
};

// Rows and column names only.
bool operator==(const Dataset& a, const Dataset& b);

// States reachable from the initial state when every permitted action is
// taken with positive probability.
std::vector<char> reachable_under(const Mdp& mdp, const PermissivePolicy& policy);

Dataset collect(const Mdp& mdp, const PermissivePolicy& policy);
Dataset merge(const std::vector<Dataset>& datasets);

void export_csv(const Dataset& d, const std::string& path);
Dataset import_csv(const std::string& path);
std::string to_csv(const Dataset& d);
Dataset from_csv(const std::string& text);

}  // namespace go123
