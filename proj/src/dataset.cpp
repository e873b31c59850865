#include "go123/dataset.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

namespace go123 {

std::vector<std::string> Dataset::column_names() const {
  std::vector<std::string> out;
  for (const auto& c : columns) out.push_back(c.name);
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.column_names() == b.column_names() && a.rows == b.rows;
}

std::vector<char> reachable_under(const Mdp& mdp, const PermissivePolicy& policy) {
  std::vector<char> seen(mdp.num_states(), 0);
  std::deque<std::uint32_t> queue{mdp.initial};
  seen[mdp.initial] = 1;
  while (!queue.empty()) {
    auto s = queue.front();
    queue.pop_front();
    for (auto c : policy.choices[s])
      for (std::size_t b = mdp.branch_begin[c]; b < mdp.branch_begin[c + 1]; ++b) {
        auto t = mdp.targets[b];
        if (!seen[t]) {
          seen[t] = 1;
          queue.push_back(t);
        }
      }
  }
  return seen;
}

namespace {

// The closing self-loop of a deadlock is not a decision of the model.
bool is_deadlock(const Mdp& mdp, std::size_t s) {
  return mdp.choice_begin[s + 1] - mdp.choice_begin[s] == 1 && mdp.label_name(mdp.choice_begin[s]) == kSelfLoop;
}

}  // namespace

Dataset collect(const Mdp& mdp, const PermissivePolicy& policy) {
  Dataset d;
  for (const auto& v : mdp.schema) d.columns.push_back({v.name, v.is_bool, v.init});
  d.provenance.push_back(mdp.provenance);
  auto reach = reachable_under(mdp, policy);
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    if (!reach[s] || mdp.is_goal(s) || is_deadlock(mdp, s)) continue;
    auto vals = mdp.state(s);
    for (auto c : policy.choices[s]) d.rows.push_back({{vals.begin(), vals.end()}, mdp.label_name(c)});
  }
  return d;
}

Dataset merge(const std::vector<Dataset>& datasets) {
  Dataset out;
  for (const auto& d : datasets) {
    // Shared columns must keep their relative order.
    std::vector<std::size_t> positions;
    for (const auto& c : d.columns) {
      auto it = std::find_if(out.columns.begin(), out.columns.end(), [&](const Column& o) { return o.name == c.name; });
      if (it == out.columns.end()) continue;
      if (it->is_bool != c.is_bool)
        throw SchemaConflict("column '" + c.name + "' is boolean in one dataset and integer in another");
      positions.push_back(static_cast<std::size_t>(it - out.columns.begin()));
    }
    if (!std::is_sorted(positions.begin(), positions.end()))
      throw SchemaConflict("datasets order their shared columns differently");
    for (const auto& c : d.columns) {
      auto it = std::find_if(out.columns.begin(), out.columns.end(), [&](const Column& o) { return o.name == c.name; });
      if (it == out.columns.end()) {
        out.columns.push_back(c);
        for (auto& r : out.rows) r.values.push_back(c.init);
      }
    }
    std::vector<std::size_t> map(d.columns.size());
    for (std::size_t i = 0; i < d.columns.size(); ++i) {
      auto it = std::find_if(out.columns.begin(), out.columns.end(),
                             [&](const Column& o) { return o.name == d.columns[i].name; });
      map[i] = static_cast<std::size_t>(it - out.columns.begin());
    }
    for (const auto& r : d.rows) {
      Row w;
      w.label = r.label;
      w.values.resize(out.columns.size());
      for (std::size_t i = 0; i < out.columns.size(); ++i) w.values[i] = out.columns[i].init;
      for (std::size_t i = 0; i < map.size(); ++i) w.values[map[i]] = r.values[i];
      out.rows.push_back(std::move(w));
    }
    out.provenance.insert(out.provenance.end(), d.provenance.begin(), d.provenance.end());
  }
  return out;
}

std::string to_csv(const Dataset& d) {
  std::ostringstream os;
  for (const auto& c : d.columns) os << c.name << ',';
  os << "action\n";
  for (const auto& r : d.rows) {
    for (auto v : r.values) os << v << ',';
    os << r.label << '\n';
  }
  return os.str();
}

Dataset from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    if (!l.empty() && l.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(is, line)) throw MalformedCsv("missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split(line);
  if (header.empty() || header.back() != "action") throw MalformedCsv("last header column must be 'action'");
  Dataset d;
  for (std::size_t i = 0; i + 1 < header.size(); ++i) {
    if (header[i].empty()) throw MalformedCsv("empty column name");
    d.columns.push_back({header[i], false, 0});
  }
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      throw MalformedCsv("line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                         " fields, expected " + std::to_string(header.size()));
    Row r;
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(cells[i], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cells[i].size())
        throw MalformedCsv("line " + std::to_string(lineno) + ": '" + cells[i] + "' is not an integer");
      r.values.push_back(v);
    }
    r.label = cells.back();
    if (r.label.empty()) throw MalformedCsv("line " + std::to_string(lineno) + ": empty action");
    d.rows.push_back(std::move(r));
  }
  return d;
}

void export_csv(const Dataset& d, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + path + "'");
  os << to_csv(d);
  if (!os) throw IoError("write to '" + path + "' failed");
}

Dataset import_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return from_csv(ss.str());
}

}  // namespace go123
