#include "go123/dtree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace go123 {

bool DecisionTree::operator==(const DecisionTree& o) const {
  if (columns != o.columns || nodes.size() != o.nodes.size()) return false;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const DtNode& a = nodes[i];
    const DtNode& b = o.nodes[i];
    if (a.leaf != b.leaf) return false;
    if (a.leaf) {
      if (a.label != b.label || a.support != b.support) return false;
    } else if (a.var != b.var || a.threshold != b.threshold || a.left != b.left || a.right != b.right) {
      return false;
    }
  }
  return true;
}

double gini(const std::map<std::string, std::size_t>& counts) {
  double n = 0.0;
  for (const auto& [_, c] : counts) n += static_cast<double>(c);
  if (n == 0.0) return 0.0;
  double s = 0.0;
  for (const auto& [_, c] : counts) s += (static_cast<double>(c) / n) * (static_cast<double>(c) / n);
  return 1.0 - s;
}

double entropy(const std::map<std::string, std::size_t>& counts) {
  double n = 0.0;
  for (const auto& [_, c] : counts) n += static_cast<double>(c);
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

namespace {

std::int64_t floor_mid(std::int64_t a, std::int64_t b) {
  __int128 s = static_cast<__int128>(a) + b;
  __int128 q = s / 2;
  if (s % 2 != 0 && s < 0) --q;
  return static_cast<std::int64_t>(q);
}

struct Split {
  bool found = false;
  int var = -1;
  std::int64_t threshold = 0;
  // Gini: maximize num/den.  Entropy: minimize `score`.
  unsigned __int128 num = 0;
  unsigned __int128 den = 1;
  double score = 0.0;
};

class Learner {
 public:
  Learner(const Dataset& d, Impurity imp) : data_(d), impurity_(imp) {
    std::vector<std::string> names;
    for (const auto& r : d.rows) names.push_back(r.label);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    label_names_ = names;
    label_of_.reserve(d.rows.size());
    for (const auto& r : d.rows)
      label_of_.push_back(static_cast<int>(std::lower_bound(names.begin(), names.end(), r.label) - names.begin()));
  }

  DecisionTree run() {
    DecisionTree t;
    t.columns = data_.column_names();
    struct Work {
      std::vector<std::uint32_t> rows;
      int parent;
      bool right;
    };
    std::vector<Work> stack;
    std::vector<std::uint32_t> all(data_.rows.size());
    std::iota(all.begin(), all.end(), 0u);
    stack.push_back({std::move(all), -1, false});
    while (!stack.empty()) {
      Work w = std::move(stack.back());
      stack.pop_back();
      int id = static_cast<int>(t.nodes.size());
      t.nodes.emplace_back();
      if (w.parent >= 0) {
        auto& p = t.nodes[static_cast<std::size_t>(w.parent)];
        (w.right ? p.right : p.left) = id;
      }
      Split s = pure(w.rows) ? Split{} : best_split(w.rows);
      if (!s.found) {
        make_leaf(t.nodes.back(), w.rows);
        continue;
      }
      DtNode& n = t.nodes.back();
      n.leaf = false;
      n.var = s.var;
      n.threshold = s.threshold;
      std::vector<std::uint32_t> lo, hi;
      for (auto r : w.rows)
        (data_.rows[r].values[static_cast<std::size_t>(s.var)] > s.threshold ? hi : lo).push_back(r);
      // Left subtree first so that nodes come out in pre-order.
      stack.push_back({std::move(hi), id, true});
      stack.push_back({std::move(lo), id, false});
    }
    return t;
  }

 private:
  const Dataset& data_;
  Impurity impurity_;
  std::vector<std::string> label_names_;
  std::vector<int> label_of_;

  bool pure(const std::vector<std::uint32_t>& rows) const {
    for (auto r : rows)
      if (label_of_[r] != label_of_[rows.front()]) return false;
    return true;
  }

  void make_leaf(DtNode& n, const std::vector<std::uint32_t>& rows) const {
    n.leaf = true;
    for (auto r : rows) ++n.support[label_names_[static_cast<std::size_t>(label_of_[r])]];
    std::size_t best = 0;
    for (const auto& [l, c] : n.support)  // lexicographic order: first maximum wins ties
      if (c > best) {
        best = c;
        n.label = l;
      }
  }

  double entropy_of(const std::vector<std::size_t>& counts, std::size_t n) const {
    double h = 0.0;
    for (auto c : counts)
      if (c) {
        double p = static_cast<double>(c) / static_cast<double>(n);
        h -= p * std::log2(p);
      }
    return h;
  }

  Split best_split(const std::vector<std::uint32_t>& rows) const {
    Split best;
    const std::size_t L = label_names_.size();
    const std::size_t n = rows.size();
    std::vector<std::size_t> total(L, 0);
    for (auto r : rows) ++total[static_cast<std::size_t>(label_of_[r])];
    std::vector<std::uint32_t> order = rows;
    for (std::size_t col = 0; col < data_.columns.size(); ++col) {
      auto value = [&](std::uint32_t r) { return data_.rows[r].values[col]; };
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return value(a) < value(b); });
      std::vector<std::size_t> left(L, 0), right = total;
      unsigned __int128 sum_left = 0;
      unsigned __int128 sum_right = 0;
      for (auto c : total) sum_right += static_cast<unsigned __int128>(c) * c;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        auto l = static_cast<std::size_t>(label_of_[order[i]]);
        sum_left += 2 * left[l] + 1;
        sum_right -= 2 * right[l] - 1;
        ++left[l];
        --right[l];
        std::int64_t a = value(order[i]);
        std::int64_t b = value(order[i + 1]);
        if (a == b) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        Split cand;
        cand.found = true;
        cand.var = static_cast<int>(col);
        cand.threshold = floor_mid(a, b);
        if (impurity_ == Impurity::Gini) {
          // Weighted Gini is n - (SL/nL + SR/nR) over n; maximize the bracket.
          cand.num = sum_left * nr + sum_right * nl;
          cand.den = static_cast<unsigned __int128>(nl) * nr;
          if (!best.found || cand.num * best.den > best.num * cand.den) best = cand;
        } else {
          cand.score = (static_cast<double>(nl) * entropy_of(left, nl) + static_cast<double>(nr) * entropy_of(right, nr)) /
                       static_cast<double>(n);
          if (!best.found || cand.score < best.score - 1e-12) best = cand;
        }
      }
    }
    return best;
  }
};

}  // namespace

DecisionTree learn(const Dataset& d, Impurity impurity) {
  if (d.rows.empty()) throw EmptyDataset("cannot learn a decision tree from an empty dataset");
  return Learner(d, impurity).run();
}

std::vector<int> bind_columns(const DecisionTree& t, const std::vector<std::string>& state_vars) {
  std::vector<int> out;
  for (const auto& c : t.columns) {
    auto it = std::find(state_vars.begin(), state_vars.end(), c);
    out.push_back(it == state_vars.end() ? -1 : static_cast<int>(it - state_vars.begin()));
  }
  // Only columns the tree actually tests are required.
  for (const auto& n : t.nodes)
    if (!n.leaf && out[static_cast<std::size_t>(n.var)] < 0)
      throw MissingVariable("state has no variable '" + t.columns[static_cast<std::size_t>(n.var)] +
                            "' used by the decision tree");
  return out;
}

const std::string& predict(const DecisionTree& t, std::span<const std::int64_t> state, const std::vector<int>& binding) {
  std::size_t i = 0;
  for (;;) {
    const DtNode& n = t.nodes[i];
    if (n.leaf) return n.label;
    int pos = binding[static_cast<std::size_t>(n.var)];
    if (pos < 0) throw MissingVariable("state has no variable '" + t.columns[static_cast<std::size_t>(n.var)] + "'");
    i = static_cast<std::size_t>(state[static_cast<std::size_t>(pos)] > n.threshold ? n.right : n.left);
  }
}

const std::string& predict(const DecisionTree& t, const std::map<std::string, std::int64_t>& valuation) {
  std::size_t i = 0;
  for (;;) {
    const DtNode& n = t.nodes[i];
    if (n.leaf) return n.label;
    const std::string& name = t.columns[static_cast<std::size_t>(n.var)];
    auto it = valuation.find(name);
    if (it == valuation.end()) throw MissingVariable("state has no variable '" + name + "'");
    i = static_cast<std::size_t>(it->second > n.threshold ? n.right : n.left);
  }
}

std::size_t tree_size(const DecisionTree& t) { return t.nodes.size(); }

std::size_t leaf_count(const DecisionTree& t) {
  return static_cast<std::size_t>(std::count_if(t.nodes.begin(), t.nodes.end(), [](const DtNode& n) { return n.leaf; }));
}

std::size_t tree_depth(const DecisionTree& t) {
  if (t.nodes.empty()) return 0;
  std::size_t best = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const DtNode& n = t.nodes[static_cast<std::size_t>(i)];
    if (!n.leaf) {
      stack.emplace_back(n.left, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return best;
}

namespace {

nlohmann::ordered_json node_json(const DecisionTree& t, int i) {
  const DtNode& n = t.nodes[static_cast<std::size_t>(i)];
  nlohmann::ordered_json j;
  if (n.leaf) {
    j["label"] = n.label;
    nlohmann::ordered_json s = nlohmann::ordered_json::object();
    for (const auto& [l, c] : n.support) s[l] = c;
    j["support"] = s;
    return j;
  }
  j["var"] = n.var;
  j["le_goes_left"] = true;
  j["threshold"] = n.threshold;
  j["left"] = node_json(t, n.left);
  j["right"] = node_json(t, n.right);
  return j;
}

int read_node(const nlohmann::json& j, DecisionTree& t, std::size_t depth) {
  if (!j.is_object()) throw MalformedTree("tree node is not an object");
  if (depth > 100000) throw MalformedTree("tree too deep");
  int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  if (j.contains("label")) {
    if (j.contains("left") || j.contains("right") || j.contains("var"))
      throw MalformedTree("leaf node carries inner-node fields");
    if (!j["label"].is_string() || j["label"].get<std::string>().empty()) throw MalformedTree("leaf label must be a non-empty string");
    DtNode& n = t.nodes.back();
    n.label = j["label"].get<std::string>();
    if (j.contains("support")) {
      if (!j["support"].is_object()) throw MalformedTree("leaf support must be an object");
      for (const auto& [l, c] : j["support"].items()) {
        if (!c.is_number_unsigned()) throw MalformedTree("support counts must be non-negative integers");
        n.support[l] = c.get<std::size_t>();
      }
    }
    return id;
  }
  if (!j.contains("left") || !j.contains("right"))
    throw MalformedTree("inner node must have both a left and a right child");
  if (!j.contains("var") || !j["var"].is_number_integer()) throw MalformedTree("inner node lacks an integer 'var'");
  if (!j.contains("threshold") || !j["threshold"].is_number_integer())
    throw MalformedTree("inner node lacks an integer 'threshold'");
  long long var = j["var"].get<long long>();
  if (var < 0 || static_cast<std::size_t>(var) >= t.columns.size())
    throw MalformedTree("inner node refers to column " + std::to_string(var) + " outside the column list");
  bool le_left = j.value("le_goes_left", true);
  {
    DtNode& n = t.nodes.back();
    n.leaf = false;
    n.var = static_cast<int>(var);
    n.threshold = j["threshold"].get<std::int64_t>();
  }
  int first = read_node(j[le_left ? "left" : "right"], t, depth + 1);
  int second = read_node(j[le_left ? "right" : "left"], t, depth + 1);
  t.nodes[static_cast<std::size_t>(id)].left = first;
  t.nodes[static_cast<std::size_t>(id)].right = second;
  return id;
}

}  // namespace

nlohmann::ordered_json serialize(const DecisionTree& t) {
  nlohmann::ordered_json j;
  j["columns"] = t.columns;
  j["root"] = node_json(t, 0);
  return j;
}

DecisionTree deserialize(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("columns") || !j.contains("root"))
    throw MalformedTree("tree JSON needs 'columns' and 'root'");
  if (!j["columns"].is_array()) throw MalformedTree("'columns' must be an array");
  DecisionTree t;
  for (const auto& c : j["columns"]) {
    if (!c.is_string()) throw MalformedTree("column names must be strings");
    t.columns.push_back(c.get<std::string>());
  }
  read_node(j["root"], t, 0);
  return t;
}

std::string to_dot(const DecisionTree& t) {
  std::ostringstream os;
  os << "digraph tree {\n  node [fontname=\"Helvetica\"];\n";
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const DtNode& n = t.nodes[i];
    if (n.leaf)
      os << "  n" << i << " [shape=box, label=\"" << n.label << "\"];\n";
    else
      os << "  n" << i << " [shape=ellipse, label=\"" << t.columns[static_cast<std::size_t>(n.var)] << " > "
         << n.threshold << "\"];\n";
  }
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const DtNode& n = t.nodes[i];
    if (n.leaf) continue;
    os << "  n" << i << " -> n" << n.left << " [label=\"false\", style=dashed];\n";
    os << "  n" << i << " -> n" << n.right << " [label=\"true\"];\n";
  }
  os << "}\n";
  return os.str();
}

void save_tree(const DecisionTree& t, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + path + "'");
  os << serialize(t).dump(2) << '\n';
}

DecisionTree load_tree(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedTree(std::string("invalid JSON: ") + e.what());
  }
  return deserialize(j);
}

}  // namespace go123
