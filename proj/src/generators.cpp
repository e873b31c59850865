#include "go123/generators.hpp"

#include <sstream>

namespace go123 {

std::string philosophers_model(std::int64_t n) {
  if (n < 2) throw ConfigError("philosophers need N >= 2");
  // p: 0 think, 1 wants left first, 2 wants right first, 3 holds left,
  // 4 holds right, 5 eats (holds both).
  std::ostringstream os;
  os << "// Dining philosophers, N = " << n << ".\n";
  os << "mdp\n\n";
  for (std::int64_t i = 1; i <= n; ++i) {
    std::int64_t l = i == 1 ? n : i - 1;
    std::int64_t r = i == n ? 1 : i + 1;
    std::string p = "p" + std::to_string(i);
    std::string left_taken = "(p" + std::to_string(l) + "=4 | p" + std::to_string(l) + "=5)";
    std::string right_taken = "(p" + std::to_string(r) + "=3 | p" + std::to_string(r) + "=5)";
    std::string left_free = "!" + left_taken;
    std::string right_free = "!" + right_taken;
    std::string lab = "phil_" + std::to_string(i) + "_line_";
    os << "module phil" << i << "\n";
    os << "  " << p << " : [0..5] init 0;\n\n";
    os << "  [" << lab << "1] " << p << "=0 -> 0.5:(" << p << "'=1) + 0.5:(" << p << "'=2);\n";
    os << "  [" << lab << "2] " << p << "=1 & " << left_free << " -> (" << p << "'=3);\n";
    os << "  [" << lab << "3] " << p << "=2 & " << right_free << " -> (" << p << "'=4);\n";
    os << "  [" << lab << "4] " << p << "=3 & " << right_free << " -> (" << p << "'=5);\n";
    os << "  [" << lab << "5] " << p << "=4 & " << left_free << " -> (" << p << "'=5);\n";
    os << "  [" << lab << "6] " << p << "=3 & " << right_taken << " -> (" << p << "'=0);\n";
    os << "  [" << lab << "7] " << p << "=4 & " << left_taken << " -> (" << p << "'=0);\n";
    os << "endmodule\n\n";
  }
  os << "label \"goal\" = ";
  for (std::int64_t i = 1; i <= n; ++i) os << (i > 1 ? " | " : "") << "p" << i << "=5";
  os << ";\nproperty Pmax reach \"goal\";\n";
  return os.str();
}

std::string builtin_model(const std::string& name, const ParamValuation& v) {
  if (name == "philosophers") {
    auto it = v.find("N");
    if (it == v.end() || !std::holds_alternative<std::int64_t>(it->second))
      throw ConfigError("generator 'philosophers' needs an integer parameter N");
    if (v.size() != 1) throw ConfigError("generator 'philosophers' takes only the parameter N");
    return philosophers_model(std::get<std::int64_t>(it->second));
  }
  throw ConfigError("unknown builtin generator '" + name + "'");
}

}  // namespace go123
