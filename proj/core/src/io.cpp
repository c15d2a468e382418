#include "conlab/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace conlab {

namespace {

struct Line {
  int number;
  std::vector<std::string> keys; // whitespace-split tokens left of '='
  std::string value;             // trimmed text right of '='
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream is(text);
  std::string raw;
  int number = 0;
  while (std::getline(is, raw)) {
    ++number;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string s = trim(raw);
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw IoError("line " + std::to_string(number) + ": missing '='", number);
    Line line;
    line.number = number;
    std::istringstream lhs(s.substr(0, eq));
    std::string tok;
    while (lhs >> tok) line.keys.push_back(tok);
    line.value = trim(s.substr(eq + 1));
    if (line.keys.empty()) throw IoError("line " + std::to_string(number) + ": missing key", number);
    if (line.value.empty())
      throw IoError("line " + std::to_string(number) + ": missing value", number);
    out.push_back(std::move(line));
  }
  return out;
}

int parse_int(const Line& l, const std::string& tok) {
  int v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw IoError("line " + std::to_string(l.number) + ": bad index '" + tok + "'", l.number);
  return v;
}

double parse_real(const Line& l, const std::string& tok) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw IoError("line " + std::to_string(l.number) + ": bad number '" + tok + "'", l.number);
  return v;
}

Expr parse_expr_at(const Line& l) {
  try {
    return parse(l.value);
  } catch (const ParseError& e) {
    throw IoError("line " + std::to_string(l.number) + ": " + e.what(), l.number);
  }
}

} // namespace

MetricChart parse_metric(const std::string& text) {
  auto lines = split_lines(text);
  int dim = -1;
  std::map<int, std::string> coords;
  std::map<int, Interval> domains;
  std::map<std::string, double> constants;
  std::map<std::pair<int, int>, std::pair<std::string, Expr>> entries;

  for (const auto& l : lines) {
    const std::string& k = l.keys[0];
    if (k == "dim" && l.keys.size() == 1) {
      dim = parse_int(l, l.value);
      if (dim < 1) throw IoError("line " + std::to_string(l.number) + ": dim must be >= 1", l.number);
    } else if (k == "coord" && l.keys.size() == 2) {
      coords[parse_int(l, l.keys[1])] = l.value;
    } else if (k == "domain" && l.keys.size() == 2) {
      std::istringstream vs(l.value);
      double lo, hi;
      if (!(vs >> lo >> hi))
        throw IoError("line " + std::to_string(l.number) + ": domain needs two reals", l.number);
      domains[parse_int(l, l.keys[1])] = {lo, hi};
    } else if (k == "const" && l.keys.size() == 2) {
      constants[l.keys[1]] = parse_real(l, l.value);
    } else if (k == "g" && l.keys.size() == 3) {
      int i = parse_int(l, l.keys[1]), j = parse_int(l, l.keys[2]);
      auto key = std::minmax(i, j);
      auto it = entries.find({key.first, key.second});
      if (it != entries.end()) {
        if (it->second.first != l.value)
          throw IoError("line " + std::to_string(l.number) + ": g " + std::to_string(i) + " " +
                            std::to_string(j) + " conflicts with its transpose entry",
                        l.number);
        continue;
      }
      entries[{key.first, key.second}] = {l.value, parse_expr_at(l)};
    } else {
      throw IoError("line " + std::to_string(l.number) + ": unknown directive '" + k + "'",
                    l.number);
    }
  }

  if (dim < 1) throw IoError("metric file is missing 'dim'");
  std::vector<std::string> coord_names(dim);
  std::vector<Interval> box(dim);
  for (int i = 0; i < dim; ++i) {
    auto c = coords.find(i);
    if (c == coords.end()) throw IoError("metric file is missing 'coord " + std::to_string(i) + "'");
    coord_names[i] = c->second;
    auto d = domains.find(i);
    if (d == domains.end())
      throw IoError("metric file is missing 'domain " + std::to_string(i) + "'");
    box[i] = d->second;
  }
  std::vector<std::vector<Expr>> g(dim, std::vector<Expr>(dim));
  for (const auto& [key, val] : entries) {
    if (key.first >= dim || key.second >= dim)
      throw IoError("metric entry g " + std::to_string(key.first) + " " +
                    std::to_string(key.second) + " is out of range");
    g[key.first][key.second] = val.second;
  }
  return MetricChart(std::move(coord_names), std::move(box), std::move(g), std::move(constants));
}

std::string metric_to_text(const MetricChart& chart) {
  std::ostringstream os;
  os << "dim = " << chart.dim() << "\n";
  for (int i = 0; i < chart.dim(); ++i) os << "coord " << i << " = " << chart.coords()[i] << "\n";
  for (int i = 0; i < chart.dim(); ++i)
    os << "domain " << i << " = " << format_double(chart.domain()[i].lo) << " "
       << format_double(chart.domain()[i].hi) << "\n";
  for (const auto& [k, v] : chart.constants()) os << "const " << k << " = " << format_double(v) << "\n";
  for (int i = 0; i < chart.dim(); ++i)
    for (int j = i; j < chart.dim(); ++j) {
      const Expr& e = chart.g(i, j);
      if (e->kind == ExprKind::Number && e->number == 0.0) continue;
      os << "g " << i << " " << j << " = " << to_string(e) << "\n";
    }
  return os.str();
}

namespace {

std::vector<Expr> indexed_to_vector(const std::map<int, Expr>& m, const std::string& what) {
  if (m.empty()) throw IoError("field file has no '" + what + "' entries");
  int max = m.rbegin()->first;
  std::vector<Expr> out(max + 1);
  for (int i = 0; i <= max; ++i) {
    auto it = m.find(i);
    if (it == m.end())
      throw IoError("field file is missing '" + what + " " + std::to_string(i) + "'");
    out[i] = it->second;
  }
  return out;
}

} // namespace

FieldFile parse_field(const std::string& text) {
  auto lines = split_lines(text);
  std::string kind;
  std::map<int, Expr> phi, lambda, w;
  std::map<std::pair<int, int>, std::pair<std::string, Expr>> a;
  Expr rho, mu;
  std::optional<double> K;

  for (const auto& l : lines) {
    const std::string& k = l.keys[0];
    if (k == "kind" && l.keys.size() == 1) {
      kind = l.value;
    } else if (k == "phi" && l.keys.size() == 2) {
      phi[parse_int(l, l.keys[1])] = parse_expr_at(l);
    } else if (k == "lambda" && l.keys.size() == 2) {
      lambda[parse_int(l, l.keys[1])] = parse_expr_at(l);
    } else if (k == "w" && l.keys.size() == 2) {
      w[parse_int(l, l.keys[1])] = parse_expr_at(l);
    } else if (k == "rho" && l.keys.size() == 1) {
      rho = parse_expr_at(l);
    } else if (k == "mu" && l.keys.size() == 1) {
      mu = parse_expr_at(l);
    } else if (k == "K" && l.keys.size() == 1) {
      K = parse_real(l, l.value);
    } else if (k == "a" && l.keys.size() == 3) {
      int i = parse_int(l, l.keys[1]), j = parse_int(l, l.keys[2]);
      auto key = std::minmax(i, j);
      auto it = a.find({key.first, key.second});
      if (it != a.end()) {
        if (it->second.first != l.value)
          throw IoError("line " + std::to_string(l.number) + ": a " + std::to_string(i) + " " +
                            std::to_string(j) + " conflicts with its transpose entry",
                        l.number);
        continue;
      }
      a[{key.first, key.second}] = {l.value, parse_expr_at(l)};
    } else {
      throw IoError("line " + std::to_string(l.number) + ": unknown directive '" + k + "'",
                    l.number);
    }
  }

  auto build_bilinear = [&](int want_dim) {
    int dim = want_dim;
    for (const auto& [key, _] : a) dim = std::max(dim, key.second + 1);
    std::vector<std::vector<Expr>> m(dim, std::vector<Expr>(dim));
    for (const auto& [key, val] : a) m[key.first][key.second] = val.second;
    return BilinearField(std::move(m));
  };

  FieldFile out;
  out.K = K;
  if (kind == "concircular") {
    out.kind = FieldFile::Kind::Concircular;
    out.concircular.phi.comp = indexed_to_vector(phi, "phi");
    if (!rho) throw IoError("concircular field file is missing 'rho'");
    out.concircular.rho = rho;
    out.concircular.K = K;
    out.dim = static_cast<int>(out.concircular.phi.comp.size());
  } else if (kind == "sinyukov") {
    out.kind = FieldFile::Kind::Sinyukov;
    out.sinyukov.lambda.comp = indexed_to_vector(lambda, "lambda");
    out.dim = static_cast<int>(out.sinyukov.lambda.comp.size());
    out.sinyukov.a = build_bilinear(out.dim);
    if (!mu) throw IoError("sinyukov field file is missing 'mu'");
    out.sinyukov.mu = mu;
    if (!K) throw IoError("sinyukov field file is missing 'K'");
    out.sinyukov.K = *K;
  } else if (kind == "covector") {
    out.kind = FieldFile::Kind::Covector;
    out.covector.comp = indexed_to_vector(w, "w");
    out.dim = static_cast<int>(out.covector.comp.size());
  } else if (kind == "sinyukov-lifted") {
    out.kind = FieldFile::Kind::SinyukovLifted;
    out.lifted = build_bilinear(0);
    out.dim = out.lifted.dim();
    if (out.dim == 0) throw IoError("lifted field file has no 'a' entries");
  } else if (kind.empty()) {
    throw IoError("field file is missing 'kind'");
  } else {
    throw IoError("unknown field kind '" + kind + "'");
  }
  return out;
}

std::string field_to_text(const ConcircularCandidate& c) {
  std::ostringstream os;
  os << "kind = concircular\n";
  for (std::size_t i = 0; i < c.phi.comp.size(); ++i)
    os << "phi " << i << " = " << to_string(c.phi.comp[i]) << "\n";
  os << "rho = " << to_string(c.rho) << "\n";
  if (c.K) os << "K = " << format_double(*c.K) << "\n";
  return os.str();
}

std::string field_to_text(const SinyukovSolution& s, bool with_K) {
  std::ostringstream os;
  os << "kind = sinyukov\n";
  for (int i = 0; i < s.a.dim(); ++i)
    for (int j = i; j < s.a.dim(); ++j) os << "a " << i << " " << j << " = " << to_string(s.a(i, j)) << "\n";
  for (std::size_t i = 0; i < s.lambda.comp.size(); ++i)
    os << "lambda " << i << " = " << to_string(s.lambda.comp[i]) << "\n";
  os << "mu = " << to_string(s.mu) << "\n";
  if (with_K) os << "K = " << format_double(s.K) << "\n";
  return os.str();
}

std::string field_to_text(const CovectorField& w) {
  std::ostringstream os;
  os << "kind = covector\n";
  for (std::size_t i = 0; i < w.comp.size(); ++i)
    os << "w " << i << " = " << to_string(w.comp[i]) << "\n";
  return os.str();
}

std::string field_to_text(const LiftedCovector& w) {
  std::ostringstream os;
  os << "kind = covector\n";
  for (std::size_t i = 0; i < w.comp.size(); ++i)
    os << "w " << i << " = " << to_string(w.comp[i]) << "\n";
  return os.str();
}

std::string field_to_text(const LiftedBilinear& f) {
  std::ostringstream os;
  os << "kind = sinyukov-lifted\n";
  for (int i = 0; i < f.a.dim(); ++i)
    for (int j = i; j < f.a.dim(); ++j) os << "a " << i << " " << j << " = " << to_string(f.a(i, j)) << "\n";
  os << "K = " << format_double(f.K) << "\n";
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write '" + path + "'");
  os << content;
}

MetricChart load_metric_file(const std::string& path) {
  try {
    return parse_metric(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what(), e.line);
  }
}

FieldFile load_field_file(const std::string& path) {
  try {
    return parse_field(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what(), e.line);
  }
}

} // namespace conlab
