#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "ievrp/instance.hpp"
#include "ievrp/milp.hpp"

namespace ievrp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_terms(std::ostream& os, const std::vector<std::pair<int, double>>& terms,
                 const std::vector<std::string>& names) {
  bool first = true;
  for (auto [j, coef] : terms) {
    if (coef == 0.0) continue;
    if (first) {
      os << (coef < 0.0 ? "- " : "") << fmt(std::abs(coef)) << " " << names[j];
      first = false;
    } else {
      os << (coef < 0.0 ? " - " : " + ") << fmt(std::abs(coef)) << " " << names[j];
    }
  }
  if (first) os << "0 " << (names.empty() ? "none" : names[0]);
}

}  // namespace

std::string write_lp_string(const LinearProgram& lp) {
  std::ostringstream os;
  os << "\\ Problem: " << lp.name << "\n";
  os << "Minimize\n obj: ";
  std::vector<std::pair<int, double>> obj_terms;
  for (int j = 0; j < lp.num_cols(); ++j)
    if (lp.objective(j) != 0.0) obj_terms.push_back({j, lp.objective(j)});
  write_terms(os, obj_terms, lp.column_names);
  os << "\nSubject To\n";
  for (const auto& row : lp.rows) {
    os << " " << row.name << ": ";
    write_terms(os, row.terms, lp.column_names);
    switch (row.sense) {
      case RowSense::LE: os << " <= "; break;
      case RowSense::GE: os << " >= "; break;
      case RowSense::EQ: os << " = "; break;
    }
    os << fmt(row.rhs) << "\n";
  }
  // All columns appear here in catalog order; the reader restores the order
  // from this section, which makes a write/read cycle the identity.
  os << "Bounds\n";
  for (int j = 0; j < lp.num_cols(); ++j) {
    double lo = lp.lower(j), up = lp.upper(j);
    os << " ";
    if (!std::isfinite(lo) && !std::isfinite(up)) {
      os << lp.column_names[j] << " free";
    } else if (lo == up) {
      os << lp.column_names[j] << " = " << fmt(lo);
    } else if (!std::isfinite(up)) {
      os << fmt(lo) << " <= " << lp.column_names[j];
    } else if (!std::isfinite(lo)) {
      os << lp.column_names[j] << " <= " << fmt(up);
    } else {
      os << fmt(lo) << " <= " << lp.column_names[j] << " <= " << fmt(up);
    }
    os << "\n";
  }
  bool any_binary = false;
  for (auto b : lp.is_binary) any_binary |= b != 0;
  if (any_binary) {
    os << "Binaries\n";
    for (int j = 0; j < lp.num_cols(); ++j)
      if (lp.is_binary[j]) os << " " << lp.column_names[j] << "\n";
  }
  os << "End\n";
  return os.str();
}

void export_lp_file(const LinearProgram& lp, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << write_lp_string(lp);
  if (!out) throw Error("write to '" + path + "' failed");
}

namespace {

struct Token {
  std::string text;
  int line = 0;
};

std::vector<Token> tokenize_lp(const std::string& text) {
  std::vector<Token> toks;
  int line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') { ++line; ++i; continue; }
    if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
    if (c == '\\') {  // comment to end of line
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    std::size_t start = i;
    if (c == '<' || c == '>' || c == '=') {
      ++i;
      if (i < text.size() && text[i] == '=') ++i;
    } else if (c == '+' || c == '-' || c == ':') {
      ++i;
    } else {
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
             text[i] != ':' && text[i] != '<' && text[i] != '>' && text[i] != '=' &&
             text[i] != '+' && text[i] != '-')
        ++i;
      // numbers may carry a signed exponent, e.g. 1e-3
      if (i < text.size() && (text[i] == '+' || text[i] == '-') && i > start &&
          (text[i - 1] == 'e' || text[i - 1] == 'E') &&
          std::isdigit(static_cast<unsigned char>(text[start]))) {
        ++i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      }
    }
    toks.push_back({text.substr(start, i - start), line});
  }
  return toks;
}

bool is_number(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

LinearProgram read_lp_string(const std::string& text, const std::string& origin) {
  std::string model_name = "model";
  if (text.rfind("\\ Problem: ", 0) == 0) {
    std::size_t eol = text.find('\n');
    model_name = text.substr(11, eol == std::string::npos ? std::string::npos : eol - 11);
  }
  auto toks = tokenize_lp(text);
  std::size_t pos = 0;
  auto fail = [&](const std::string& msg) -> Error {
    int line = pos < toks.size() ? toks[pos].line : 0;
    return Error(origin + ":" + std::to_string(line) + ": " + msg);
  };
  auto peek = [&]() -> const std::string& {
    static const std::string empty;
    return pos < toks.size() ? toks[pos].text : empty;
  };
  auto at_keyword = [&](std::initializer_list<const char*> kws) {
    std::string t = lower(peek());
    // two-word keyword "subject to"
    if (t == "subject" && pos + 1 < toks.size() && lower(toks[pos + 1].text) == "to")
      t = "subject to";
    for (const char* k : kws)
      if (t == k) return true;
    return false;
  };
  // Numbers may be preceded by standalone sign tokens.
  auto read_signed = [&](double* out) {
    double sign = 1.0;
    std::size_t save = pos;
    while (peek() == "+" || peek() == "-") {
      if (peek() == "-") sign = -sign;
      ++pos;
    }
    double v;
    if (!is_number(peek(), &v)) {
      pos = save;
      return false;
    }
    ++pos;
    *out = sign * v;
    return true;
  };

  struct SymTerm { std::string var; double coef; };
  struct SymRow { std::string name; std::vector<SymTerm> terms; RowSense sense; double rhs; };
  std::vector<SymTerm> objective;
  std::vector<SymRow> rows;
  struct BoundRec { double lo = 0.0, up = kInf; bool seen = false; };
  std::map<std::string, BoundRec> bounds;
  std::vector<std::string> bound_order;
  std::vector<std::string> binaries;

  auto parse_terms = [&](std::vector<SymTerm>* terms) {
    double sign = 1.0;
    bool pending = false;
    while (pos < toks.size()) {
      const std::string& t = peek();
      if (t == "+") { sign = pending ? sign : 1.0; pending = true; ++pos; continue; }
      if (t == "-") { sign = pending ? -sign : -1.0; pending = true; ++pos; continue; }
      if (t == "<=" || t == ">=" || t == "=" || t == "<" || t == ">") break;
      double num;
      if (is_number(t, &num)) {
        ++pos;
        // optional variable after a coefficient ("0" alone is allowed)
        double coef = (pending ? sign : 1.0) * num;
        if (pos < toks.size()) {
          double dummy;
          const std::string& nxt = peek();
          bool nxt_is_op = nxt == "+" || nxt == "-" || nxt == "<=" || nxt == ">=" ||
                           nxt == "=" || nxt == "<" || nxt == ">" || nxt == ":";
          if (!nxt_is_op && !is_number(nxt, &dummy) &&
              !(lower(nxt) == "subject" || lower(nxt) == "bounds" ||
                lower(nxt) == "binaries" || lower(nxt) == "binary" ||
                lower(nxt) == "end" || lower(nxt) == "general")) {
            if (coef != 0.0) terms->push_back({nxt, coef});
            ++pos;
            sign = 1.0;
            pending = false;
            continue;
          }
        }
        if (coef != 0.0) terms->push_back({"", coef});  // bare constant: reject later
        sign = 1.0;
        pending = false;
        continue;
      }
      if (at_keyword({"subject to", "bounds", "binaries", "binary", "end", "general"}))
        break;
      // bare variable
      terms->push_back({t, pending ? sign : 1.0});
      ++pos;
      sign = 1.0;
      pending = false;
    }
  };

  if (!at_keyword({"minimize", "min"})) throw fail("expected 'Minimize'");
  ++pos;
  // optional objective label
  if (pos + 1 < toks.size() && toks[pos + 1].text == ":") pos += 2;
  parse_terms(&objective);

  if (!at_keyword({"subject to", "st", "s.t."})) throw fail("expected 'Subject To'");
  pos += lower(peek()) == "subject" ? 2 : 1;

  int anon = 0;
  while (pos < toks.size() && !at_keyword({"bounds", "binaries", "binary", "end"})) {
    SymRow row;
    if (pos + 1 < toks.size() && toks[pos + 1].text == ":") {
      row.name = peek();
      pos += 2;
    } else {
      row.name = "c" + std::to_string(anon++);
    }
    parse_terms(&row.terms);
    const std::string s = peek();
    if (s == "<=" || s == "<") row.sense = RowSense::LE;
    else if (s == ">=" || s == ">") row.sense = RowSense::GE;
    else if (s == "=") row.sense = RowSense::EQ;
    else throw fail("expected a relational operator in constraint '" + row.name + "'");
    ++pos;
    double rhs;
    if (!read_signed(&rhs)) throw fail("expected a right-hand side number");
    row.rhs = rhs;
    rows.push_back(std::move(row));
  }

  auto touch = [&](const std::string& name) -> BoundRec& {
    auto it = bounds.find(name);
    if (it == bounds.end()) {
      bound_order.push_back(name);
      it = bounds.emplace(name, BoundRec{}).first;
    }
    return it->second;
  };

  if (at_keyword({"bounds"})) {
    ++pos;
    while (pos < toks.size() && !at_keyword({"binaries", "binary", "end"})) {
      double num;
      if (read_signed(&num)) {
        // "lo <= var [<= up]"
        double lo = num;
        if (peek() != "<=" && peek() != "<") throw fail("expected '<=' in bound");
        ++pos;
        std::string var = peek();
        ++pos;
        BoundRec& b = touch(var);
        b.lo = lo;
        b.seen = true;
        if (peek() == "<=" || peek() == "<") {
          ++pos;
          if (!read_signed(&num)) throw fail("expected an upper bound");
          b.up = num;
        }
      } else {
        std::string var = peek();
        ++pos;
        if (lower(peek()) == "free") {
          BoundRec& b = touch(var);
          b.lo = -kInf;
          b.up = kInf;
          b.seen = true;
          ++pos;
        } else if (peek() == "=") {
          ++pos;
          if (!read_signed(&num)) throw fail("expected a fixed value");
          BoundRec& b = touch(var);
          b.lo = b.up = num;
          b.seen = true;
        } else if (peek() == "<=" || peek() == "<") {
          ++pos;
          if (!read_signed(&num)) throw fail("expected an upper bound");
          BoundRec& b = touch(var);
          b.up = num;
          b.seen = true;
        } else {
          throw fail("malformed bound line near '" + var + "'");
        }
      }
    }
  }
  if (at_keyword({"binaries", "binary"})) {
    ++pos;
    while (pos < toks.size() && !at_keyword({"end"})) {
      binaries.push_back(peek());
      ++pos;
    }
  }
  if (!at_keyword({"end"})) throw fail("expected 'End'");

  // Column order: the Bounds section order, then any name first seen in the
  // objective or a constraint.
  LinearProgram lp;
  lp.name = model_name;
  std::map<std::string, int> index;
  auto add_var = [&](const std::string& name) {
    if (name.empty()) throw Error(origin + ": constant term in expression");
    if (index.count(name)) return;
    index[name] = lp.add_column(name, 0.0, kInf, 0.0, false);
  };
  for (const auto& name : bound_order) add_var(name);
  for (const auto& t : objective) add_var(t.var);
  for (const auto& row : rows)
    for (const auto& t : row.terms) add_var(t.var);
  for (const auto& name : binaries) add_var(name);

  for (const auto& [name, rec] : bounds) {
    int j = index[name];
    lp.lower(j) = rec.lo;
    lp.upper(j) = rec.up;
  }
  for (const auto& t : objective) lp.objective(index[t.var]) += t.coef;
  for (const auto& row : rows) {
    LinearRow r;
    r.name = row.name;
    r.sense = row.sense;
    r.rhs = row.rhs;
    for (const auto& t : row.terms) r.terms.push_back({index[t.var], t.coef});
    lp.add_row(std::move(r));
  }
  for (const auto& name : binaries) {
    int j = index[name];
    lp.is_binary[j] = 1;
    if (!bounds.count(name)) {
      lp.lower(j) = 0.0;
      lp.upper(j) = 1.0;
    }
  }
  return lp;
}

LinearProgram import_lp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open LP file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_lp_string(ss.str(), path);
}

}  // namespace ievrp
