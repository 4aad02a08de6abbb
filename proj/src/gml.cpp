// Topology Zoo GML reader/writer.
//
// Grammar (whitespace separated, '#' starts a comment):
//   list  := (key value)*
//   value := integer | real | "string" | '[' list ']'

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "mirage/topology.hpp"

namespace mirage {
namespace {

struct GmlValue;
struct GmlEntry {
  std::string key;
  std::shared_ptr<GmlValue> value;
  int line;
};
using GmlList = std::vector<GmlEntry>;

struct GmlValue {
  enum class Kind { Int, Real, String, List } kind;
  long long i = 0;
  double r = 0;
  std::string text;  // string contents, or the numeric lexeme
  GmlList list;
};

class GmlReader {
 public:
  explicit GmlReader(std::string_view text) : s_(text) {}

  GmlList parse_document() {
    GmlList top = parse_list(false);
    skip_ws();
    if (pos_ < s_.size()) throw ParseError("unexpected trailing input", line_);
    return top;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  GmlList parse_list(bool nested) {
    GmlList out;
    for (;;) {
      skip_ws();
      if (pos_ >= s_.size()) {
        if (nested) throw ParseError("unterminated '[' list", line_);
        return out;
      }
      if (s_[pos_] == ']') {
        if (!nested) throw ParseError("unbalanced ']'", line_);
        ++pos_;
        return out;
      }
      const int key_line = line_;
      std::string key = parse_key();
      skip_ws();
      if (pos_ >= s_.size()) throw ParseError("missing value for key '" + key + "'", line_);
      out.push_back({std::move(key), parse_value(), key_line});
    }
  }

  std::string parse_key() {
    const std::size_t start = pos_;
    if (!(std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      throw ParseError(std::string("expected key, found '") + s_[pos_] + "'", line_);
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  std::shared_ptr<GmlValue> parse_value() {
    auto v = std::make_shared<GmlValue>();
    const char c = s_[pos_];
    if (c == '[') {
      ++pos_;
      v->kind = GmlValue::Kind::List;
      v->list = parse_list(true);
    } else if (c == '"') {
      const int open_line = line_;
      ++pos_;
      const std::size_t start = pos_;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\n') ++line_;
        ++pos_;
      }
      if (pos_ >= s_.size()) throw ParseError("unterminated string", open_line);
      v->kind = GmlValue::Kind::String;
      v->text = std::string(s_.substr(start, pos_ - start));
      ++pos_;
    } else if (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      ++pos_;
      while (pos_ < s_.size()) {
        char d = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(d)) || d == '.' || d == 'e' || d == 'E' ||
            ((d == '-' || d == '+') && (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E')))
          ++pos_;
        else
          break;
      }
      v->text = std::string(s_.substr(start, pos_ - start));
      std::string lex = v->text;
      if (!lex.empty() && lex.front() == '+') lex.erase(0, 1);
      const bool is_real = lex.find_first_of(".eE") != std::string::npos;
      const char* b = lex.data();
      const char* e = lex.data() + lex.size();
      if (is_real) {
        v->kind = GmlValue::Kind::Real;
        auto [p, ec] = std::from_chars(b, e, v->r);
        if (ec != std::errc() || p != e) throw ParseError("bad number '" + v->text + "'", line_);
      } else {
        v->kind = GmlValue::Kind::Int;
        auto [p, ec] = std::from_chars(b, e, v->i);
        if (ec != std::errc() || p != e) throw ParseError("bad integer '" + v->text + "'", line_);
      }
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line_);
    }
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

const GmlEntry* find_key(const GmlList& list, std::string_view key) {
  for (const auto& e : list)
    if (e.key == key) return &e;
  return nullptr;
}

std::optional<double> numeric(const GmlEntry* e) {
  if (!e) return std::nullopt;
  switch (e->value->kind) {
    case GmlValue::Kind::Int:
      return static_cast<double>(e->value->i);
    case GmlValue::Kind::Real:
      return e->value->r;
    default:
      throw ParseError("attribute '" + e->key + "' must be numeric", e->line);
  }
}

long long integer_id(const GmlEntry* e, std::string_view what, int line) {
  if (!e) throw ParseError(std::string(what) + " is missing", line);
  if (e->value->kind != GmlValue::Kind::Int)
    throw ParseError(std::string(what) + " must be an integer", e->line);
  return e->value->i;
}

std::string fmt_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

ParsedTopology parse_gml(std::string_view text, const LinkDefaults& d) {
  GmlReader reader(text);
  const GmlList doc = reader.parse_document();
  const GmlEntry* graph = find_key(doc, "graph");
  if (!graph || graph->value->kind != GmlValue::Kind::List)
    throw ParseError("missing 'graph [ ... ]' block", graph ? graph->line : 0);
  const GmlList& g = graph->value->list;

  struct RawNode {
    long long id;
    Node node;
  };
  std::vector<RawNode> raw_nodes;
  std::vector<const GmlEntry*> raw_edges;
  std::string name;
  for (const auto& e : g) {
    if (e.key == "node") {
      if (e.value->kind != GmlValue::Kind::List) throw ParseError("node must be a list", e.line);
      RawNode rn;
      rn.id = integer_id(find_key(e.value->list, "id"), "node id", e.line);
      rn.node.kind = NodeKind::Switch;
      rn.node.gml_id = rn.id;
      for (const auto& a : e.value->list) {
        if (a.key == "id") continue;
        if (a.value->kind == GmlValue::Kind::List) continue;  // e.g. graphics blocks
        if (a.key == "label")
          rn.node.label = a.value->text;
        else
          rn.node.attrs[a.key] = a.value->text;
      }
      raw_nodes.push_back(std::move(rn));
    } else if (e.key == "edge") {
      if (e.value->kind != GmlValue::Kind::List) throw ParseError("edge must be a list", e.line);
      raw_edges.push_back(&e);
    } else if ((e.key == "Network" || (e.key == "label" && name.empty())) &&
               e.value->kind == GmlValue::Kind::String) {
      name = e.value->text;
    }
  }

  std::sort(raw_nodes.begin(), raw_nodes.end(),
            [](const RawNode& x, const RawNode& y) { return x.id < y.id; });
  ParsedTopology out{Topology(name, SourceFormat::GML), {}};
  std::unordered_map<long long, NodeId> by_gml;
  for (auto& rn : raw_nodes) {
    if (by_gml.count(rn.id)) throw ValidationError("duplicate node id " + std::to_string(rn.id));
    if (rn.node.label.empty()) rn.node.label = std::to_string(rn.id);
    by_gml[rn.id] = out.topology.add_node(std::move(rn.node));
  }

  for (const GmlEntry* e : raw_edges) {
    const GmlList& el = e->value->list;
    const long long src = integer_id(find_key(el, "source"), "edge source", e->line);
    const long long dst = integer_id(find_key(el, "target"), "edge target", e->line);
    auto su = by_gml.find(src), tv = by_gml.find(dst);
    if (su == by_gml.end() || tv == by_gml.end())
      throw ValidationError("line " + std::to_string(e->line) + ": edge references undeclared node " +
                            std::to_string(su == by_gml.end() ? src : dst));
    if (su->second == tv->second) {
      ++out.report.self_loops;
      continue;
    }
    const double cap = numeric(find_key(el, "capacity")).value_or(d.capacity);
    const double lat = numeric(find_key(el, "latency")).value_or(d.latency_ms);
    const double ql = numeric(find_key(el, "queue_limit")).value_or(d.queue_limit);
    if (!(cap > 0)) throw ValidationError("line " + std::to_string(e->line) + ": capacity must be > 0");
    if (!(lat >= 0)) throw ValidationError("line " + std::to_string(e->line) + ": latency must be >= 0");
    if (ql < 1) throw ValidationError("line " + std::to_string(e->line) + ": queue_limit must be >= 1");
    auto [_, merged] =
        out.topology.add_link(su->second, tv->second, cap, lat, static_cast<int>(ql));
    if (merged) ++out.report.duplicate_edges;
  }
  out.report.components = out.topology.switch_components().size();
  return out;
}

ParsedTopology load_gml_file(const std::string& path, const LinkDefaults& d) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_gml(ss.str(), d);
}

std::string write_gml(const Topology& topo) {
  std::ostringstream os;
  os << "graph [\n";
  if (!topo.name().empty()) os << "  Network \"" << topo.name() << "\"\n";
  std::vector<long long> ids(topo.node_count());
  for (NodeId i = 0; i < topo.node_count(); ++i) {
    const Node& n = topo.node(i);
    ids[i] = n.gml_id.value_or(static_cast<long long>(i));
    if (n.kind != NodeKind::Switch) continue;
    os << "  node [\n    id " << ids[i] << "\n    label \"" << n.label << "\"\n";
    for (const auto& [k, v] : n.attrs) os << "    " << k << " \"" << v << "\"\n";
    os << "  ]\n";
  }
  for (const Link& l : topo.links()) {
    if (!topo.is_switch(l.a) || !topo.is_switch(l.b)) continue;
    os << "  edge [\n    source " << ids[l.a] << "\n    target " << ids[l.b]
       << "\n    capacity " << fmt_real(l.capacity) << "\n    latency " << fmt_real(l.latency_ms)
       << "\n    queue_limit " << l.queue_limit << "\n  ]\n";
  }
  os << "]\n";
  return os.str();
}

}  // namespace mirage
