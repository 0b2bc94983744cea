#include "lr/dot.hpp"

#include <vector>

#include <fmt/format.h>

#include "lr/printer.hpp"

namespace lr {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += "\"";
  return out;
}

std::string escape_label(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

struct DotWriter {
  std::string nodes;
  std::vector<std::string> edges;

  static std::string indent(int depth) { return std::string(static_cast<size_t>(depth) * 2, ' '); }

  /// Node id for one endpoint. Leaves collapse to a single node; their port
  /// name becomes a tail/head label on the edge instead.
  std::string endpoint_node(const GenericActionComponent& c, const std::string& path,
                            const Endpoint& e, bool isTail, std::string& attrs) {
    if (e.is_self()) return path + "." + e.port;
    const Child* ch = find_child(c, e.owner);
    std::string childPath = path + "/" + e.owner;
    bool leaf = ch && ch->is_inline() && ch->inline_component().is_leaf();
    if (leaf) {
      attrs += fmt::format("{}label={} ", isTail ? "tail" : "head", quote(e.port));
      return childPath;
    }
    return childPath + "." + e.port;
  }

  void render(const GenericActionComponent& c, const std::string& path, int depth) {
    std::string pad = indent(depth);
    if (c.is_leaf()) {
      std::string label = c.name;
      if (c.exec) label += "\\n" + escape_label(c.exec->path);
      nodes += fmt::format("{}{} [shape=box label={}];\n", pad, quote(path), quote(label));
      return;
    }
    nodes += fmt::format("{}subgraph {} {{\n", pad, quote("cluster_" + path));
    nodes += fmt::format("{}  label={};\n", pad, quote(c.name + " (" + c.level.keyword() + ")"));
    for (const auto& p : c.ports) {
      const char* shape = p.kind == PortKind::Start ? "circle" : "doublecircle";
      std::string label = p.name;
      if (p.guard) label += "\\nwhen " + escape_label(cond_text(p.guard));
      nodes += fmt::format("{}  {} [shape={} label={}];\n", pad, quote(path + "." + p.name), shape,
                           quote(label));
    }
    for (const auto& ch : c.children) {
      // Flat models carry inline children only.
      if (ch.is_inline()) render(ch.inline_component(), path + "/" + ch.instance_name(), depth + 1);
    }
    nodes += pad + "}\n";

    for (const auto& t : c.transitions) {
      std::string attrs;
      std::string src = endpoint_node(c, path, t.source, true, attrs);
      std::string dst = endpoint_node(c, path, t.target, false, attrs);
      std::string label;
      if (t.pre) label += "pre: " + escape_label(cond_text(t.pre));
      if (t.post)
        label += (label.empty() ? "" : "\\n") + std::string("post: ") + escape_label(cond_text(t.post));
      if (!label.empty()) attrs += "label=" + quote(label) + " ";
      if (!attrs.empty() && attrs.back() == ' ') attrs.pop_back();
      edges.push_back(fmt::format("  {} -> {}{};\n", quote(src), quote(dst),
                                  attrs.empty() ? "" : " [" + attrs + "]"));
    }
  }
};

}  // namespace

std::string emit_dot(const GenericActionComponent& flatRoot) {
  DotWriter w;
  w.render(flatRoot, flatRoot.name, 1);
  std::string out =
      fmt::format("digraph {} {{\n  rankdir=LR;\n  node [fontsize=10];\n", quote(flatRoot.name));
  out += w.nodes;
  for (const auto& e : w.edges) out += e;
  out += "}\n";
  return out;
}

}  // namespace lr
