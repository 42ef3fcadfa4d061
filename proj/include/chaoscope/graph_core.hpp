#pragma once

// Explicit finite directed graphs, homomorphisms between them, and the
// validators for the bd-cover axioms (edge surjectivity, homomorphism,
// bidirectionality). Everything here is immutable after construction.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chaoscope/bigint.hpp"

namespace chaoscope::graph {

using VertexId = std::uint32_t;

struct Edge
{
  VertexId from = 0;
  VertexId to = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class GraphError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class MaterializedGraph
{
public:
  /// Edges are sorted and deduplicated. Throws GraphError on an out-of-range id.
  MaterializedGraph(std::size_t vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges))
  {
    for (const auto& e : edges_) {
      if (e.from >= vertex_count_ || e.to >= vertex_count_)
        throw GraphError("edge (" + std::to_string(e.from) + "," + std::to_string(e.to) +
                         ") references a vertex >= vertex_count " + std::to_string(vertex_count_));
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    build_index();
  }

  std::size_t vertex_count() const { return vertex_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }

  bool has_edge(VertexId from, VertexId to) const
  {
    return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
  }

  /// Out-edges of v, as a contiguous slice of the sorted edge list.
  std::span<const Edge> out_edges(VertexId v) const
  {
    return std::span<const Edge>(edges_).subspan(out_offset_[v], out_offset_[v + 1] - out_offset_[v]);
  }

  std::span<const VertexId> predecessors(VertexId v) const
  {
    return std::span<const VertexId>(in_sources_).subspan(in_offset_[v], in_offset_[v + 1] - in_offset_[v]);
  }

  std::size_t out_degree(VertexId v) const { return out_offset_[v + 1] - out_offset_[v]; }
  std::size_t in_degree(VertexId v) const { return in_offset_[v + 1] - in_offset_[v]; }

  friend bool operator==(const MaterializedGraph& a, const MaterializedGraph& b)
  {
    return a.vertex_count_ == b.vertex_count_ && a.edges_ == b.edges_;
  }

private:
  void build_index()
  {
    out_offset_.assign(vertex_count_ + 1, 0);
    in_offset_.assign(vertex_count_ + 1, 0);
    for (const auto& e : edges_) {
      ++out_offset_[e.from + 1];
      ++in_offset_[e.to + 1];
    }
    for (std::size_t v = 0; v < vertex_count_; ++v) {
      out_offset_[v + 1] += out_offset_[v];
      in_offset_[v + 1] += in_offset_[v];
    }
    in_sources_.resize(edges_.size());
    std::vector<std::size_t> fill(in_offset_.begin(), in_offset_.end() - 1);
    for (const auto& e : edges_)
      in_sources_[fill[e.to]++] = e.from;
  }

  std::size_t vertex_count_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offset_;
  std::vector<std::size_t> in_offset_;
  std::vector<VertexId> in_sources_;
};

using GraphPtr = std::shared_ptr<const MaterializedGraph>;

/// A vertex map between two graphs. Whether it is a homomorphism (and
/// bidirectional) is a question for the validators, not a construction
/// invariant, so that broken user input can be diagnosed.
class CoverMap
{
public:
  CoverMap(GraphPtr source, GraphPtr target, std::vector<VertexId> vertex_map)
    : source_(std::move(source)), target_(std::move(target)), map_(std::move(vertex_map))
  {
    if (!source_ || !target_)
      throw GraphError("cover map needs both a source and a target graph");
    if (map_.size() != source_->vertex_count())
      throw GraphError("vertex map has " + std::to_string(map_.size()) + " entries but the source has " +
                       std::to_string(source_->vertex_count()) + " vertices");
    for (std::size_t v = 0; v < map_.size(); ++v) {
      if (map_[v] >= target_->vertex_count())
        throw GraphError("vertex " + std::to_string(v) + " maps outside the target graph");
    }
  }

  const MaterializedGraph& source() const { return *source_; }
  const MaterializedGraph& target() const { return *target_; }
  const GraphPtr& source_ptr() const { return source_; }
  const GraphPtr& target_ptr() const { return target_; }
  std::span<const VertexId> vertex_map() const { return map_; }
  VertexId operator()(VertexId v) const { return map_.at(v); }

private:
  GraphPtr source_;
  GraphPtr target_;
  std::vector<VertexId> map_;
};

/// Vertex sequence of a path; a path with n+1 vertices has n edges.
struct VertexPath
{
  std::vector<VertexId> vertices;

  std::size_t edge_count() const { return vertices.empty() ? 0 : vertices.size() - 1; }
  friend bool operator==(const VertexPath&, const VertexPath&) = default;
};

struct Violation
{
  enum class Kind
  {
    MissingIncoming,
    MissingOutgoing,
    EdgeNotPreserved,
    SuccessorImagesDiffer,
    PredecessorImagesDiffer,
  };

  Kind kind;
  VertexId vertex = 0;
  VertexId other = 0; // second endpoint or conflicting neighbour, when relevant

  friend bool operator==(const Violation&, const Violation&) = default;
};

inline std::string to_string(Violation::Kind kind)
{
  switch (kind) {
  case Violation::Kind::MissingIncoming: return "missing-incoming";
  case Violation::Kind::MissingOutgoing: return "missing-outgoing";
  case Violation::Kind::EdgeNotPreserved: return "edge-not-preserved";
  case Violation::Kind::SuccessorImagesDiffer: return "successor-images-differ";
  case Violation::Kind::PredecessorImagesDiffer: return "predecessor-images-differ";
  }
  return "unknown";
}

inline std::string describe(const Violation& v)
{
  switch (v.kind) {
  case Violation::Kind::MissingIncoming:
  case Violation::Kind::MissingOutgoing:
    return to_string(v.kind) + " at vertex " + std::to_string(v.vertex);
  case Violation::Kind::EdgeNotPreserved:
    return "image of edge (" + std::to_string(v.vertex) + "," + std::to_string(v.other) + ") is not an edge";
  default:
    return to_string(v.kind) + " at vertex " + std::to_string(v.vertex) + " (neighbour " +
           std::to_string(v.other) + ")";
  }
}

inline std::vector<Violation> validate_edge_surjective(const MaterializedGraph& g)
{
  std::vector<Violation> out;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (g.in_degree(v) == 0)
      out.push_back({Violation::Kind::MissingIncoming, v, v});
    if (g.out_degree(v) == 0)
      out.push_back({Violation::Kind::MissingOutgoing, v, v});
  }
  return out;
}

inline std::vector<Violation> validate_homomorphism(const CoverMap& c)
{
  std::vector<Violation> out;
  for (const auto& e : c.source().edges()) {
    if (!c.target().has_edge(c(e.from), c(e.to)))
      out.push_back({Violation::Kind::EdgeNotPreserved, e.from, e.to});
  }
  return out;
}

/// Reports each vertex whose out-neighbours (or in-neighbours) do not share a
/// single image; `other` is the first neighbour that disagrees.
inline std::vector<Violation> validate_bidirectional(const CoverMap& c)
{
  std::vector<Violation> out;
  const auto& g = c.source();
  for (VertexId u = 0; u < g.vertex_count(); ++u) {
    const auto succ = g.out_edges(u);
    for (std::size_t k = 1; k < succ.size(); ++k) {
      if (c(succ[k].to) != c(succ[0].to)) {
        out.push_back({Violation::Kind::SuccessorImagesDiffer, u, succ[k].to});
        break;
      }
    }
    const auto pred = g.predecessors(u);
    for (std::size_t k = 1; k < pred.size(); ++k) {
      if (c(pred[k]) != c(pred[0])) {
        out.push_back({Violation::Kind::PredecessorImagesDiffer, u, pred[k]});
        break;
      }
    }
  }
  return out;
}

inline bool is_path(const MaterializedGraph& g, const VertexPath& p)
{
  if (p.vertices.empty())
    return false;
  for (VertexId v : p.vertices) {
    if (v >= g.vertex_count())
      return false;
  }
  for (std::size_t k = 1; k < p.vertices.size(); ++k) {
    if (!g.has_edge(p.vertices[k - 1], p.vertices[k]))
      return false;
  }
  return true;
}

/// Image of a path under the cover, vertex by vertex. Throws GraphError if
/// `p` is not a path of the source graph.
inline VertexPath apply_cover_to_path(const CoverMap& c, const VertexPath& p)
{
  if (!is_path(c.source(), p))
    throw GraphError("path is not a path of the source graph");
  VertexPath image;
  image.vertices.reserve(p.vertices.size());
  for (VertexId v : p.vertices)
    image.vertices.push_back(c(v));
  return image;
}

/// outer ∘ inner. Requires inner.target() == outer.source() (structurally).
inline CoverMap compose_covers(const CoverMap& outer, const CoverMap& inner)
{
  if (inner.target_ptr() != outer.source_ptr() && !(inner.target() == outer.source()))
    throw GraphError("cannot compose: inner target differs from outer source");
  std::vector<VertexId> map(inner.source().vertex_count());
  for (VertexId v = 0; v < map.size(); ++v)
    map[v] = outer(inner(v));
  return CoverMap(inner.source_ptr(), outer.target_ptr(), std::move(map));
}

inline CoverMap identity_cover(GraphPtr g)
{
  std::vector<VertexId> map(g->vertex_count());
  for (VertexId v = 0; v < map.size(); ++v)
    map[v] = v;
  return CoverMap(g, g, std::move(map));
}

/// DOT digraph, one line per edge; vertex 0 is labelled "v0".
inline void write_dot(std::ostream& os, const MaterializedGraph& g, const std::string& name = "G")
{
  os << "digraph " << name << " {\n";
  if (g.vertex_count() > 0)
    os << "  0 [label=\"v0\"];\n";
  for (const auto& e : g.edges())
    os << "  " << e.from << " -> " << e.to << ";\n";
  os << "}\n";
}

inline nlohmann::json stats_json(std::size_t level, const MaterializedGraph& g,
                                 std::span<const BigInt> cycle_lengths)
{
  nlohmann::json lengths = nlohmann::json::array();
  for (const auto& l : cycle_lengths)
    lengths.push_back(to_decimal(l));
  return {{"level", level},
          {"vertex_count", g.vertex_count()},
          {"edge_count", g.edge_count()},
          {"cycle_lengths", lengths}};
}

} // namespace chaoscope::graph
