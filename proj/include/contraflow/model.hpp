#pragma once

// Core network types: arcs, reversible arc pairs, demand, lane and flow vectors.

#include <algorithm>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace contraflow {

using NodeIndex = int;
using ArcId = int;
using PairId = int;

inline constexpr int kNoPair = -1;

// Raised when a problem instance admits no feasible lane or flow assignment.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BprCoefficients {
  double alpha = 0.15;
  double power = 4.0;

  friend bool operator==(const BprCoefficients&, const BprCoefficients&) = default;
};

struct ArcParams {
  double lane_capacity = 1.0;   // veh/h per lane
  double free_flow_time = 1.0;  // h
  BprCoefficients bpr{};

  friend bool operator==(const ArcParams&, const ArcParams&) = default;
};

struct Arc {
  ArcId id = 0;
  NodeIndex tail = 0;
  NodeIndex head = 0;
  ArcParams params{};
  int nominal_lanes = 0;
  bool reversible = false;
  PairId pair = kNoPair;
};

// Two opposite arcs sharing one road. `total_lanes` is fixed at construction
// from the nominal configuration.
struct ArcPair {
  ArcId forward = 0;
  ArcId backward = 0;
  int total_lanes = 0;
  int min_lanes = 1;
};

// Input record for Network::build. Node ids are external (file) ids.
struct ArcSpec {
  int tail_id = 0;
  int head_id = 0;
  ArcParams params{};
  int lanes = 0;
};

struct LaneConfig {
  std::vector<int> lanes;

  std::size_t size() const { return lanes.size(); }
  int operator[](std::size_t i) const { return lanes[i]; }
  int& operator[](std::size_t i) { return lanes[i]; }
  friend bool operator==(const LaneConfig&, const LaneConfig&) = default;
};

struct FlowVector {
  std::vector<double> flows;

  std::size_t size() const { return flows.size(); }
  double operator[](std::size_t i) const { return flows[i]; }
  double& operator[](std::size_t i) { return flows[i]; }
  friend bool operator==(const FlowVector&, const FlowVector&) = default;
};

class Network {
 public:
  Network() = default;

  // Arcs are sorted by (tail id, head id, params, lanes) so the result does
  // not depend on input order. Opposite arcs are matched into pairs; a pair is
  // reversible only if both directions nominally carry at least `min_lanes`.
  static Network build(std::vector<int> node_ids, std::vector<ArcSpec> specs,
                       int min_lanes = 1) {
    if (min_lanes < 0) throw std::invalid_argument("min_lanes must be >= 0");
    std::sort(node_ids.begin(), node_ids.end());
    node_ids.erase(std::unique(node_ids.begin(), node_ids.end()), node_ids.end());

    Network net;
    net.min_lanes_ = min_lanes;
    net.node_ids_ = std::move(node_ids);
    for (std::size_t i = 0; i < net.node_ids_.size(); ++i)
      net.index_of_.emplace(net.node_ids_[i], static_cast<NodeIndex>(i));

    std::sort(specs.begin(), specs.end(), [](const ArcSpec& a, const ArcSpec& b) {
      return std::tie(a.tail_id, a.head_id, a.params.lane_capacity, a.params.free_flow_time,
                      a.params.bpr.alpha, a.params.bpr.power, a.lanes) <
             std::tie(b.tail_id, b.head_id, b.params.lane_capacity, b.params.free_flow_time,
                      b.params.bpr.alpha, b.params.bpr.power, b.lanes);
    });

    for (const ArcSpec& s : specs) {
      if (s.tail_id == s.head_id)
        throw std::invalid_argument("self-loop arc at node " + std::to_string(s.tail_id));
      if (!(s.params.lane_capacity > 0.0) || !(s.params.free_flow_time > 0.0))
        throw std::invalid_argument("arc " + std::to_string(s.tail_id) + "->" +
                                    std::to_string(s.head_id) +
                                    ": capacity and free-flow time must be positive");
      if (s.lanes < 0) throw std::invalid_argument("negative lane count");
      if (!net.has_node(s.tail_id) || !net.has_node(s.head_id))
        throw std::invalid_argument("arc " + std::to_string(s.tail_id) + "->" + std::to_string(s.head_id) +
                                    " references an unknown node");
      Arc a;
      a.id = static_cast<ArcId>(net.arcs_.size());
      a.tail = net.index_of(s.tail_id);
      a.head = net.index_of(s.head_id);
      a.params = s.params;
      a.nominal_lanes = s.lanes;
      net.arcs_.push_back(a);
    }

    // Match opposite arcs in sorted order (handles parallel arcs one-to-one).
    std::map<std::pair<NodeIndex, NodeIndex>, std::vector<ArcId>> by_ends;
    for (const Arc& a : net.arcs_) by_ends[{a.tail, a.head}].push_back(a.id);
    for (Arc& a : net.arcs_) {
      if (a.tail > a.head || a.pair != kNoPair) continue;
      auto it = by_ends.find({a.head, a.tail});
      if (it == by_ends.end()) continue;
      auto& candidates = it->second;
      auto match = std::find_if(candidates.begin(), candidates.end(),
                                [&](ArcId b) { return net.arcs_[b].pair == kNoPair; });
      if (match == candidates.end()) continue;
      Arc& b = net.arcs_[*match];
      const int n = a.nominal_lanes + b.nominal_lanes;
      if (n < 1 || a.nominal_lanes < min_lanes || b.nominal_lanes < min_lanes) continue;
      ArcPair p{a.id, b.id, n, min_lanes};
      a.pair = b.pair = static_cast<PairId>(net.pairs_.size());
      a.reversible = b.reversible = true;
      net.pairs_.push_back(p);
    }

    net.out_arcs_.assign(net.node_ids_.size(), {});
    for (const Arc& a : net.arcs_) net.out_arcs_[a.tail].push_back(a.id);
    return net;
  }

  std::size_t num_nodes() const { return node_ids_.size(); }
  std::size_t num_arcs() const { return arcs_.size(); }
  std::size_t num_pairs() const { return pairs_.size(); }

  const std::vector<int>& node_ids() const { return node_ids_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<ArcPair>& pairs() const { return pairs_; }
  const Arc& arc(ArcId id) const { return arcs_.at(static_cast<std::size_t>(id)); }
  const ArcPair& pair(PairId id) const { return pairs_.at(static_cast<std::size_t>(id)); }
  const std::vector<ArcId>& out_arcs(NodeIndex v) const { return out_arcs_.at(static_cast<std::size_t>(v)); }
  int min_lanes() const { return min_lanes_; }

  int node_id(NodeIndex v) const { return node_ids_.at(static_cast<std::size_t>(v)); }
  bool has_node(int id) const { return index_of_.count(id) != 0; }
  NodeIndex index_of(int id) const {
    auto it = index_of_.find(id);
    if (it == index_of_.end()) throw std::out_of_range("unknown node id " + std::to_string(id));
    return it->second;
  }

  LaneConfig nominal_lanes() const {
    LaneConfig z;
    z.lanes.reserve(arcs_.size());
    for (const Arc& a : arcs_) z.lanes.push_back(a.nominal_lanes);
    return z;
  }

  int total_lanes() const {
    int s = 0;
    for (const Arc& a : arcs_) s += a.nominal_lanes;
    return s;
  }

  // Strong connectivity over arcs carrying at least one lane in `lanes`.
  bool is_strongly_connected(const LaneConfig& lanes) const {
    const std::size_t n = node_ids_.size();
    if (n == 0) return true;
    auto reach = [&](bool reverse) {
      std::vector<std::vector<NodeIndex>> adj(n);
      for (const Arc& a : arcs_) {
        if (lanes[static_cast<std::size_t>(a.id)] < 1) continue;
        if (reverse) adj[a.head].push_back(a.tail);
        else adj[a.tail].push_back(a.head);
      }
      std::vector<char> seen(n, 0);
      std::vector<NodeIndex> stack{0};
      seen[0] = 1;
      std::size_t count = 1;
      while (!stack.empty()) {
        NodeIndex v = stack.back();
        stack.pop_back();
        for (NodeIndex w : adj[v])
          if (!seen[w]) { seen[w] = 1; ++count; stack.push_back(w); }
      }
      return count == n;
    };
    return reach(false) && reach(true);
  }
  bool is_strongly_connected() const { return is_strongly_connected(nominal_lanes()); }

  // Full-utilisation and floor constraints for reversible pairs; non-reversible
  // arcs must keep their nominal lanes.
  bool is_feasible(const LaneConfig& z) const {
    if (z.size() != arcs_.size()) return false;
    for (const Arc& a : arcs_)
      if (!a.reversible && z[a.id] != a.nominal_lanes) return false;
    for (const ArcPair& p : pairs_) {
      const int f = z[p.forward], b = z[p.backward];
      if (f < p.min_lanes || b < p.min_lanes || f + b != p.total_lanes) return false;
    }
    return true;
  }

 private:
  std::vector<int> node_ids_;
  std::map<int, NodeIndex> index_of_;
  std::vector<Arc> arcs_;
  std::vector<ArcPair> pairs_;
  std::vector<std::vector<ArcId>> out_arcs_;
  int min_lanes_ = 1;
};

struct OdEntry {
  NodeIndex origin = 0;
  NodeIndex destination = 0;
  double base_demand = 0.0;  // veh/h before the multiplier
};

class ODMatrix {
 public:
  ODMatrix() = default;

  // Entries with zero demand are dropped; entries are kept sorted by
  // (origin, destination) with duplicates summed.
  ODMatrix(const Network& net, std::vector<OdEntry> entries, double multiplier = 1.0)
      : multiplier_(multiplier) {
    if (!(multiplier > 0.0)) throw std::invalid_argument("demand multiplier must be > 0");
    std::map<std::pair<NodeIndex, NodeIndex>, double> merged;
    for (const OdEntry& e : entries) {
      if (e.origin < 0 || e.destination < 0 ||
          static_cast<std::size_t>(e.origin) >= net.num_nodes() ||
          static_cast<std::size_t>(e.destination) >= net.num_nodes())
        throw std::invalid_argument("OD entry references a node outside the network");
      if (!(e.base_demand >= 0.0)) throw std::invalid_argument("negative demand");
      if (e.base_demand == 0.0) continue;
      if (e.origin == e.destination)
        throw std::invalid_argument("positive demand from node " +
                                    std::to_string(net.node_id(e.origin)) + " to itself");
      merged[{e.origin, e.destination}] += e.base_demand;
    }
    for (const auto& [od, d] : merged) entries_.push_back({od.first, od.second, d});
  }

  const std::vector<OdEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  double multiplier() const { return multiplier_; }
  double demand(std::size_t k) const { return entries_[k].base_demand * multiplier_; }

  double total_demand() const {
    double s = 0.0;
    for (std::size_t k = 0; k < entries_.size(); ++k) s += demand(k);
    return s;
  }

  ODMatrix with_multiplier(double m) const {
    if (!(m > 0.0)) throw std::invalid_argument("demand multiplier must be > 0");
    ODMatrix copy = *this;
    copy.multiplier_ = m;
    return copy;
  }

  // Origins in ascending order, each with the index range of its entries.
  std::vector<std::pair<NodeIndex, std::pair<std::size_t, std::size_t>>> by_origin() const {
    std::vector<std::pair<NodeIndex, std::pair<std::size_t, std::size_t>>> groups;
    std::size_t i = 0;
    while (i < entries_.size()) {
      std::size_t j = i;
      while (j < entries_.size() && entries_[j].origin == entries_[i].origin) ++j;
      groups.push_back({entries_[i].origin, {i, j}});
      i = j;
    }
    return groups;
  }

 private:
  std::vector<OdEntry> entries_;
  double multiplier_ = 1.0;
};

}  // namespace contraflow
