// src/lattice.cc

// Copyright 2026  ADSM contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "adsm/lattice.h"

#include <algorithm>
#include <limits>
#include <map>
#include <ostream>
#include <set>

namespace adsm {

namespace {

constexpr std::uint64_t kMaxCount = std::numeric_limits<std::uint64_t>::max();

std::uint64_t SaturatingAdd(std::uint64_t a, std::uint64_t b) {
  return a > kMaxCount - b ? kMaxCount : a + b;
}

void SortArcs(std::vector<LatticeArc> &arcs) {
  std::stable_sort(arcs.begin(), arcs.end(),
                   [](const LatticeArc &a, const LatticeArc &b) { return a.from < b.from; });
}

// Path statistics over a DAG with topologically ordered node ids.
PathStats DagStats(int num_nodes, const std::vector<LatticeArc> &arcs) {
  std::vector<std::uint64_t> count(num_nodes, 0);
  std::vector<int> min_len(num_nodes, std::numeric_limits<int>::max());
  std::vector<int> max_len(num_nodes, -1);
  count[0] = 1;
  min_len[0] = 0;
  max_len[0] = 0;
  // Arcs are sorted by source node, which is a topological order.
  for (const LatticeArc &arc : arcs) {
    if (count[arc.from] == 0) continue;
    count[arc.to] = SaturatingAdd(count[arc.to], count[arc.from]);
    min_len[arc.to] = std::min(min_len[arc.to], min_len[arc.from] + 1);
    max_len[arc.to] = std::max(max_len[arc.to], max_len[arc.from] + 1);
  }
  const int sink = num_nodes - 1;
  if (count[sink] == 0) return {};
  return {count[sink], min_len[sink], max_len[sink]};
}

std::vector<std::vector<int>> EnumerateSequences(int num_nodes,
                                                 const std::vector<LatticeArc> &arcs,
                                                 std::size_t max_paths) {
  std::vector<std::vector<const LatticeArc *>> out_arcs(num_nodes);
  for (const LatticeArc &arc : arcs) out_arcs[arc.from].push_back(&arc);
  std::vector<std::vector<int>> result;
  std::vector<int> prefix;
  const int sink = num_nodes - 1;
  auto visit = [&](auto &&self, int node) -> void {
    if (node == sink) {
      if (result.size() >= max_paths)
        throw CostGuardError("label sequence enumeration exceeds " +
                             std::to_string(max_paths) + " paths");
      result.push_back(prefix);
      return;
    }
    for (const LatticeArc *arc : out_arcs[node]) {
      prefix.push_back(arc->label);
      self(self, arc->to);
      prefix.pop_back();
    }
  };
  visit(visit, 0);
  return result;
}

}  // namespace

WordSegDag BuildWordDagImplicit(const std::string &word, const Vocabulary &vocab) {
  const auto chars = SplitChars(word);
  const int n = static_cast<int>(chars.size());
  if (n == 0) throw InputError("empty word");
  std::vector<LatticeArc> arcs;
  for (int from = 0; from < n; ++from) {
    std::string piece;
    for (int to = from + 1; to <= n && to - from <= vocab.MaxUnitChars(); ++to) {
      piece += chars[to - 1];
      if (auto id = vocab.Find({piece, to == n})) arcs.push_back({from, to, *id});
    }
  }
  // Keep only arcs on some source-to-sink path.
  std::vector<char> reach(n + 1, 0), coreach(n + 1, 0);
  reach[0] = 1;
  for (const LatticeArc &arc : arcs)
    if (reach[arc.from]) reach[arc.to] = 1;
  coreach[n] = 1;
  for (auto it = arcs.rbegin(); it != arcs.rend(); ++it)
    if (coreach[it->to]) coreach[it->from] = 1;
  if (!reach[n])
    throw InputError("word \"" + word + "\" cannot be spelled with the vocabulary");
  WordSegDag dag;
  dag.word = word;
  dag.num_nodes = n + 1;
  for (const LatticeArc &arc : arcs)
    if (reach[arc.from] && coreach[arc.to]) dag.arcs.push_back(arc);
  return dag;
}

WordSegDag BuildWordDagExplicit(const std::string &word,
                                const std::vector<std::vector<int>> &variants,
                                const Vocabulary &vocab) {
  if (variants.empty()) throw InputError("no variants for \"" + word + "\"");
  std::vector<std::vector<int>> unique;
  std::set<std::vector<int>> seen;
  for (const auto &v : variants) {
    if (v.empty()) throw InputError("empty variant for \"" + word + "\"");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < 0 || v[i] >= vocab.Size())
        throw InputError("variant of \"" + word + "\" uses an unknown unit id");
      if (vocab.unit(v[i]).word_end != (i + 1 == v.size()))
        throw InputError("variant \"" + MarkedString(vocab, v) + "\" of \"" + word +
                         "\" misplaces the word-end flag");
    }
    if (Spell(vocab, v) != word)
      throw InputError("variant \"" + MarkedString(vocab, v) + "\" does not spell \"" +
                       word + "\"");
    if (seen.insert(v).second) unique.push_back(v);
  }

  // Trie over all but the last unit; every last unit goes to the shared
  // sink.  Word-end labels only ever appear last, so a trie edge never
  // coincides with a sink edge.
  constexpr int kSinkPlaceholder = -1;
  std::map<std::pair<int, int>, int> child;
  std::vector<LatticeArc> arcs;
  int next_node = 1;
  for (const auto &v : unique) {
    int node = 0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      auto [it, inserted] = child.emplace(std::make_pair(node, v[i]), next_node);
      if (inserted) {
        arcs.push_back({node, next_node, v[i]});
        ++next_node;
      }
      node = it->second;
    }
    arcs.push_back({node, kSinkPlaceholder, v.back()});
  }
  for (LatticeArc &arc : arcs)
    if (arc.to == kSinkPlaceholder) arc.to = next_node;
  SortArcs(arcs);
  WordSegDag dag;
  dag.word = word;
  dag.num_nodes = next_node + 1;
  dag.arcs = std::move(arcs);
  return dag;
}

WordSegDag BuildWordDag(const std::string &word, const SegTable &table) {
  if (table.mode() == SegMode::kImplicitAll) return BuildWordDagImplicit(word, table.vocab());
  std::vector<std::vector<int>> variants;
  if (table.Has(word)) {
    for (const Variant &v : table.VariantsOf(word)) variants.push_back(v.units);
  } else {
    const auto chars = SplitChars(word);
    std::vector<int> units;
    for (std::size_t i = 0; i < chars.size(); ++i)
      units.push_back(table.vocab().IdOf({chars[i], i + 1 == chars.size()}));
    variants.push_back(std::move(units));
  }
  return BuildWordDagExplicit(word, variants, table.vocab());
}

UttLattice ConcatUtterance(const std::vector<WordSegDag> &dags) {
  if (dags.empty()) throw InputError("utterance without words");
  UttLattice lattice;
  lattice.num_nodes = 1;
  for (const WordSegDag &dag : dags) {
    const int offset = lattice.num_nodes - 1;
    lattice.word_boundaries.push_back(offset);
    for (const LatticeArc &arc : dag.arcs)
      lattice.arcs.push_back({arc.from + offset, arc.to + offset, arc.label});
    lattice.num_nodes = offset + dag.num_nodes;
  }
  lattice.word_boundaries.push_back(lattice.num_nodes - 1);
  SortArcs(lattice.arcs);
  return lattice;
}

UttLattice BuildUttLattice(const std::vector<std::string> &words, const SegTable &table) {
  std::vector<WordSegDag> dags;
  dags.reserve(words.size());
  for (const std::string &w : words) dags.push_back(BuildWordDag(w, table));
  return ConcatUtterance(dags);
}

CtcGraph ExpandCtc(const UttLattice &lattice, int num_classes) {
  CtcGraph g;
  g.num_classes_ = num_classes;
  g.blank_ = num_classes - 1;
  const int num_nodes = lattice.num_nodes;
  const int source = lattice.source();
  const int sink = lattice.sink();

  std::vector<char> live(num_nodes, 0);
  live[source] = live[sink] = 1;
  for (const LatticeArc &arc : lattice.arcs) {
    if (arc.label < 0 || arc.label >= g.blank_)
      throw InputError("lattice label outside the class range");
    live[arc.from] = live[arc.to] = 1;
  }

  // States in node order: the node's blank, then one label state per
  // outgoing arc.  Lattice arcs are sorted by source node.
  std::vector<int> blank_state(num_nodes, -1);
  std::vector<int> arc_state(lattice.arcs.size(), -1);
  std::vector<std::vector<int>> arcs_from(num_nodes);
  for (std::size_t a = 0; a < lattice.arcs.size(); ++a)
    arcs_from[lattice.arcs[a].from].push_back(static_cast<int>(a));
  for (int n = 0; n < num_nodes; ++n) {
    if (!live[n]) continue;
    blank_state[n] = static_cast<int>(g.labels_.size());
    g.labels_.push_back(g.blank_);
    for (int a : arcs_from[n]) {
      arc_state[a] = static_cast<int>(g.labels_.size());
      g.labels_.push_back(lattice.arcs[a].label);
    }
  }

  const int num_states = g.NumStates();
  g.succs_.assign(num_states, {});
  g.preds_.assign(num_states, {});
  g.initial_.assign(num_states, 0);
  g.final_.assign(num_states, 0);
  auto connect = [&](int from, int to) {
    g.succs_[from].push_back(to);
    g.preds_[to].push_back(from);
  };
  for (std::size_t a = 0; a < lattice.arcs.size(); ++a) {
    const LatticeArc &arc = lattice.arcs[a];
    const int s = arc_state[a];
    connect(blank_state[arc.from], s);
    connect(s, blank_state[arc.to]);
    for (int next : arcs_from[arc.to]) {
      if (lattice.arcs[next].label != arc.label) connect(s, arc_state[next]);
    }
    if (arc.from == source) g.initial_[s] = 1;
    if (arc.to == sink) g.final_[s] = 1;
  }
  g.initial_[blank_state[source]] = 1;
  g.final_[blank_state[sink]] = 1;
  for (int s = 0; s < num_states; ++s) {
    std::sort(g.succs_[s].begin(), g.succs_[s].end());
    std::sort(g.preds_[s].begin(), g.preds_[s].end());
  }

  // Shortest accepted path, one frame per visited state.
  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<int> dist(num_states, kInf);
  for (int s = 0; s < num_states; ++s) {
    if (g.initial_[s]) dist[s] = 1;
    for (int p : g.preds_[s])
      if (dist[p] != kInf) dist[s] = std::min(dist[s], dist[p] + 1);
  }
  g.min_frames_ = kInf;
  for (int s = 0; s < num_states; ++s)
    if (g.final_[s] && dist[s] != kInf && !g.IsBlank(s))
      g.min_frames_ = std::min(g.min_frames_, dist[s]);
  // A lattice always has at least one label, so a pure-blank path never
  // counts as accepted.
  if (g.min_frames_ == kInf) throw InputError("CTC graph accepts no label path");
  return g;
}

bool CtcGraph::Accepts(const std::vector<int> &frame_labels) const {
  if (frame_labels.empty()) return false;
  std::vector<char> active(NumStates(), 0), next(NumStates(), 0);
  for (int s = 0; s < NumStates(); ++s)
    active[s] = initial_[s] && labels_[s] == frame_labels[0];
  for (std::size_t t = 1; t < frame_labels.size(); ++t) {
    std::fill(next.begin(), next.end(), 0);
    for (int s = 0; s < NumStates(); ++s) {
      if (!active[s]) continue;
      if (labels_[s] == frame_labels[t]) next[s] = 1;
      for (int n : succs_[s])
        if (labels_[n] == frame_labels[t]) next[n] = 1;
    }
    active.swap(next);
  }
  // The all-blank string collapses to nothing and is never accepted.
  bool any_label = false;
  for (int y : frame_labels) any_label |= (y != blank_);
  if (!any_label) return false;
  for (int s = 0; s < NumStates(); ++s)
    if (active[s] && final_[s]) return true;
  return false;
}

PathStats ComputePathStats(const WordSegDag &dag) { return DagStats(dag.num_nodes, dag.arcs); }

PathStats ComputePathStats(const UttLattice &lattice) {
  return DagStats(lattice.num_nodes, lattice.arcs);
}

PathStats ComputePathStats(const CtcGraph &graph) {
  const int n = graph.NumStates();
  std::vector<std::uint64_t> count(n, 0);
  std::vector<int> min_len(n, std::numeric_limits<int>::max());
  std::vector<int> max_len(n, -1);
  PathStats total;
  total.min_label_len = std::numeric_limits<int>::max();
  total.max_label_len = -1;
  // Label states in topological order; a label state is reached from a label
  // predecessor directly or through one blank state.
  for (int s = 0; s < n; ++s) {
    if (graph.IsBlank(s)) continue;
    bool start = graph.IsInitial(s);
    std::set<int> label_preds;
    for (int p : graph.preds(s)) {
      if (!graph.IsBlank(p)) {
        label_preds.insert(p);
        continue;
      }
      if (graph.IsInitial(p)) start = true;
      for (int pp : graph.preds(p))
        if (!graph.IsBlank(pp)) label_preds.insert(pp);
    }
    if (start) {
      count[s] = 1;
      min_len[s] = max_len[s] = 1;
    }
    for (int p : label_preds) {
      if (count[p] == 0) continue;
      count[s] = SaturatingAdd(count[s], count[p]);
      min_len[s] = std::min(min_len[s], min_len[p] + 1);
      max_len[s] = std::max(max_len[s], max_len[p] + 1);
    }
    bool end = graph.IsFinal(s);
    for (int q : graph.succs(s))
      if (graph.IsBlank(q) && graph.IsFinal(q)) end = true;
    if (end && count[s] > 0) {
      total.path_count = SaturatingAdd(total.path_count, count[s]);
      total.min_label_len = std::min(total.min_label_len, min_len[s]);
      total.max_label_len = std::max(total.max_label_len, max_len[s]);
    }
  }
  if (total.path_count == 0) return {};
  return total;
}

std::vector<std::vector<int>> EnumerateLabelSequences(const WordSegDag &dag,
                                                      std::size_t max_paths) {
  return EnumerateSequences(dag.num_nodes, dag.arcs, max_paths);
}

std::vector<std::vector<int>> EnumerateLabelSequences(const UttLattice &lattice,
                                                      std::size_t max_paths) {
  return EnumerateSequences(lattice.num_nodes, lattice.arcs, max_paths);
}

void WriteCtcGraph(std::ostream &os, const CtcGraph &graph, const Vocabulary &vocab) {
  for (int s = 0; s < graph.NumStates(); ++s)
    os << "state " << s << ' ' << vocab.Label(graph.label(s)) << '\n';
  for (int s = 0; s < graph.NumStates(); ++s)
    if (graph.IsInitial(s)) os << "initial " << s << '\n';
  for (int s = 0; s < graph.NumStates(); ++s)
    if (graph.IsFinal(s)) os << "final " << s << '\n';
  for (int s = 0; s < graph.NumStates(); ++s)
    for (int t : graph.succs(s)) os << "arc " << s << ' ' << t << '\n';
}

}  // namespace adsm
