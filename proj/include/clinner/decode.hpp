// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_DECODE_HPP
#define CLINNER_DECODE_HPP

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "clinner/error.hpp"
#include "clinner/scheme.hpp"

// Linear-chain decoding over a dense score lattice. The path score is
//   e[0][y0] + sum_{t>0} (trans[y(t-1)][yt] + e[t][yt])
// accumulated left to right in exactly that order. Transitions that would
// break IOB2 are masked out, so every decoded path is a valid sequence.
namespace clinner {

/// IOB2 admissibility for a tag inventory: `start[y]` and `allowed[p * n + y]`.
struct TransitionMask {
  std::size_t n_tags = 0;
  std::vector<char> start;
  std::vector<char> allowed;

  explicit TransitionMask(const std::vector<std::string>& tag_list) : n_tags(tag_list.size()) {
    std::vector<std::optional<ParsedTag>> parsed;
    parsed.reserve(n_tags);
    for (const auto& tag : tag_list) {
      auto p = parse_tag(tag);
      if (!p) throw Error(ErrorKind::InvalidModel, "malformed tag '" + tag + "' in tag list");
      parsed.push_back(p);
    }
    start.assign(n_tags, 1);
    allowed.assign(n_tags * n_tags, 1);
    for (std::size_t y = 0; y < n_tags; ++y) {
      if (parsed[y]->prefix != TagPrefix::Inside) continue;
      start[y] = 0;
      for (std::size_t p = 0; p < n_tags; ++p) {
        bool ok = parsed[p]->prefix != TagPrefix::Outside && parsed[p]->label == parsed[y]->label;
        allowed[p * n_tags + y] = ok ? 1 : 0;
      }
    }
    if (std::none_of(start.begin(), start.end(), [](char c) { return c != 0; })) {
      throw Error(ErrorKind::InvalidModel, "tag list has no tag that can start a sequence");
    }
  }

  bool can_start(std::size_t y) const { return start[y] != 0; }
  bool can_follow(std::size_t prev, std::size_t next) const { return allowed[prev * n_tags + next] != 0; }
};

struct ScoreLattice {
  std::size_t length = 0;
  std::size_t n_tags = 0;
  std::vector<double> emissions;    // length x n_tags
  std::vector<double> transitions;  // n_tags x n_tags, [prev][next]

  double emission(std::size_t t, std::size_t y) const { return emissions[t * n_tags + y]; }
  double transition(std::size_t p, std::size_t y) const { return transitions[p * n_tags + y]; }
};

struct DecodedPath {
  std::vector<std::size_t> tags;
  double score = 0.0;
};

/// Best path. Ties go to the lower tag index: first at the final position,
/// then at each backpointer.
inline DecodedPath viterbi(const ScoreLattice& lattice, const TransitionMask& mask) {
  const std::size_t len = lattice.length;
  const std::size_t n = lattice.n_tags;
  if (len == 0) throw Error(ErrorKind::EmptySentence, "cannot decode an empty sentence");
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  constexpr std::size_t kNoPrev = std::numeric_limits<std::size_t>::max();

  std::vector<double> delta(len * n, kNone);
  std::vector<std::size_t> back(len * n, kNoPrev);
  std::vector<char> reachable(len * n, 0);
  for (std::size_t y = 0; y < n; ++y) {
    if (!mask.can_start(y)) continue;
    delta[y] = lattice.emission(0, y);
    reachable[y] = 1;
  }
  for (std::size_t t = 1; t < len; ++t) {
    for (std::size_t y = 0; y < n; ++y) {
      bool found = false;
      double best = 0.0;
      std::size_t arg = kNoPrev;
      for (std::size_t p = 0; p < n; ++p) {
        if (!reachable[(t - 1) * n + p] || !mask.can_follow(p, y)) continue;
        double s = delta[(t - 1) * n + p] + lattice.transition(p, y);
        s += lattice.emission(t, y);
        if (!found || s > best) {
          found = true;
          best = s;
          arg = p;
        }
      }
      if (found) {
        delta[t * n + y] = best;
        back[t * n + y] = arg;
        reachable[t * n + y] = 1;
      }
    }
  }
  bool found = false;
  std::size_t last = 0;
  for (std::size_t y = 0; y < n; ++y) {
    if (!reachable[(len - 1) * n + y]) continue;
    if (!found || delta[(len - 1) * n + y] > delta[(len - 1) * n + last]) {
      found = true;
      last = y;
    }
  }
  DecodedPath path;
  path.score = delta[(len - 1) * n + last];
  path.tags.assign(len, 0);
  path.tags[len - 1] = last;
  for (std::size_t t = len - 1; t > 0; --t) path.tags[t - 1] = back[t * n + path.tags[t]];
  return path;
}

/// Top-k distinct paths by score, best first. Each lattice cell keeps its k
/// best partial paths ordered by (score desc, prev tag asc, prev rank asc),
/// so k = 1 reproduces `viterbi` exactly, tie-breaks included.
inline std::vector<DecodedPath> kbest(const ScoreLattice& lattice, const TransitionMask& mask, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  const std::size_t len = lattice.length;
  const std::size_t n = lattice.n_tags;
  if (len == 0) throw Error(ErrorKind::EmptySentence, "cannot decode an empty sentence");

  struct Hyp {
    double score;
    std::size_t prev;
    std::size_t rank;
  };
  auto better = [](const Hyp& a, const Hyp& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.prev != b.prev) return a.prev < b.prev;
    return a.rank < b.rank;
  };
  std::vector<std::vector<Hyp>> cells(len * n);
  for (std::size_t y = 0; y < n; ++y) {
    if (mask.can_start(y)) cells[y].push_back({lattice.emission(0, y), 0, 0});
  }
  std::vector<Hyp> pool;
  for (std::size_t t = 1; t < len; ++t) {
    for (std::size_t y = 0; y < n; ++y) {
      pool.clear();
      for (std::size_t p = 0; p < n; ++p) {
        if (!mask.can_follow(p, y)) continue;
        const auto& prev_cell = cells[(t - 1) * n + p];
        for (std::size_t r = 0; r < prev_cell.size(); ++r) {
          double s = prev_cell[r].score + lattice.transition(p, y);
          s += lattice.emission(t, y);
          pool.push_back({s, p, r});
        }
      }
      std::sort(pool.begin(), pool.end(), better);
      if (pool.size() > k) pool.resize(k);
      cells[t * n + y] = pool;
    }
  }
  // Final ranking reuses Hyp with prev = final tag and rank = its cell rank.
  pool.clear();
  for (std::size_t y = 0; y < n; ++y) {
    const auto& cell = cells[(len - 1) * n + y];
    for (std::size_t r = 0; r < cell.size(); ++r) pool.push_back({cell[r].score, y, r});
  }
  std::sort(pool.begin(), pool.end(), better);
  if (pool.size() > k) pool.resize(k);

  std::vector<DecodedPath> out;
  out.reserve(pool.size());
  for (const auto& fin : pool) {
    DecodedPath path;
    path.score = fin.score;
    path.tags.assign(len, 0);
    std::size_t y = fin.prev;
    std::size_t r = fin.rank;
    for (std::size_t t = len; t-- > 0;) {
      path.tags[t] = y;
      const Hyp& h = cells[t * n + y][r];
      y = h.prev;
      r = h.rank;
    }
    out.push_back(std::move(path));
  }
  return out;
}

}  // namespace clinner

#endif  // CLINNER_DECODE_HPP
