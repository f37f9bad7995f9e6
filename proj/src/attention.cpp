// SPDX-License-Identifier: Apache-2.0

#include "multiring/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "multiring/errors.hpp"
#include "multiring/rng.hpp"

namespace multiring {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::int64_t> expand(const std::vector<TokenRange>& ranges) {
  std::vector<std::int64_t> out;
  for (const TokenRange& r : ranges) {
    for (std::int64_t t = r.start; t < r.end; ++t) out.push_back(t);
  }
  return out;
}

double dot_qk(const float* a, const float* b, int d) {
  double acc = 0.0;
  for (int i = 0; i < d; ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

}  // namespace

AttnTensors AttnTensors::random(std::int64_t S, int H, int Dh, std::uint64_t seed,
                                int batch_index) {
  AttnTensors t;
  t.S = S;
  t.H = H;
  t.Dh = Dh;
  const std::size_t count = static_cast<std::size_t>(S) * H * Dh;
  t.q.resize(count);
  t.k.resize(count);
  t.v.resize(count);
  const std::uint64_t base = static_cast<std::uint64_t>(batch_index) * 3;
  for (std::size_t i = 0; i < count; ++i) {
    t.q[i] = rng_uniform_sym(seed, base + 0, i);
    t.k[i] = rng_uniform_sym(seed, base + 1, i);
    t.v[i] = rng_uniform_sym(seed, base + 2, i);
  }
  return t;
}

PartialOut PartialOut::empty(std::int64_t rows, int H, int Dh) {
  PartialOut p;
  p.rows = rows;
  p.H = H;
  p.Dh = Dh;
  p.out.assign(static_cast<std::size_t>(rows) * H * Dh, 0.0);
  p.lse.assign(static_cast<std::size_t>(rows) * H, kNegInf);
  return p;
}

std::vector<float> reference_attention(const AttnTensors& t, MaskKind mask) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(t.Dh));
  std::vector<float> out(static_cast<std::size_t>(t.S) * t.H * t.Dh, 0.0f);
  std::vector<double> logits(t.S);
  for (std::int64_t s = 0; s < t.S; ++s) {
    const std::int64_t keys = mask == MaskKind::causal ? s + 1 : t.S;
    for (int h = 0; h < t.H; ++h) {
      double row_max = kNegInf;
      for (std::int64_t k = 0; k < keys; ++k) {
        logits[k] = dot_qk(t.q_at(s, h), t.k_at(k, h), t.Dh) * scale;
        row_max = std::max(row_max, logits[k]);
      }
      double denom = 0.0;
      for (std::int64_t k = 0; k < keys; ++k) {
        logits[k] = std::exp(logits[k] - row_max);
        denom += logits[k];
      }
      for (int d = 0; d < t.Dh; ++d) {
        double acc = 0.0;
        for (std::int64_t k = 0; k < keys; ++k) {
          acc += logits[k] * t.v_at(k, h)[d];
        }
        out[(s * t.H + h) * t.Dh + d] = static_cast<float>(acc / denom);
      }
    }
  }
  return out;
}

PartialOut block_attention(const AttnTensors& t,
                           const std::vector<std::int64_t>& q_tokens,
                           const std::vector<std::int64_t>& k_tokens,
                           MaskKind mask) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(t.Dh));
  PartialOut p = PartialOut::empty(static_cast<std::int64_t>(q_tokens.size()), t.H, t.Dh);
  std::vector<double> logits(k_tokens.size());
  for (std::size_t qi = 0; qi < q_tokens.size(); ++qi) {
    const std::int64_t qs = q_tokens[qi];
    for (int h = 0; h < t.H; ++h) {
      double row_max = kNegInf;
      std::size_t admitted = 0;
      for (std::size_t ki = 0; ki < k_tokens.size(); ++ki) {
        if (mask == MaskKind::causal && k_tokens[ki] > qs) {
          logits[ki] = kNegInf;
          continue;
        }
        logits[ki] = dot_qk(t.q_at(qs, h), t.k_at(k_tokens[ki], h), t.Dh) * scale;
        row_max = std::max(row_max, logits[ki]);
        ++admitted;
      }
      double* out_row = &p.out[(qi * t.H + h) * t.Dh];
      if (admitted == 0) continue;  // lse stays -inf, out stays 0
      double denom = 0.0;
      for (std::size_t ki = 0; ki < k_tokens.size(); ++ki) {
        if (logits[ki] == kNegInf) {
          logits[ki] = 0.0;
          continue;
        }
        logits[ki] = std::exp(logits[ki] - row_max);
        denom += logits[ki];
      }
      for (std::size_t ki = 0; ki < k_tokens.size(); ++ki) {
        if (logits[ki] == 0.0) continue;
        const double w = logits[ki] / denom;
        const float* vrow = t.v_at(k_tokens[ki], h);
        for (int d = 0; d < t.Dh; ++d) out_row[d] += w * vrow[d];
      }
      p.lse[qi * t.H + h] = row_max + std::log(denom);
    }
  }
  return p;
}

PartialOut merge_lse(const PartialOut& a, const PartialOut& b) {
  if (a.rows != b.rows || a.H != b.H || a.Dh != b.Dh) {
    throw ConfigError("merge_lse shape mismatch");
  }
  PartialOut m = PartialOut::empty(a.rows, a.H, a.Dh);
  for (std::int64_t r = 0; r < a.rows; ++r) {
    for (int h = 0; h < a.H; ++h) {
      const std::size_t li = r * a.H + h;
      const double la = a.lse[li];
      const double lb = b.lse[li];
      const double* oa = &a.out[li * a.Dh];
      const double* ob = &b.out[li * a.Dh];
      double* om = &m.out[li * a.Dh];
      if (la == kNegInf && lb == kNegInf) continue;
      const double top = std::max(la, lb);
      const double ea = std::exp(la - top);
      const double eb = std::exp(lb - top);
      const double lm = top + std::log(ea + eb);
      m.lse[li] = lm;
      const double wa = ea / (ea + eb);
      const double wb = eb / (ea + eb);
      for (int d = 0; d < a.Dh; ++d) om[d] = wa * oa[d] + wb * ob[d];
    }
  }
  return m;
}

std::vector<float> exec_schedule(const Schedule& s, const Placement& p,
                                 const AttnTensors& t, MaskKind mask) {
  if (p.seqlen() != t.S) throw ConfigError("tensor seqlen does not match placement");
  if (p.n() != s.n) throw ConfigError("placement rank count mismatch");

  const int n = s.n;
  std::vector<std::vector<std::int64_t>> q_tokens(n);
  std::vector<PartialOut> acc;
  acc.reserve(n);
  const Placement q_place = q_placement_for(p);
  for (int r = 0; r < n; ++r) {
    q_tokens[r] = expand(q_place.rank_ranges(r));
    acc.push_back(PartialOut::empty(static_cast<std::int64_t>(q_tokens[r].size()),
                                    t.H, t.Dh));
  }

  // Replayed chunk locations; the stored compute sets must agree with them.
  std::map<ChunkId, int> location;
  for (int ring = 0; ring < s.num_rings; ++ring) {
    for (int origin = 0; origin < n; ++origin) {
      for (int half = 0; half < p.num_halves(); ++half) {
        location[ChunkId{ring, origin, half}] = origin;
      }
    }
  }

  const std::size_t chunks_per_rank =
      static_cast<std::size_t>(s.num_rings) * p.num_halves();
  for (int k = 0; k < s.num_iterations(); ++k) {
    const IterationPlan& it = s.iterations[k];
    for (int r = 0; r < n; ++r) {
      if (it.resident[r].size() != chunks_per_rank) {
        throw ScheduleIntegrityError(
            "iteration " + std::to_string(k) + ": rank " + std::to_string(r) +
            " lists " + std::to_string(it.resident[r].size()) + " chunks, want " +
            std::to_string(chunks_per_rank));
      }
      std::set<ChunkId> seen;
      std::vector<TokenRange> kv_ranges;
      for (const ChunkId& c : it.resident[r]) {
        auto loc = location.find(c);
        if (loc == location.end() || loc->second != r || !seen.insert(c).second) {
          throw ScheduleIntegrityError(
              "iteration " + std::to_string(k) + ": rank " + std::to_string(r) +
              " computes against a non-resident chunk (ring " +
              std::to_string(c.ring) + ", origin " + std::to_string(c.origin) + ")");
        }
        const auto& ranges = p.ranges(c.origin, c.ring, c.half);
        kv_ranges.insert(kv_ranges.end(), ranges.begin(), ranges.end());
      }
      const PartialOut block =
          block_attention(t, q_tokens[r], expand(kv_ranges), mask);
      acc[r] = merge_lse(acc[r], block);
    }
    for (const Transfer& tr : it.transfers) {
      auto loc = location.find(tr.chunk);
      if (loc == location.end() || loc->second != tr.src) {
        throw ScheduleIntegrityError("transfer at iteration " + std::to_string(k) +
                                     " sends a chunk from rank " +
                                     std::to_string(tr.src) +
                                     " that does not hold it");
      }
      loc->second = tr.dst;
    }
  }

  std::vector<float> out(static_cast<std::size_t>(t.S) * t.H * t.Dh, 0.0f);
  for (int r = 0; r < n; ++r) {
    for (std::size_t qi = 0; qi < q_tokens[r].size(); ++qi) {
      const std::int64_t tok = q_tokens[r][qi];
      for (int h = 0; h < t.H; ++h) {
        if (acc[r].lse[qi * t.H + h] == kNegInf) {
          throw Error("query token " + std::to_string(tok) +
                      " attended no key; invalid placement/mask combination");
        }
        for (int d = 0; d < t.Dh; ++d) {
          out[(tok * t.H + h) * t.Dh + d] =
              static_cast<float>(acc[r].out[(qi * t.H + h) * t.Dh + d]);
        }
      }
    }
  }
  return out;
}

bool PairCounts::balanced_at(int iteration) const {
  const auto& row = pairs[iteration];
  for (const std::uint64_t v : row) {
    if (v != row[0]) return false;
  }
  return true;
}

bool PairCounts::balanced() const {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!balanced_at(static_cast<int>(i))) return false;
  }
  return true;
}

std::uint64_t PairCounts::total() const {
  std::uint64_t sum = 0;
  for (const auto& row : pairs) {
    for (const std::uint64_t v : row) sum += v;
  }
  return sum;
}

std::uint64_t admitted_pairs(const TokenRange& q, const TokenRange& k, MaskKind mask) {
  if (mask == MaskKind::full) {
    return static_cast<std::uint64_t>(q.tokens()) * static_cast<std::uint64_t>(k.tokens());
  }
  // causal: #{(s, u) : s in q, u in k, s >= u}. For s in the overlap the key
  // count ramps as s+1-k.start; past k.end every key is admitted.
  std::uint64_t total = 0;
  const std::int64_t a = std::max(q.start, k.start);
  const std::int64_t b = std::min(q.end, k.end);
  if (a < b) {
    total += static_cast<std::uint64_t>((b - a) * (a + b + 1) / 2 - (b - a) * k.start);
  }
  const std::int64_t c = std::max(q.start, k.end);
  if (c < q.end) {
    total += static_cast<std::uint64_t>((q.end - c) * k.tokens());
  }
  return total;
}

PairCounts count_flops(const Schedule& s, const Placement& p, MaskKind mask) {
  PairCounts counts;
  counts.n = s.n;
  counts.pairs.assign(s.num_iterations(), std::vector<std::uint64_t>(s.n, 0));
  const Placement q_place = q_placement_for(p);
  for (int k = 0; k < s.num_iterations(); ++k) {
    for (int r = 0; r < s.n; ++r) {
      std::uint64_t total = 0;
      for (const ChunkId& c : s.iterations[k].resident[r]) {
        for (const TokenRange& kr : p.ranges(c.origin, c.ring, c.half)) {
          for (const TokenRange& qr : q_place.rank_ranges(r)) {
            total += admitted_pairs(qr, kr, mask);
          }
        }
      }
      counts.pairs[k][r] = total;
    }
  }
  return counts;
}

double max_relative_error(const std::vector<float>& a, const std::vector<float>& b,
                          double floor) {
  if (a.size() != b.size()) throw ConfigError("max_relative_error size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max(std::abs(static_cast<double>(b[i])), floor);
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) - b[i]) / denom);
  }
  return worst;
}

MaskKind mask_from_string(const std::string& s) {
  if (s == "full") return MaskKind::full;
  if (s == "causal") return MaskKind::causal;
  throw ConfigError("unknown mask: " + s + " (expected full|causal)");
}

std::string to_string(MaskKind m) { return m == MaskKind::full ? "full" : "causal"; }

}  // namespace multiring
