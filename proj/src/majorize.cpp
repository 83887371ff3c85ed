#include "decaylab/majorize.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "decaylab/error.hpp"

namespace decaylab {

namespace {

bool non_increasing_nonneg(const std::vector<mpq_class>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (sgn(v[i]) < 0) return false;
    if (i > 0 && v[i] > v[i - 1]) return false;
  }
  return true;
}

std::vector<std::size_t> identity(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

// direct case: a_0 is the largest entry of a and b_i >= a_i for i >= 1
AveragingMap first_entry_fix(const std::vector<mpq_class>& a, const std::vector<mpq_class>& b) {
  const std::size_t n = a.size();
  AveragingMap m;
  m.n = n;
  if (b[0] >= a[0]) {
    m.entries.push_back({identity(n), mpq_class(1)});
    return m;
  }
  mpq_class deficit = a[0] - b[0];
  mpq_class rest(1);
  for (std::size_t i = 1; i < n && sgn(deficit) > 0; ++i) {
    const mpq_class cap = b[i] - a[i];
    const mpq_class q = cap < deficit ? cap : deficit;
    if (sgn(q) <= 0) continue;
    deficit -= q;
    mpq_class w = q / (a[0] - a[i]);
    auto p = identity(n);
    std::swap(p[0], p[i]);
    rest -= w;
    m.entries.push_back({std::move(p), std::move(w)});
  }
  if (sgn(deficit) != 0) throw PreconditionError("majorize: tail dominance violated");
  if (sgn(rest) > 0) m.entries.insert(m.entries.begin(), MapEntry{identity(n), rest});
  return m;
}

AveragingMap build(const std::vector<mpq_class>& a, const std::vector<mpq_class>& b) {
  const std::size_t n = a.size();
  if (n == 1) return AveragingMap{1, {{{0}, mpq_class(1)}}};
  const std::vector<mpq_class> ta(a.begin() + 1, a.end()), tb(b.begin() + 1, b.end());
  const AveragingMap gamma_tail = build(ta, tb);
  // lift to S_n fixing index 0
  std::vector<MapEntry> gamma;
  for (const auto& e : gamma_tail.entries) {
    std::vector<std::size_t> p(n);
    p[0] = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) p[i + 1] = e.perm[i] + 1;
    gamma.push_back({std::move(p), e.weight});
  }
  std::vector<mpq_class> at(n, mpq_class(0));
  for (const auto& e : gamma)
    for (std::size_t i = 0; i < n; ++i) at[i] += e.weight * a[e.perm[i]];
  const AveragingMap beta = first_entry_fix(at, b);
  // alpha(rho) with rho = pi o sigma, weight beta(sigma) gamma(pi)
  std::map<std::vector<std::size_t>, mpq_class> acc;
  for (const auto& s : beta.entries)
    for (const auto& g : gamma) {
      std::vector<std::size_t> rho(n);
      for (std::size_t i = 0; i < n; ++i) rho[i] = g.perm[s.perm[i]];
      acc[rho] += s.weight * g.weight;
    }
  AveragingMap m;
  m.n = n;
  for (auto& [p, w] : acc)
    if (sgn(w) != 0) m.entries.push_back({p, w});
  return m;
}

}  // namespace

void SequencePair::validate() const {
  if (a.size() != b.size()) throw PreconditionError("majorize: sequences differ in length");
  if (a.empty()) throw PreconditionError("majorize: empty sequences");
  if (!non_increasing_nonneg(a)) throw PreconditionError("majorize: a is not non-increasing and non-negative");
  if (!non_increasing_nonneg(b)) throw PreconditionError("majorize: b is not non-increasing and non-negative");
}

SequencePair SequencePair::from_doubles(const std::vector<double>& a, const std::vector<double>& b) {
  SequencePair p;
  for (double x : a) {
    if (!std::isfinite(x)) throw PreconditionError("majorize: non-finite entry");
    p.a.emplace_back(x);
  }
  for (double x : b) {
    if (!std::isfinite(x)) throw PreconditionError("majorize: non-finite entry");
    p.b.emplace_back(x);
  }
  return p;
}

bool check_tail_dominance(const SequencePair& pair) {
  pair.validate();
  mpq_class sa(0), sb(0);
  for (std::size_t i = pair.size(); i-- > 0;) {
    sa += pair.a[i];
    sb += pair.b[i];
    if (sb < sa) return false;
  }
  return true;
}

mpq_class AveragingMap::total() const {
  mpq_class s(0);
  for (const auto& e : entries) s += e.weight;
  return s;
}

std::vector<mpq_class> AveragingMap::average(const std::vector<mpq_class>& a) const {
  if (a.size() != n) throw PreconditionError("averaging map: wrong sequence length");
  std::vector<mpq_class> out(n, mpq_class(0));
  for (const auto& e : entries)
    for (std::size_t i = 0; i < n; ++i) out[i] += e.weight * a[e.perm[i]];
  return out;
}

bool AveragingMap::verify(const SequencePair& pair) const {
  if (pair.size() != n || total() != 1) return false;
  for (const auto& e : entries) {
    if (sgn(e.weight) <= 0 || e.perm.size() != n) return false;
    std::vector<char> seen(n, 0);
    for (std::size_t v : e.perm) {
      if (v >= n || seen[v]) return false;
      seen[v] = 1;
    }
  }
  const auto avg = average(pair.a);
  for (std::size_t i = 0; i < n; ++i)
    if (pair.b[i] < avg[i]) return false;
  return true;
}

std::string AveragingMap::to_text() const {
  std::string s = fmt::format("# averaging map n={} entries={}\n", n, entries.size());
  for (const auto& e : entries) {
    s += e.weight.get_str();
    for (std::size_t v : e.perm) s += fmt::format(" {}", v + 1);
    s += '\n';
  }
  return s;
}

AveragingMap build_averaging_map(const SequencePair& pair, const MajorizeOptions& opt) {
  pair.validate();
  if (pair.size() > opt.max_n)
    throw PreconditionError(fmt::format("majorize: n = {} exceeds the cap {}", pair.size(), opt.max_n));
  if (!check_tail_dominance(pair)) throw PreconditionError("majorize: tail dominance violated");
  AveragingMap m = build(pair.a, pair.b);
  if (!m.verify(pair)) throw NumericalError("majorize: constructed map failed exact verification");
  return m;
}

JensenCertificate jensen_sqrt_certificate(const SequencePair& pair, const AveragingMap& map,
                                          const std::function<double(double)>& c) {
  if (!map.verify(pair)) throw PreconditionError("jensen certificate: map does not verify against the pair");
  auto f = [&](double x) { return c ? c(x) : std::sqrt(x); };
  JensenCertificate cert;
  const auto avg = map.average(pair.a);
  for (std::size_t i = 0; i < pair.size(); ++i) {
    cert.sum_b += f(pair.b[i].get_d());
    cert.sum_average += f(avg[i].get_d());
    cert.sum_a += f(pair.a[i].get_d());
  }
  // rounding of get_d and of the n-term sums
  cert.slack = 4.0 * double(pair.size() + 1) * 2.220446049250313e-16 *
               std::max({1.0, std::abs(cert.sum_b), std::abs(cert.sum_a)});
  cert.holds = cert.sum_b >= cert.sum_average - cert.slack && cert.sum_average >= cert.sum_a - cert.slack;
  return cert;
}

SequencePair random_dominated_pair(CounterRng& rng, const RandomPairOptions& opt) {
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return lo + rng.next_u64() % (hi - lo + 1); };
  const std::size_t n = pick(opt.min_n, opt.max_n);
  const auto d = long(pick(1, opt.max_denominator));
  std::vector<long> k(n);
  for (auto& v : k) v = long(pick(0, opt.max_numerator));
  std::sort(k.rbegin(), k.rend());
  SequencePair p;
  for (long v : k) p.a.push_back(mpq_class(v, d));
  for (auto& v : p.a) v.canonicalize();
  p.b = p.a;
  auto& b = p.b;
  for (std::size_t m = 0; m < opt.moves; ++m) {
    mpq_class frac(long(pick(1, 4)), 4);
    frac.canonicalize();
    if (n >= 2 && pick(0, 2) != 0) {
      std::size_t i = pick(0, n - 2), j = pick(i + 1, n - 1);
      mpq_class cap = j == i + 1 ? mpq_class((b[i] - b[j]) / 2) : mpq_class(b[i] - b[i + 1]);
      if (j > i + 1) {
        const mpq_class c2 = b[j - 1] - b[j];
        if (c2 < cap) cap = c2;
      }
      if (sgn(cap) <= 0) continue;
      const mpq_class t = cap * frac;
      b[i] -= t;
      b[j] += t;
    } else {
      const std::size_t i = pick(0, n - 1);
      const mpq_class cap = i == 0 ? mpq_class(1) : mpq_class(b[i - 1] - b[i]);
      b[i] += cap * frac;
    }
  }
  return p;
}

}  // namespace decaylab
