#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "decaylab/rng.hpp"

namespace decaylab {

// Two non-increasing, non-negative sequences of equal length.
struct SequencePair {
  std::vector<mpq_class> a;
  std::vector<mpq_class> b;

  std::size_t size() const { return a.size(); }
  // Throws PreconditionError unless both are non-increasing, non-negative and
  // of equal length.
  void validate() const;
  // Exact rational images of the given doubles.
  static SequencePair from_doubles(const std::vector<double>& a, const std::vector<double>& b);
};

// sum_{j>=i} b_j >= sum_{j>=i} a_j for every i, in exact arithmetic.
bool check_tail_dominance(const SequencePair& pair);

struct MapEntry {
  std::vector<std::size_t> perm;  // perm[i] = pi(i), 0-based
  mpq_class weight;
};

// Convex combination of permutations, alpha : S_n -> Q_{>0}.
struct AveragingMap {
  std::size_t n = 0;
  std::vector<MapEntry> entries;

  mpq_class total() const;
  // (sum_pi alpha(pi) a_{pi(i)})_i
  std::vector<mpq_class> average(const std::vector<mpq_class>& a) const;
  // weights positive and summing to 1, permutations bijective, and
  // b_i >= average(a)_i for all i, all exact
  bool verify(const SequencePair& pair) const;
  // one entry per line: weight as a fraction, then the permutation in
  // one-line notation (1-based)
  std::string to_text() const;
};

struct MajorizeOptions {
  std::size_t max_n = 12;
};

// Recursive construction: map the tail (indices 2..n) by induction, then fix
// the first entry with transpositions (1 i) weighted q_i / (a_1 - a_i), q_i
// filled greedily from i = 2. Throws PreconditionError when dominance fails or
// n exceeds the cap; the result is verified before it is returned.
AveragingMap build_averaging_map(const SequencePair& pair, const MajorizeOptions& opt = {});

struct JensenCertificate {
  double sum_b = 0.0;        // sum c(b_i)
  double sum_average = 0.0;  // sum c(average_i)
  double sum_a = 0.0;        // sum c(a_i)
  double slack = 0.0;
  bool holds = false;        // sum_b >= sum_average >= sum_a up to slack
};

// c must be concave and non-decreasing on [0, inf); sqrt by default.
JensenCertificate jensen_sqrt_certificate(const SequencePair& pair, const AveragingMap& map,
                                          const std::function<double(double)>& c = {});

struct RandomPairOptions {
  std::size_t min_n = 1;
  std::size_t max_n = 8;
  unsigned max_numerator = 20;
  unsigned max_denominator = 12;
  std::size_t moves = 6;  // random transfers / additions applied to b = a
};

// a random, then b obtained from a by order-preserving transfers of mass from
// earlier to later entries and by increases; the result always satisfies tail
// dominance.
SequencePair random_dominated_pair(CounterRng& rng, const RandomPairOptions& opt = {});

}  // namespace decaylab
