#pragma once

#include <string>
#include <utility>
#include <vector>

#include "xrate/ddg.hpp"
#include "xrate/measures.hpp"

namespace xrate {

/// Markov chain with P(0|0)=9/10, P(1|0)=1/10, P(0|1)=P(1|1)=1/2.
Measure bundled_markov();
/// 2-step Bernoulli with block masses 00:1/8, 01:3/8, 10:1/4, 11:1/4.
Measure bundled_step2();

struct NamedMeasure {
  std::string name;
  Measure measure;
};

/// lebesgue, bernoulli:1/4, bernoulli:3/10, the Markov chain, the 2-step measure.
std::vector<NamedMeasure> bundled_measures();

struct NamedTree {
  std::string name;
  DdgTree tree;
};

/// {0,1} fair coin, the (1/2,1/4,1/4) tree {0,10,11}, and Knuth–Yao (2/3,1/3).
std::vector<NamedTree> bundled_trees();
/// The finite (1/2,1/4,1/4) tree.
DdgTree bundled_three_leaf_tree();

struct MeasurePair {
  std::string name;
  Measure from;
  Measure to;
};

/// Bernoulli(1/4)→λ, λ→Bernoulli(1/4), Markov→λ.
std::vector<MeasurePair> bundled_pairs();

}  // namespace xrate
