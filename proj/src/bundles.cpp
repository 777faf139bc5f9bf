#include "xrate/bundles.hpp"

namespace xrate {

Measure bundled_markov() {
  Transition t;
  t[0] = {make_rational(9, 10), make_rational(1, 10)};
  t[1] = {make_rational(1, 2), make_rational(1, 2)};
  return Measure::markov(t);
}

Measure bundled_step2() {
  return Measure::step_bernoulli(2, {make_rational(1, 8), make_rational(3, 8), make_rational(1, 4), make_rational(1, 4)});
}

std::vector<NamedMeasure> bundled_measures() {
  return {
      {"lebesgue", Measure::lebesgue()},
      {"bernoulli-1/4", Measure::bernoulli(make_rational(1, 4))},
      {"bernoulli-3/10", Measure::bernoulli(make_rational(3, 10))},
      {"markov", bundled_markov()},
      {"step2", bundled_step2()},
  };
}

DdgTree bundled_three_leaf_tree() {
  return make_ddg({{BitString{0}, "a"}, {BitString{1, 0}, "b"}, {BitString{1, 1}, "c"}});
}

std::vector<NamedTree> bundled_trees() {
  return {
      {"coin", make_ddg({{BitString{0}, "0"}, {BitString{1}, "1"}})},
      {"half-quarter-quarter", bundled_three_leaf_tree()},
      {"ky-2/3-1/3", knuth_yao({make_rational(2, 3), make_rational(1, 3)})},
  };
}

std::vector<MeasurePair> bundled_pairs() {
  const Measure lambda = Measure::lebesgue();
  const Measure b14 = Measure::bernoulli(make_rational(1, 4));
  return {
      {"bernoulli-1/4->lebesgue", b14, lambda},
      {"lebesgue->bernoulli-1/4", lambda, b14},
      {"markov->lebesgue", bundled_markov(), lambda},
  };
}

}  // namespace xrate
