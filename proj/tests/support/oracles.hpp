#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fsre::testing {

// Counts the three micro-F1 quantities one instance at a time.
struct Tally {
  std::size_t correct = 0;
  std::size_t predicted_positive = 0;
  std::size_t gold_positive = 0;

  double precision() const;
  double recall() const;
  double f1() const;
};

Tally brute_force_tally(const std::vector<std::string>& gold, const std::vector<std::string>& predicted,
                        const std::optional<std::string>& na_label);

// Multinomial naive Bayes over explicit feature lists, computed from raw
// counts with no shared code from the library.
struct HandExample {
  std::string label;
  std::vector<std::string> features;
};

std::map<std::string, double> hand_nb_posterior(const std::vector<HandExample>& train,
                                                const std::vector<std::string>& query, double alpha);

}  // namespace fsre::testing
