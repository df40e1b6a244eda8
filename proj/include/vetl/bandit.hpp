#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "vetl/dom_context.hpp"

namespace vetl::bandit {

using dom::ElementKey;

class EmptyCandidates : public std::invalid_argument {
 public:
  EmptyCandidates() : std::invalid_argument("EmptyCandidates: no candidate elements to select from") {}
};

/// Session-scoped Q and count tables plus the RNG driving selection.
class BanditTables {
 public:
  explicit BanditTables(double epsilon = 0.3, std::uint64_t rng_seed = 0);

  double q(const ElementKey& key) const;
  std::uint64_t count(const ElementKey& key) const;
  void set(const ElementKey& key, double q, std::uint64_t count);

  double epsilon() const { return epsilon_; }
  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& rng() { return rng_; }
  std::size_t size() const { return q_.size(); }

 private:
  std::map<ElementKey, double> q_;
  std::map<ElementKey, std::uint64_t> count_;
  double epsilon_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

struct SelectionContext {
  std::vector<ElementKey> interested;  // E_I, ordered, distinct
  std::vector<ElementKey> candidates;  // E_C, ordered, distinct
};

enum class Branch { explore, exploit };
std::string_view to_string(Branch branch);

struct Selection {
  ElementKey target;
  Branch branch = Branch::explore;
};

/// Uniform real in [0,1) from the tables' generator.
double uniform01(std::mt19937_64& rng);

/// Softmax over the Q values of `keys`, computed with max subtraction.
std::vector<double> softmax(const std::vector<double>& values);
std::vector<double> exploit_probabilities(const BanditTables& tables, const std::vector<ElementKey>& interested);

Selection select_target(BanditTables& tables, const SelectionContext& ctx);

/// |current \ seen|
int curiosity_reward(const std::set<ElementKey>& seen, const std::set<ElementKey>& current);

/// Incremental mean update of Q(target) and count(target).
void update(BanditTables& tables, const ElementKey& target, int reward);

}  // namespace vetl::bandit
