#include "vetl/bandit.hpp"

#include <algorithm>
#include <cmath>

namespace vetl::bandit {

BanditTables::BanditTables(double epsilon, std::uint64_t rng_seed)
    : epsilon_(epsilon), seed_(rng_seed), rng_(rng_seed) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0,1]");
}

double BanditTables::q(const ElementKey& key) const {
  auto it = q_.find(key);
  return it == q_.end() ? 0.0 : it->second;
}

std::uint64_t BanditTables::count(const ElementKey& key) const {
  auto it = count_.find(key);
  return it == count_.end() ? 0 : it->second;
}

void BanditTables::set(const ElementKey& key, double q, std::uint64_t count) {
  q_[key] = q;
  count_[key] = count;
}

std::string_view to_string(Branch branch) { return branch == Branch::explore ? "explore" : "exploit"; }

double uniform01(std::mt19937_64& rng) {
  // 53 random bits, so the result never rounds up to 1
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace {
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}
}  // namespace

std::vector<double> softmax(const std::vector<double>& values) {
  if (values.empty()) return {};
  double peak = *std::max_element(values.begin(), values.end());
  std::vector<double> out;
  double total = 0;
  for (double v : values) {
    out.push_back(std::exp(v - peak));
    total += out.back();
  }
  for (double& p : out) p /= total;
  return out;
}

std::vector<double> exploit_probabilities(const BanditTables& tables, const std::vector<ElementKey>& interested) {
  std::vector<double> qs;
  for (const auto& k : interested) qs.push_back(tables.q(k));
  return softmax(qs);
}

Selection select_target(BanditTables& tables, const SelectionContext& ctx) {
  if (ctx.candidates.empty()) throw EmptyCandidates();
  auto& rng = tables.rng();
  double draw = uniform01(rng);
  if (draw < tables.epsilon() || ctx.interested.empty()) {
    return {ctx.candidates[uniform_index(rng, ctx.candidates.size())], Branch::explore};
  }
  auto probs = exploit_probabilities(tables, ctx.interested);
  double u = uniform01(rng);
  double acc = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return {ctx.interested[i], Branch::exploit};
  }
  return {ctx.interested.back(), Branch::exploit};
}

int curiosity_reward(const std::set<ElementKey>& seen, const std::set<ElementKey>& current) {
  int fresh = 0;
  for (const auto& k : current) fresh += seen.contains(k) ? 0 : 1;
  return fresh;
}

void update(BanditTables& tables, const ElementKey& target, int reward) {
  if (reward < 0) throw std::invalid_argument("reward must be non-negative");
  double q = tables.q(target);
  auto n = tables.count(target);
  tables.set(target, (q * static_cast<double>(n) + reward) / static_cast<double>(n + 1), n + 1);
}

}  // namespace vetl::bandit
