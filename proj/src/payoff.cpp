#include "endocost/payoff.hpp"

namespace endocost {

std::string_view to_string(RewardMode mode) {
  return mode == RewardMode::Paper ? "paper" : "exact_gradient";
}

RewardMode reward_mode_from_string(std::string_view name) {
  if (name == "paper") return RewardMode::Paper;
  if (name == "exact_gradient") return RewardMode::ExactGradient;
  throw Error(ErrorKind::InvalidArgument, "unknown reward mode '" + std::string(name) + "'");
}

}  // namespace endocost
