#include "ksrl/reference.hpp"

namespace ksrl::reference {

std::vector<double> evaluate_population_serial(const RolloutModel& model, const Vec& s,
                                               const std::vector<Mat>& population) {
  std::vector<double> out;
  out.reserve(population.size());
  for (const Mat& seq : population) out.push_back(rollout_return(model, s, seq));
  return out;
}

}  // namespace ksrl::reference
