#include "subcal/error.hpp"

#include <sstream>
#include <utility>

namespace subcal {

DegenerateWeightError::DegenerateWeightError(std::size_t subject_, int observed_time_)
    : Error("degenerate censoring weight for subject " + std::to_string(subject_) +
            ": G(" + std::to_string(observed_time_ - 1) +
            ") = 0 but later at-risk weights are required"),
      subject(subject_),
      observed_time(observed_time_) {}

DesignDeficiencyError::DesignDeficiencyError(int time_)
    : Error("time index " + std::to_string(time_) + " has no rows in the design"), time(time_) {}

ConvergenceError::ConvergenceError(const std::string& what, std::vector<double> last_iterate_,
                                   int iterations_)
    : Error(what), last_iterate(std::move(last_iterate_)), iterations(iterations_) {}

InvalidLogitError::InvalidLogitError(std::size_t subject_, int time_, double hazard)
    : Error([&] {
          std::ostringstream os;
          os << "predicted hazard " << hazard << " for subject " << subject_ << " at time "
             << time_ << " has no finite logit";
          return os.str();
      }()),
      subject(subject_),
      time(time_) {}

}  // namespace subcal
