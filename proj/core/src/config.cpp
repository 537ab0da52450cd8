#include "fpanel/config.hpp"

#include <stdexcept>
#include <string>

namespace fpanel {

void RunConfig::validate() const {
  if (!(variance_threshold > 0.0 && variance_threshold < 1.0)) {
    throw std::invalid_argument("variance threshold must lie in (0, 1), got " +
                                std::to_string(variance_threshold));
  }
  if (!(pooled_threshold > 0.0 && pooled_threshold < 1.0)) {
    throw std::invalid_argument("pooled threshold must lie in (0, 1), got " +
                                std::to_string(pooled_threshold));
  }
  if (h_max < 1) {
    throw std::invalid_argument("maximum lag must be at least 1, got " +
                                std::to_string(h_max));
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("significance level must lie in (0, 1), got " +
                                std::to_string(alpha));
  }
  if (replications < 1) {
    throw std::invalid_argument("replication count must be at least 1, got " +
                                std::to_string(replications));
  }
}

} // namespace fpanel
