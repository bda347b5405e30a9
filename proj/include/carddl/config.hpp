#pragma once

#include <stdexcept>

namespace carddl {

struct RunConfig {
  long long maxVennRegions = 4096;
  long long maxTypes = 4096;
  long long solverNodes = 100000;
  long long ilpNodes = 20000;
  long long sparseMultiplier = 4;
  long long timeLimitSeconds = 300;
  int oracleMaxSize = 4;
  unsigned long long seed = 0;
  bool trace = false;
  int jobs = 1;

  void validate() const {
    if (maxVennRegions <= 0 || maxTypes <= 0 || solverNodes <= 0 || ilpNodes <= 0 ||
        sparseMultiplier <= 0 || timeLimitSeconds <= 0 || oracleMaxSize <= 0 || jobs <= 0)
      throw std::invalid_argument("all configuration caps must be positive");
  }
};

}  // namespace carddl
