#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace degenlap::verify {

enum class Status { Pass, Fail, ExpectedPass };

std::string to_string(Status status);

struct Invariant {
  std::string module;
  std::string name;
  Status status = Status::Fail;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct ScenarioResult {
  std::string name;
  std::vector<Invariant> invariants;
  [[nodiscard]] bool passed() const;
};

struct VerifyOptions {
  std::size_t cells = 2048;
  std::uint64_t seed = 20240601;
};

/// Names accepted by run_scenario; "all" expands to every one of them.
const std::vector<std::string>& scenario_names();

/// Runs the invariant checks of one named scenario. Errors raised by the
/// modules are recorded as failed invariants, never propagated; an unknown
/// name raises ConfigError.
ScenarioResult run_scenario(const std::string& name, const VerifyOptions& opts = {});

}  // namespace degenlap::verify
