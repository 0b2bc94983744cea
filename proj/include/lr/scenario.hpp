#pragma once

#include <stdexcept>
#include <string>

namespace lr {

struct UnknownScenarioError : std::runtime_error {
  explicit UnknownScenarioError(const std::string& name)
      : std::runtime_error("unknown scenario: " + name) {}
};

/// One bundled demonstration: model file, world file, root component and
/// the analytic expectations its acceptance checks pin down.
struct ScenarioBundle {
  std::string name;
  std::string modelFile;
  std::string worldFile;
  std::string rootName;
  std::string expectedOutcome;  // run status name

  // Screwing oracle parameters (zero for other bundles). z values are the
  // flange height at thread engagement and at the seated stop; pitchPerTurn
  // is the z advance of one screw-down/turn-back cycle.
  double z0 = 0.0;
  double zTarget = 0.0;
  double pitchPerTurn = 0.0;
  double torqueLimit = 0.0;  // Nm, the screw-down stop threshold

  // Rail expectations.
  int taskCount = 0;
  double placeTolPos = 0.0;  // m
  double placeTolRot = 0.0;  // rad
};

/// Loop-count oracle for the screwing demonstration: the number of
/// screw-down cycles needed to descend from z0 to zTarget at pitchPerTurn
/// per cycle, computed independently of the simulation. Throws
/// std::domain_error unless z0 > zTarget and pitchPerTurn > 0.
int expected_screw_iterations(double z0, double zTarget, double pitchPerTurn);

/// Returns the bundle named "screwing" or "rail"; file paths are joined
/// onto `scenariosDir`.
ScenarioBundle load_scenario(const std::string& name,
                             const std::string& scenariosDir = "scenarios");

}  // namespace lr
