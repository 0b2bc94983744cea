#include "lr/scenario.hpp"

#include <cmath>

namespace lr {

int expected_screw_iterations(double z0, double zTarget, double pitchPerTurn) {
  if (!(z0 > zTarget)) throw std::domain_error("z0 must be above zTarget");
  if (!(pitchPerTurn > 0)) throw std::domain_error("pitchPerTurn must be positive");
  // Slack of 1e-9 keeps exact multiples from rounding up one extra turn.
  double turns = std::ceil((z0 - zTarget) / pitchPerTurn - 1e-9);
  return std::max(1, static_cast<int>(turns));
}

ScenarioBundle load_scenario(const std::string& name, const std::string& scenariosDir) {
  ScenarioBundle b;
  b.name = name;
  if (name == "screwing") {
    b.modelFile = scenariosDir + "/screwing.lr";
    b.worldFile = scenariosDir + "/screwing_world.json";
    b.rootName = "ScrewTask";
    b.expectedOutcome = "Success";
    b.z0 = 0.020;
    b.zTarget = 0.005;
    b.pitchPerTurn = 0.005;
    b.torqueLimit = 0.32;
  } else if (name == "rail") {
    b.modelFile = scenariosDir + "/rail_assembly.lr";
    b.worldFile = scenariosDir + "/rail_world.json";
    b.rootName = "RailAssembly";
    b.expectedOutcome = "Success";
    b.taskCount = 3;
    b.placeTolPos = 0.001;
    b.placeTolRot = 1.0 * M_PI / 180.0;
  } else {
    throw UnknownScenarioError(name);
  }
  return b;
}

}  // namespace lr
