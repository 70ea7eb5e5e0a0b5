#pragma once

#include "sqfn/harness.hpp"

namespace sqfn::harness {

ExperimentReport exp_annihilation(const ExperimentConfig& cfg, const Json& params);
ExperimentReport exp_aperture_domination(const ExperimentConfig& cfg, const Json& params);
ExperimentReport exp_ball_estimate_G(const ExperimentConfig& cfg, const Json& params);
ExperimentReport exp_ball_estimate_gstar(const ExperimentConfig& cfg, const Json& params);
ExperimentReport exp_ball_estimate_commutator(const ExperimentConfig& cfg, const Json& params);
ExperimentReport exp_morrey_boundedness(const ExperimentConfig& cfg, const Json& params);
ExperimentReport exp_space_foundations(const ExperimentConfig& cfg, const Json& params);
ExperimentReport exp_hardy_operators(const ExperimentConfig& cfg, const Json& params);
ExperimentReport exp_pair_conditions(const ExperimentConfig& cfg, const Json& params);

}  // namespace sqfn::harness
