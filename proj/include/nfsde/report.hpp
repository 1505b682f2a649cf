#pragma once

#include "nfsde/coupling.hpp"
#include "nfsde/estimators.hpp"
#include "nfsde/model.hpp"

#include <json.hpp>

namespace nfsde {

using Json = nlohmann::json;

/// Non-finite numbers serialize as null; optional values as null when absent.
Json to_json(const ConditionReport& r);
Json to_json(const VerifierReport& r);
Json to_json(const HypothesisConstants& c);
Json to_json(const EstimateReport& r);
Json to_json(const LineFit& f);
Json to_json(const TrendTest& t);
Json to_json(const ContractionResult& r);
Json to_json(const ExpMomentSeries& r);
Json to_json(const HarnackReport& r);
Json to_json(const HarnackTwoStage& r);
Json to_json(const LawCheckReport& r);
Json to_json(const TvDecayReport& r);
Json to_json(const WassersteinSeries& r);
Json to_json(const L2DecayReport& r);
Json to_json(const HyperReport& r);
Json to_json(const NovikovReport& r);

/// Coupling summary: tau, density, defects and the envelope check.
Json coupling_summary(const CouplingTrace& trace);

/// Describes a model: name, dimension, kappa, r0, sigma, constants, parameters.
Json describe_model(const ModelSpec& spec);

}  // namespace nfsde
