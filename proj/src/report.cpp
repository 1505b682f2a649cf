#include "nfsde/report.hpp"

#include <cmath>

namespace nfsde {
namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <typename T>
Json optional_json(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_same_v<T, double>) {
    return number(*v);
  } else {
    return to_json(*v);
  }
}

Json optional_bool(const std::optional<bool>& v) { return v ? Json(*v) : Json(nullptr); }

Json numbers(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

template <typename T>
Json list(const std::vector<T>& items) {
  Json out = Json::array();
  for (const auto& item : items) out.push_back(to_json(item));
  return out;
}

Json matrix(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Json to_json(const ConditionReport& r) {
  return {{"rho", number(r.rho)},
          {"gate", number(r.gate)},
          {"lambda", optional_json(r.lambda)},
          {"feasible", r.feasible}};
}

Json to_json(const VerifierReport& r) {
  return {{"samples", r.samples}, {"violations", r.violations}, {"worst_margin", number(r.worst_margin)}};
}

Json to_json(const HypothesisConstants& c) {
  return {{"L1", number(c.lipschitz_z)},
          {"L2", number(c.lipschitz_b)},
          {"lambda1", number(c.lambda1)},
          {"lambda2", number(c.lambda2)},
          {"kappa1", number(c.kappa1)}};
}

Json to_json(const EstimateReport& r) {
  Json metadata = Json::object();
  for (const auto& [key, value] : r.metadata) metadata[key] = number(value);
  return {{"estimate", number(r.point_estimate)},
          {"std_error", number(r.std_error)},
          {"trials", r.trials},
          {"pass", optional_bool(r.pass)},
          {"rule", r.rule},
          {"metadata", metadata}};
}

Json to_json(const LineFit& f) {
  return {{"slope", number(f.slope)},
          {"intercept", number(f.intercept)},
          {"slope_std_error", number(f.slope_std_error)}};
}

Json to_json(const TrendTest& t) { return {{"rho", number(t.rho)}, {"p_value", number(t.p_value)}}; }

Json to_json(const ContractionResult& r) {
  return {{"times", numbers(r.times)},
          {"squared_gap", numbers(r.squared_gap)},
          {"fit", optional_json(r.fit)},
          {"lambda_cert", optional_json(r.lambda_cert)},
          {"pass", optional_bool(r.pass)}};
}

Json to_json(const ExpMomentSeries& r) {
  return {{"reports", list(r.reports)}, {"fit", optional_json(r.fit)}, {"pass", r.pass}};
}

Json to_json(const HarnackReport& r) {
  return {{"lhs", number(r.lhs)},
          {"lhs_se", number(r.lhs_se)},
          {"pf2_eta", number(r.pf2_eta)},
          {"pf2_eta_se", number(r.pf2_eta_se)},
          {"rhs", number(r.rhs)},
          {"rhs_se", number(r.rhs_se)},
          {"c", number(r.c)},
          {"margin", number(r.margin)},
          {"c_star", optional_json(r.c_star)},
          {"c_star_se", number(r.c_star_se)},
          {"trials", r.trials},
          {"pass", r.pass}};
}

Json to_json(const HarnackTwoStage& r) {
  return {{"measurement", to_json(r.measurement)},
          {"c_frozen", number(r.c_frozen)},
          {"verification", to_json(r.verification)},
          {"pass", r.verification.pass}};
}

Json to_json(const LawCheckReport& r) {
  Json comparisons = Json::array();
  for (const auto& c : r.comparisons) {
    comparisons.push_back({{"name", c.name},
                           {"reweighted", to_json(c.reweighted)},
                           {"plain", to_json(c.plain)},
                           {"difference", number(c.difference)},
                           {"difference_se", number(c.difference_se)},
                           {"pass", c.pass}});
  }
  return {{"comparisons", comparisons},
          {"trials", r.trials},
          {"excluded", r.excluded},
          {"exclusion_rate", number(r.exclusion_rate)},
          {"pass", r.pass}};
}

Json to_json(const TvDecayReport& r) {
  return {{"times", numbers(r.times)},
          {"total_times", numbers(r.total_times)},
          {"bounds", list(r.bounds)},
          {"fit", optional_json(r.fit)},
          {"trend", to_json(r.trend)},
          {"lambda_cert", optional_json(r.lambda_cert)},
          {"excluded", r.excluded},
          {"pass", optional_bool(r.pass)}};
}

Json to_json(const WassersteinSeries& r) {
  return {{"t1_values", numbers(r.t1_values)},
          {"offset", number(r.offset)},
          {"reports", list(r.reports)},
          {"fit", optional_json(r.fit)},
          {"trend", to_json(r.trend)},
          {"lambda_cert", optional_json(r.lambda_cert)},
          {"pass", optional_bool(r.pass)}};
}

Json to_json(const L2DecayReport& r) {
  return {{"times", numbers(r.times)},
          {"variances", list(r.variances)},
          {"fit", optional_json(r.fit)},
          {"lambda_cert", optional_json(r.lambda_cert)},
          {"pass", optional_bool(r.pass)}};
}

Json to_json(const HyperReport& r) {
  return {{"t", number(r.t)},
          {"norm4", number(r.norm4)},
          {"norm4_se", number(r.norm4_se)},
          {"norm2", number(r.norm2)},
          {"norm2_se", number(r.norm2_se)},
          {"pass", r.pass}};
}

Json to_json(const NovikovReport& r) {
  return {{"estimate", number(r.estimate)},
          {"std_error", number(r.std_error)},
          {"top_decile_share", number(r.top_decile_share)},
          {"divergence_suspected", r.divergence_suspected},
          {"trials", r.trials}};
}

Json coupling_summary(const CouplingTrace& trace) {
  return {{"t", number(trace.t)},
          {"tol", number(trace.tol)},
          {"coupled", trace.coupled()},
          {"tau", number(trace.tau)},
          {"tau_index", trace.tau_index ? Json(*trace.tau_index) : Json(nullptr)},
          {"gap_at_tau", number(trace.gap_at_tau)},
          {"log_density", number(trace.log_density)},
          {"density", number(trace.density)},
          {"envelope_excess", number(envelope_excess(trace))},
          {"segment_gap_excess", number(segment_gap_excess(trace))},
          {"neutral_identity_defect", number(neutral_identity_check(trace))},
          {"pinned_after_tau", pinned_after_tau(trace)}};
}

Json describe_model(const ModelSpec& spec) {
  Json parameters = Json::object();
  for (const auto& [key, value] : spec.parameters()) parameters[key] = number(value);
  return {{"name", spec.name()},
          {"dim", spec.dim()},
          {"kappa", number(spec.kappa())},
          {"r0", number(spec.delay())},
          {"sigma", matrix(spec.sigma())},
          {"sigma_condition", number(spec.sigma_condition())},
          {"constants", to_json(spec.constants())},
          {"parameters", parameters}};
}

}  // namespace nfsde
