#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "wmod/analysis.hpp"
#include "wmod/shift.hpp"

namespace wmod {

using Json = nlohmann::ordered_json;

[[nodiscard]] Json to_json(const WeightParams& w);
[[nodiscard]] Json to_json(const RateEstimate& r);
[[nodiscard]] Json to_json(const SelftestReport& r);
[[nodiscard]] Json to_json(const MultiplierReport& r);
[[nodiscard]] Json to_json(const JacksonReport& r);
[[nodiscard]] Json to_json(const RateCheck& r);
[[nodiscard]] Json to_json(const ClassMembershipReport& r);
[[nodiscard]] Json to_json(const FunctionVerdict& v);

/// One row per (function, check):
/// f_label,p,alpha,check,status,lambda_E,lambda_H,detail
void write_summary_csv(std::ostream& out, const std::vector<FunctionVerdict>& verdicts,
                       const std::string& fingerprint);

}  // namespace wmod
