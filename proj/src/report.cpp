#include "wmod/report.hpp"

#include <cmath>
#include <ostream>

#include "wmod/numeric.hpp"

namespace wmod {

namespace {

Json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return nullptr;
    return v > 0 ? "inf" : "-inf";
}

Json optional_rate(const std::optional<RateEstimate>& r) {
    return r ? to_json(*r) : Json(nullptr);
}

std::string lambda_text(const std::optional<RateEstimate>& r) {
    return r ? format_real(r->lambda) : "";
}

}  // namespace

Json to_json(const WeightParams& w) {
    return {{"p", format_p(w.p)}, {"alpha", w.alpha}};
}

Json to_json(const RateEstimate& r) {
    return {{"lambda", number(r.lambda)},
            {"constant", number(r.constant)},
            {"residual", number(r.residual)},
            {"x_lo", r.x_lo},
            {"x_hi", r.x_hi},
            {"points", r.points}};
}

Json to_json(const SelftestReport& r) {
    return {{"max_err_identity", number(r.max_err_identity)},
            {"max_err_unit", number(r.max_err_unit)},
            {"max_err_product", number(r.max_err_product)},
            {"tolerance", kSelftestTolerance},
            {"pass", r.pass}};
}

Json to_json(const MultiplierReport& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"f_label", row.f_label},
                        {"n", row.n},
                        {"y", row.y},
                        {"a_n", number(row.coeff)},
                        {"a_n_shifted", number(row.shifted_coeff)},
                        {"multiplier", number(row.multiplier)},
                        {"rel_err", row.skipped ? Json(nullptr) : number(row.rel_err)},
                        {"skipped", row.skipped}});
    }
    return {{"max_rel_err", number(r.max_rel_err)},
            {"tolerance", r.tolerance},
            {"pass", r.pass},
            {"rows", rows}};
}

Json to_json(const JacksonReport& r) {
    Json ratios = Json::array();
    for (double v : r.ratios) ratios.push_back(number(v));
    return {{"f_label", r.f_label},
            {"w", to_json(r.w)},
            {"n_values", r.n_values},
            {"ratios", ratios},
            {"max_ratio", number(r.max_ratio)},
            {"early_max", number(r.early_max)},
            {"late_max", number(r.late_max)},
            {"pass", r.pass}};
}

Json to_json(const RateCheck& r) {
    return {{"f_label", r.f_label},
            {"w", to_json(r.w)},
            {"theorem", to_string(r.theorem)},
            {"status", to_string(r.status)},
            {"lambda_E", optional_rate(r.lambda_E)},
            {"lambda_H", optional_rate(r.lambda_H)},
            {"tolerance", r.tolerance},
            {"note", r.note}};
}

Json to_json(const ClassMembershipReport& r) {
    return {{"f_label", r.f_label},
            {"w", to_json(r.w)},
            {"lambda_E", optional_rate(r.lambda_E)},
            {"lambda_H", optional_rate(r.lambda_H)},
            {"in_hypothesis", r.in_hypothesis},
            {"coincide", r.coincide},
            {"tolerance", r.tolerance},
            {"note", r.note}};
}

Json to_json(const FunctionVerdict& v) {
    Json converged = Json::array();
    for (bool c : v.study.errors.converged) converged.push_back(c);
    Json errors = Json::array();
    for (double e : v.study.errors.errors) errors.push_back(number(e));
    Json omegas = Json::array();
    for (double o : v.study.omegas) omegas.push_back(number(o));
    Json out = {{"f_label", v.study.f_label},
                {"w", to_json(v.study.w)},
                {"n_values", v.study.n_values},
                {"E_n", errors},
                {"omega_1_over_n", omegas},
                {"solver_converged", converged}};
    out["jackson"] = v.jackson ? to_json(*v.jackson) : Json("out_of_hypothesis");
    out["inverse"] = v.inverse ? to_json(*v.inverse) : Json("out_of_hypothesis");
    out["direct"] = v.direct ? to_json(*v.direct) : Json("out_of_hypothesis");
    out["coincidence"] = v.coincidence ? to_json(*v.coincidence) : Json("out_of_hypothesis");
    out["pass"] = all_pass(v);
    return out;
}

void write_summary_csv(std::ostream& out, const std::vector<FunctionVerdict>& verdicts,
                       const std::string& fingerprint) {
    out << "# kernel=" << fingerprint << "\n";
    out << "f_label,p,alpha,check,status,lambda_E,lambda_H,detail\n";
    for (const auto& v : verdicts) {
        const std::string head = v.study.f_label + "," + format_p(v.study.w.p) + "," +
                                 format_real(v.study.w.alpha) + ",";
        if (v.jackson) {
            out << head << "jackson," << (v.jackson->pass ? "pass" : "fail") << ",,,"
                << "max_ratio=" << format_real(v.jackson->max_ratio) << "\n";
        } else {
            out << head << "jackson,out_of_hypothesis,,,\n";
        }
        for (const auto* c : {&v.inverse, &v.direct}) {
            if (*c) {
                out << head << to_string((*c)->theorem) << "," << to_string((*c)->status) << ","
                    << lambda_text((*c)->lambda_E) << "," << lambda_text((*c)->lambda_H) << ","
                    << "\n";
            }
        }
        if (v.coincidence) {
            const auto& m = *v.coincidence;
            const std::string status =
                !m.in_hypothesis ? "out_of_hypothesis" : (m.coincide ? "pass" : "fail");
            out << head << "coincidence," << status << "," << lambda_text(m.lambda_E) << ","
                << lambda_text(m.lambda_H) << ",\n";
        }
    }
}

}  // namespace wmod
