#include "siga/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

namespace siga::io {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

void write_trace_csv(std::ostream& out, const SigaTrace<double>& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.t << ',' << format_number(r.mu) << ',' << format_number(r.zeta) << ','
        << format_number(r.tau) << ',' << format_number(r.feas) << ',' << format_number(r.feas_mu)
        << ',' << format_number(r.stat) << ',' << format_number(r.objective) << ','
        << format_number(r.step_norm) << '\n';
  }
}

nlohmann::json to_json(const Eigen::VectorXd& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

nlohmann::json to_json(const SigaRecord<double>& r) {
  return {{"t", r.t},
          {"mu", r.mu},
          {"zeta", r.zeta},
          {"tau", r.tau},
          {"feas", r.feas},
          {"feas_mu", r.feas_mu},
          {"stat", r.stat},
          {"objective", r.objective},
          {"step_norm", r.step_norm},
          {"inner_iters", r.inner_iters},
          {"adjoint_norm", r.adjoint_norm},
          {"grad_y_norm", r.grad_y_norm},
          {"jac_y_norm", r.jac_y_norm}};
}

nlohmann::json to_json(const SigaTrace<double>& trace) {
  auto arr = nlohmann::json::array();
  for (const auto& r : trace.records) arr.push_back(to_json(r));
  return {{"records", arr}};
}

nlohmann::json to_json(const SigaState<double>& s) {
  return {{"t", s.t},     {"x", to_json(s.x)},   {"y", to_json(s.y)},     {"v", to_json(s.v)},
          {"mu", s.mu},   {"zeta", s.zeta},      {"tau", s.tau},          {"d_x", to_json(s.d_x)}};
}

nlohmann::json to_json(const StationarityCertificate<double>& c) {
  auto cases = nlohmann::json::array();
  for (const auto& label : c.element.case_labels) {
    cases.push_back({{"case", to_string(label.kind)}, {"cbar", label.cbar}});
  }
  return {{"epsilon", c.epsilon()},
          {"epsilon_feas", c.epsilon_feas},
          {"epsilon_stat_x", c.epsilon_stat_x},
          {"epsilon_stat_y", c.epsilon_stat_y},
          {"jacobian_gap", c.jacobian_gap},
          {"beta", c.beta},
          {"clarke_cases", cases}};
}

nlohmann::json to_json(const ContractionReport<double>& r) {
  return {{"sigma", r.sigma},
          {"lbar", r.lbar},
          {"condition", to_string(r.condition)},
          {"delta", r.delta},
          {"delta_max", r.delta_max},
          {"L", r.L},
          {"constant_jacobian", r.constant_jacobian},
          {"warning", r.warning}};
}

nlohmann::json to_json(const oracle::ProbeReport& r) {
  // Infinite maxima are not representable in JSON numbers.
  nlohmann::json observed = std::isfinite(r.max_observed) ? nlohmann::json(r.max_observed)
                                                          : nlohmann::json(format_number(r.max_observed));
  return {{"quantity", r.quantity},
          {"samples", r.samples},
          {"max_observed", observed},
          {"threshold", r.threshold},
          {"pass", r.pass}};
}

nlohmann::json to_json(const std::vector<oracle::ProbeReport>& reports) {
  auto arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return {{"records", arr}};
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ArgumentError("expected a numeric array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ArgumentError("expected a numeric array");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << contents;
  if (!out) throw Error("failed writing " + path);
}

}  // namespace siga::io
