#ifndef SIGA_IO_HPP
#define SIGA_IO_HPP

#include <siga/oracle.hpp>
#include <siga/pvi.hpp>
#include <siga/solver.hpp>

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace siga::io {

// Shortest round-trip decimal text, independent of the locale.
std::string format_number(double value);

inline constexpr const char* kTraceCsvHeader = "t,mu,zeta,tau,feas,feas_mu,stat,objective,step_norm";

void write_trace_csv(std::ostream& out, const SigaTrace<double>& trace);

nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const SigaRecord<double>& record);
nlohmann::json to_json(const SigaTrace<double>& trace);
nlohmann::json to_json(const SigaState<double>& state);
nlohmann::json to_json(const StationarityCertificate<double>& certificate);
nlohmann::json to_json(const ContractionReport<double>& report);
nlohmann::json to_json(const oracle::ProbeReport& report);
nlohmann::json to_json(const std::vector<oracle::ProbeReport>& reports);

Eigen::VectorXd vector_from_json(const nlohmann::json& j);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace siga::io

#endif  // SIGA_IO_HPP
