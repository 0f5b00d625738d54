#include <doctest.h>

#include <siga/checks.hpp>

using namespace siga;

namespace {

std::vector<BuiltinProblem> all_builtins() {
  std::vector<BuiltinProblem> out;
  for (const auto& name : builtin_names()) out.push_back(builtin_by_name(name));
  return out;
}

void require_all_pass(const std::vector<checks::ProbeReport>& reports) {
  REQUIRE_FALSE(reports.empty());
  for (const auto& r : reports) {
    INFO(r.quantity << ": " << r.max_observed << " vs " << r.threshold);
    CHECK(r.pass);
  }
}

}  // namespace

TEST_CASE("gradient suite passes on the builtins") {
  require_all_pass(checks::gradients_suite(all_builtins(), 42));
}

TEST_CASE("smoothing suite passes on the builtins") {
  require_all_pass(checks::smoothing_suite(all_builtins(), 42));
}

TEST_CASE("contraction suite passes on the builtins") {
  require_all_pass(checks::contraction_suite(all_builtins(), 42));
}

TEST_CASE("corrupted Jacobian is caught") {
  const auto reports = checks::run_suite("gradients", {corrupted()}, 42);
  CHECK_FALSE(checks::all_pass(reports));
  bool jac_y_failed = false;
  for (const auto& r : reports) {
    if (!r.pass && r.quantity.find("jac_F_y") != std::string::npos) jac_y_failed = true;
  }
  CHECK(jac_y_failed);
}

TEST_CASE("suite selection") {
  CHECK_THROWS_AS(checks::run_suite("everything", {toy1d()}, 1), ArgumentError);
  const auto a = checks::run_suite("smoothing", {toy1d()}, 7);
  const auto b = checks::run_suite("smoothing", {toy1d()}, 7);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].max_observed == b[i].max_observed);
}

TEST_CASE("CHKS uniform bound probe") {
  const auto r = checks::chks_uniform_bound(1e-3, 1000);
  CHECK(r.pass);
  CHECK(r.samples == 1000);
}
