#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace steerkit;
using nlohmann::json;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("steerkit_io_" + name);
  std::ofstream(path) << body;
  return path.string();
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no steerkit::Error thrown";
  return ErrorCode::DomainError;
}

}  // namespace

TEST(ParseNumber, Expressions) {
  EXPECT_DOUBLE_EQ(io::parse_number("0.25"), 0.25);
  EXPECT_DOUBLE_EQ(io::parse_number("pi/6"), std::numbers::pi / 6);
  EXPECT_DOUBLE_EQ(io::parse_number(" -pi / 4 "), -std::numbers::pi / 4);
  EXPECT_DOUBLE_EQ(io::parse_number("1/sqrt(2)"), 1 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(io::parse_number("2*(1-0.25)"), 1.5);
  EXPECT_DOUBLE_EQ(io::parse_number("1e-3"), 1e-3);
  EXPECT_DOUBLE_EQ(io::parse_number("-2.5E+2"), -250);
  for (const char* bad : {"", "pi pi", "1/", "(1", "sqrt 2", "abc", "1..2"})
    EXPECT_EQ(code_of([&] { io::parse_number(bad); }), ErrorCode::InvalidArgument) << bad;
}

TEST(FamilySpec, ParseAndFormat) {
  const auto spec = io::parse_family_spec("w_v_theta, V=0.2, theta=pi/6");
  EXPECT_EQ(spec.family, Family::w_v_theta);
  EXPECT_DOUBLE_EQ(spec.params.at("V"), 0.2);
  EXPECT_DOUBLE_EQ(spec.params.at("theta"), std::numbers::pi / 6);
  EXPECT_EQ(io::format_family_spec(spec), "w_v_theta,V=0.2,theta=0.523598775598");

  const auto sign = io::parse_family_spec("rho_x0,b3=-0.5,c3=0.2,sign=-");
  EXPECT_EQ(sign.params.at("sign"), -1.0);
  EXPECT_EQ(io::parse_family_spec("pure,a=0.5").family, Family::pure);
  EXPECT_EQ(code_of([] { io::parse_family_spec("nope,a=1"); }), ErrorCode::UnknownFamily);
  EXPECT_EQ(code_of([] { io::parse_family_spec("pure,a"); }), ErrorCode::InvalidArgument);
}

TEST(StateJson, RhoSchema) {
  json rows = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int k = 0; k < 4; ++k) row.push_back({{"re", i == k ? 0.25 : 0.0}, {"im", 0.0}});
    rows.push_back(row);
  }
  const auto st = io::parse_state_json({{"rho", rows}});
  EXPECT_LT((st.rho.matrix() - Matrix4c::Identity() / 4.0).cwiseAbs().maxCoeff(), 1e-15);
  ASSERT_TRUE(st.x_state.has_value());
  EXPECT_FALSE(st.family.has_value());
}

TEST(StateJson, RhoRoundTripThroughSerialization) {
  std::mt19937_64 rng(71);
  const DensityMatrix rho = validate_density(steerkit::testing::random_density(rng));
  const auto st = io::parse_state_json(json::parse(json{{"rho", io::to_json(rho)}}.dump()));
  EXPECT_LT((st.rho.matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(StateJson, PauliAndFamilySchemas) {
  const json pauli = {{"pauli", {{"a", {0, 0, 0}}, {"b", {0, 0, 0}}, {"T", {{1, 0, 0}, {0, -1, 0}, {0, 0, 1}}}}}};
  const auto bell = io::parse_state_json(pauli);
  EXPECT_NEAR(bell.rho(0, 3).real(), 0.5, 1e-15);
  ASSERT_TRUE(bell.x_state.has_value());
  EXPECT_DOUBLE_EQ(bell.x_state->c1, 1.0);

  const json fam = {{"family", {{"name", "rho_x0"}, {"params", {{"b3", -0.5}, {"c3", "1/5"}, {"sign", "+"}}}}}};
  const auto st = io::parse_state_json(fam);
  ASSERT_TRUE(st.family.has_value());
  EXPECT_DOUBLE_EQ(st.family->params.at("c3"), 0.2);
  EXPECT_NEAR(st.rho(1, 1).real(), 0.4, 1e-15);
}

TEST(StateJson, SchemaViolations) {
  EXPECT_EQ(code_of([] { io::parse_state_json(json::array()); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { io::parse_state_json(json::object()); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] {
              io::parse_state_json({{"rho", json::array()}, {"family", {{"name", "pure"}}}});
            }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { io::parse_state_json({{"rho", {{1, 2}}}}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { io::parse_state_json({{"pauli", {{"a", {0, 0}}, {"b", {0, 0, 0}}, {"T", json::array()}}}}); }),
            ErrorCode::InvalidArgument);
  const json unphysical = {{"pauli", {{"a", {0, 0, 0}}, {"b", {0, 0, 0}}, {"T", {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}}}};
  EXPECT_EQ(code_of([&] { io::parse_state_json(unphysical); }), ErrorCode::NotPositive);
}

TEST(StateFile, ReadsAndReportsFailures) {
  const std::string good = write_temp("good.json", R"({"family": {"name": "pure", "params": {"a": 0.6}}})");
  EXPECT_EQ(io::load_state_file(good).family->family, Family::pure);
  EXPECT_EQ(code_of([] { io::load_state_file("/nonexistent/steerkit.json"); }), ErrorCode::InvalidArgument);
  const std::string broken = write_temp("broken.json", "{ not json");
  EXPECT_EQ(code_of([&] { io::load_state_file(broken); }), ErrorCode::InvalidArgument);
  const std::string missing = write_temp("missing.json", R"({"family": {"params": {}}})");
  EXPECT_EQ(code_of([&] { io::load_state_file(missing); }), ErrorCode::InvalidArgument);
}
