#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "clpds/config.hpp"
#include "clpds/csv.hpp"
#include "clpds/scenario.hpp"

using namespace clpds;

namespace {

std::filesystem::path tmp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("series csv round-trip is bit-exact") {
  std::mt19937_64 rng(3);
  const auto unif = [&] {
    return (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 7.3;
  };
  Series s;
  for (int k = 0; k < 200; ++k) {
    Sample a;
    a.t = k / 30.0;
    a.f = {unif(), unif(), std::abs(unif()) + 0.1};
    a.u.v = {unif(), unif(), unif()};
    a.u.omega = {unif(), unif(), unif()};
    a.u.v_dot = {unif(), unif(), unif()};
    a.u.t = a.t;
    s.push_back(a);
  }
  const auto path = tmp_file("clpds_roundtrip.csv");
  write_series_csv(path, s);
  const Series back = read_series_csv(path);
  REQUIRE(back.size() == s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(back[k].t == s[k].t);
    CHECK(back[k].f.x == s[k].f.x);
    CHECK(back[k].f.y == s[k].f.y);
    CHECK(back[k].f.chi == s[k].f.chi);
    CHECK(back[k].u.v == s[k].u.v);
    CHECK(back[k].u.omega == s[k].u.omega);
    CHECK(back[k].u.v_dot == s[k].u.v_dot);
  }
  std::filesystem::remove(path);
}

TEST_CASE("series csv without chi column") {
  const auto path = tmp_file("clpds_nochi.csv");
  {
    std::ofstream f(path);
    f << "t,x,y,vx,vy,vz,wx,wy,wz,ax,ay,az\n"
      << "0,0.1,0.2,0.3,0,0,0,0,0,0,0,0\n";
  }
  const Series s = read_series_csv(path);
  REQUIRE(s.size() == 1);
  CHECK_FALSE(s[0].has_chi());
  CHECK(s[0].f.x == 0.1);
  std::filesystem::remove(path);
}

TEST_CASE("malformed csv names the line") {
  const auto path = tmp_file("clpds_bad.csv");
  {
    std::ofstream f(path);
    f << "t,x,y,chi,vx,vy,vz,wx,wy,wz,ax,ay,az\n"
      << "0,0,0,1,0,0,0,0,0,0,0,0,0\n"
      << "oops,0,0,1,0,0,0,0,0,0,0,0,0\n";
  }
  try {
    read_series_csv(path);
    FAIL("expected a parse error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }

  {
    std::ofstream f(path);
    f << "t,x,y,chi,vx,vy,vz,wx,wy,wz,ax,ay,az\n"
      << "0,0,0,1,0,0\n";  // truncated row
  }
  try {
    read_series_csv(path);
    FAIL("expected a field-count error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("table csv round-trip") {
  Table t;
  t.columns = {"t", "a", "b"};
  t.rows = {{0.0, 1.5, -2.25}, {1.0 / 30.0, 3.14159, 0.0}};
  const auto path = tmp_file("clpds_table.csv");
  write_table_csv(path, t);
  const Table back = read_table_csv(path);
  CHECK(back.columns == t.columns);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < t.rows[i].size(); ++j)
      CHECK(back.rows[i][j] == t.rows[i][j]);
  std::filesystem::remove(path);
}

TEST_CASE("config parse and overrides") {
  const Config c = Config::from_string(
      "# comment\n[scenario]\nname = demo\ndt = 0.05\n[gains]\nK_cl = 0.2\n");
  CHECK(c.get_string("scenario.name", "") == "demo");
  CHECK(c.get_double("scenario.dt", 0.0) == 0.05);
  CHECK(c.get_double("gains.K_cl", 0.0) == 0.2);

  Config o = c;
  o.apply_overrides({"scenario.dt=0.1"}, ScenarioConfig::known_keys());
  CHECK(o.get_double("scenario.dt", 0.0) == 0.1);

  try {
    o.apply_overrides({"scenario.bogus=1"}, ScenarioConfig::known_keys());
    FAIL("expected rejection");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("scenario.bogus") != std::string::npos);
  }
}

TEST_CASE("scenario config round-trips through the file format") {
  for (const ScenarioConfig& sc : {scenario_sim1(), scenario_sim2()}) {
    const std::string text = sc.to_config().serialize();
    const ScenarioConfig back =
        ScenarioConfig::from_config(Config::from_string(text));
    CHECK(back.to_config().values() == sc.to_config().values());
  }
}

TEST_CASE("file hash is content-determined") {
  const auto a = tmp_file("clpds_hash_a.txt");
  const auto b = tmp_file("clpds_hash_b.txt");
  { std::ofstream(a) << "same bytes"; }
  { std::ofstream(b) << "same bytes"; }
  CHECK(file_hash(a) == file_hash(b));
  { std::ofstream(b) << "different"; }
  CHECK(file_hash(a) != file_hash(b));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}
