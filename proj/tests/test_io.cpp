#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "tcmerton/errors.hpp"
#include "tcmerton/io.hpp"

using namespace tcm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("tcmerton_io_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d / name;
}

}  // namespace

TEST(FormatDouble, RoundTripsExactly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int k = 0; k < 2000; ++k) {
    const double v = std::ldexp(u(rng), static_cast<int>(u(rng) * 30));
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(FieldCsv, RoundTrip) {
  const Grid g(1.0, 7, -2.0, 3.0, 11);
  const auto a = ScalarField2D::from_function(g, [](double t, double y) { return std::sin(t * y) / 3; });
  const auto b = ScalarField2D::from_function(g, [](double t, double y) { return t - y; });
  const NamedField f[] = {{"alpha", &a}, {"beta", &b}};
  const auto path = scratch("fields.csv");
  write_fields_csv(path, f);
  const auto back = read_field_csv(path, "alpha");
  EXPECT_TRUE(back.grid() == g);
  for (std::size_t k = 0; k < a.values().size(); ++k) EXPECT_EQ(back.values()[k], a.values()[k]);
  EXPECT_EQ(read_text_file(path).substr(0, 16), "t,y,alpha,beta\n0");
  EXPECT_THROW(read_field_csv(path, "gamma"), IntegrityError);
}

TEST(FieldCsv, RejectsMalformedInput) {
  const auto path = scratch("bad.csv");
  write_text_file(path, "t,y,v\n0,0,1\n0,1,x\n");
  EXPECT_THROW(read_field_csv(path, "v"), IntegrityError);
  write_text_file(path, "a,b,v\n0,0,1\n");
  EXPECT_THROW(read_field_csv(path, "v"), IntegrityError);
  write_text_file(path, "t,y,v\n0,0,1\n0,1,1\n1,0,1\n");
  EXPECT_THROW(read_field_csv(path, "v"), IntegrityError);
}
